#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldtm/corpus.hpp"

namespace ldtm {

// Known parameters a synthetic corpus is sampled from.
struct GroundTruth {
  std::vector<std::vector<double>> phi_true;              // [k][m], rows sum to 1
  std::vector<std::vector<std::vector<double>>> mu_true;  // [n][t-1][k], transition t -> t+1
  std::vector<std::vector<double>> theta_seed;            // [n][k], the t=1 interest profile
  int tokens_per_step = 40;
  double seed_concentration = 10.0;  // scales theta_seed into the t=1 Dirichlet parameter
  double draw_smoothing = 0.5;       // added to every Dirichlet parameter before drawing theta

  int users() const { return static_cast<int>(theta_seed.size()); }
  int topics() const { return theta_seed.empty() ? 0 : static_cast<int>(theta_seed[0].size()); }
  int items() const { return phi_true.empty() ? 0 : static_cast<int>(phi_true[0].size()); }
  void validate() const;
};

struct SynthCorpus {
  Corpus corpus;
  std::vector<std::vector<std::vector<double>>> theta_drawn;  // [n][t-1][k]
};

// Forward-simulates the generative chain: per user, propagate the Dirichlet
// parameter with mu_true, absorb drawn topic counts, draw theta, then draw
// tokens_per_step (topic, item) pairs. Vocabulary index equals the phi_true
// column for every item.
SynthCorpus generate_corpus(const GroundTruth& truth, int T, std::uint64_t seed);

// Block-structured truth: topic k concentrates on its own slice of the item
// range, and user n uses the decay value mu_choices[n mod |mu_choices|] for
// every topic and step. Defaults follow the desk scale N=50, T=12, K=5, M=200.
GroundTruth make_heterogeneous_truth(int users, int T, int topics, int items, int tokens_per_step,
                                     std::uint64_t seed,
                                     const std::vector<double>& mu_choices = {1.0, 0.5, 0.0});

struct CausalPair {
  std::vector<std::vector<double>> i_series;  // [t-1][k], rows sum to 1
  std::vector<std::vector<double>> j_series;
};

// Lag-coupled pair with planted direction i -> j:
//   i_t = normalize(ar * i_raw_{t-1} + noise * g_t)        (simplex-projected AR(1))
//   j_t = normalize(coupling * i_{t-lag} + (1-coupling) * j_{t-1} + noise * h_t)
// g, h have independent Exp(1) components. coupling = 1 with noise = 0 makes
// j a bitwise copy of the lagged i series.
CausalPair generate_causal_pair(int lag, double noise, int T, int topics, std::uint64_t seed,
                                double coupling, double ar);
CausalPair generate_causal_pair(int lag, double noise, int T, int topics, std::uint64_t seed);

std::vector<AdoptionEvent> corpus_to_events(const Corpus& corpus);

std::string synth_user_name(int index, int total);
std::string synth_item_name(int index, int total);

}  // namespace ldtm
