#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ldtm/corpus.hpp"
#include "ldtm/errors.hpp"
#include "ldtm/rng.hpp"

namespace ldtm {

enum class DynamicsMode { Identity, HalfDecay, FullDecay, Learned };

// Smoothing dimension of the Gibbs item-factor denominator. VocabBeta is the
// proper collapsed conditional (vocabulary-sized M*beta); TopicBeta (K*beta)
// is kept selectable for comparison runs.
enum class GibbsNormalizer { VocabBeta, TopicBeta };

struct ModelConfig {
  int topics = 26;
  double alpha = 0.5;
  double beta = 0.1;
  int iterations = 50;
  DynamicsMode dynamics_mode = DynamicsMode::Learned;
  std::uint64_t seed = 1;

  // Decay-descent controls (Learned mode only).
  double learn_rate = 0.1;
  int max_gd_steps = 100;  // set to 1 for a single descent step per sweep
  double gd_tolerance = 1e-6;

  GibbsNormalizer gibbs_normalizer = GibbsNormalizer::VocabBeta;

  void validate() const;
};

// Latent assignment state. psi[n][t-1][k] counts user n's time-t tokens on
// topic k; xi[k][m] counts item m on topic k globally.
struct TopicState {
  std::vector<std::vector<std::vector<int>>> z;
  std::vector<std::vector<std::vector<int>>> psi;
  std::vector<std::vector<long long>> xi;
  std::vector<long long> xi_row_sum;
};

// Dirichlet concentration vectors: x_prior[n][t-1] before absorbing the
// time-t topic counts, x_post[n][t-1] after. The t=1 prior is the zero
// vector (no history), which makes the first slice plain LDA.
struct DirichletParams {
  std::vector<std::vector<std::vector<double>>> x_prior;
  std::vector<std::vector<std::vector<double>>> x_post;
};

// Diagonal decay entries; mu[n][t-1][k] scales the transition from time t to
// t+1, so each user carries T_n - 1 vectors. Entries stay in [0, 1].
struct DynamicsMatrix {
  std::vector<std::vector<std::vector<double>>> mu;
};

struct TopicSeries {
  std::vector<std::vector<std::vector<double>>> theta;  // [n][t-1][k], rows sum to 1
};

struct PhiMatrix {
  std::vector<std::vector<double>> phi;  // [k][m], rows sum to 1
};

struct InferenceResult {
  TopicSeries theta;
  PhiMatrix phi;
  DynamicsMatrix dynamics;
  std::vector<double> loglik_trace;  // training log-likelihood per sweep
  TopicState state;
  DirichletParams params;
};

TopicState init_assignments(const Corpus& corpus, const ModelConfig& config);
TopicState init_assignments(const Corpus& corpus, const ModelConfig& config, Rng& rng);

// x_{t|t-1} = diag(mu) * x_{t-1|t-1}
std::vector<double> kalman_predict(const std::vector<double>& mu_prev,
                                   const std::vector<double>& x_post_prev);

// x_{t|t} = x_{t|t-1} + psi_t
std::vector<double> kalman_update(const std::vector<double>& x_prior,
                                  const std::vector<int>& psi);

// (v_k + alpha) / (sum v + K*alpha); the same smoothing applies to prior and
// posterior concentrations.
std::vector<double> expected_distribution(const std::vector<double>& x, double alpha);
inline std::vector<double> expected_posterior(const std::vector<double>& x_post, double alpha) {
  return expected_distribution(x_post, alpha);
}
inline std::vector<double> expected_prior(const std::vector<double>& x_prior, double alpha) {
  return expected_distribution(x_prior, alpha);
}

// Normalized collapsed-Gibbs weights for one token, with the token's current
// assignment already decremented from psi and xi.
std::vector<double> topic_weights(int item, const std::vector<double>& prior_plus_psi,
                                  const TopicState& state, int vocab_size,
                                  const ModelConfig& config);

int sample_topic(int item, const std::vector<double>& prior_plus_psi, const TopicState& state,
                 int vocab_size, const ModelConfig& config, Rng& rng);

PhiMatrix make_phi(const TopicState& state, int vocab_size, double beta);
TopicSeries make_theta(const DirichletParams& params, double alpha);

// Sum over tokens of log sum_k E(theta_{n,t,k|t}) * phi_{k,m}; the same
// mixture form as the held-out metric, evaluated on the training tokens.
double training_log_likelihood(const Corpus& corpus, const DirichletParams& params,
                               const TopicState& state, const ModelConfig& config);

// Called after every completed sweep (1-based sweep index).
using SweepObserver =
    std::function<void(int sweep, const TopicState& state, const DirichletParams& params,
                       const DynamicsMatrix& dynamics)>;

InferenceResult run_inference(const Corpus& corpus, const ModelConfig& config);
InferenceResult run_inference(const Corpus& corpus, const ModelConfig& config,
                              const SweepObserver& observer);

const char* dynamics_mode_name(DynamicsMode mode);
DynamicsMode parse_dynamics_mode(const std::string& name);
const char* gibbs_normalizer_name(GibbsNormalizer g);
GibbsNormalizer parse_gibbs_normalizer(const std::string& name);

}  // namespace ldtm
