#include "ldtm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ldtm/rng.hpp"

namespace ldtm {
namespace {

void check_probability_rows(const std::vector<std::vector<double>>& rows, const char* what) {
  for (const auto& row : rows) {
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw NumericError(std::string(what) + ": bad entry");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw NumericError(std::string(what) + ": row does not sum to 1");
    }
  }
}

// Divide by the sum, then nudge the largest entry until the floating-point
// sum is exactly one. Exact-copy constructions (coupling = 1, noise = 0)
// divide by this sum, and x / 1.0 == x keeps the copy bitwise.
void normalize_exact(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw NumericError("normalize: negative or NaN entry");
    s += x;
  }
  if (!(s > 0.0)) throw NumericError("normalize: zero vector");
  if (s != 1.0) {
    for (double& x : v) x /= s;
  }
  for (int pass = 0; pass < 4; ++pass) {
    double s2 = 0.0;
    for (double x : v) s2 += x;
    if (s2 == 1.0) return;
    auto it = std::max_element(v.begin(), v.end());
    *it += 1.0 - s2;
  }
}

}  // namespace

void GroundTruth::validate() const {
  const int n = users();
  const int k = topics();
  const int m = items();
  if (n == 0 || k == 0 || m == 0) throw ConfigError("ground truth has empty dimensions");
  if (static_cast<int>(phi_true.size()) != k) throw DimensionError("phi_true has wrong topic count");
  check_probability_rows(phi_true, "phi_true");
  check_probability_rows(theta_seed, "theta_seed");
  for (const auto& row : theta_seed) {
    if (static_cast<int>(row.size()) != k) throw DimensionError("ragged theta_seed");
  }
  if (static_cast<int>(mu_true.size()) != n) throw DimensionError("mu_true has wrong user count");
  for (const auto& user_mu : mu_true) {
    for (const auto& step : user_mu) {
      if (static_cast<int>(step.size()) != k) throw DimensionError("ragged mu_true");
      for (double v : step) {
        if (!(v >= 0.0) || !(v <= 1.0)) throw NumericError("mu_true outside [0,1]");
      }
    }
  }
  if (tokens_per_step < 1) throw ConfigError("tokens_per_step must be >= 1");
  if (!(seed_concentration > 0.0)) throw ConfigError("seed_concentration must be positive");
  if (!(draw_smoothing > 0.0)) throw ConfigError("draw_smoothing must be positive");
}

std::string synth_user_name(int index, int total) {
  int width = 1;
  for (int v = total - 1; v >= 10; v /= 10) ++width;
  width = std::max(width, 3);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "u%0*d", width, index);
  return buf;
}

std::string synth_item_name(int index, int total) {
  int width = 1;
  for (int v = total - 1; v >= 10; v /= 10) ++width;
  width = std::max(width, 3);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "w%0*d", width, index);
  return buf;
}

SynthCorpus generate_corpus(const GroundTruth& truth, int T, std::uint64_t seed) {
  truth.validate();
  if (T < 1) throw ConfigError("generate_corpus: T must be >= 1");
  const int users = truth.users();
  const int topics = truth.topics();
  const int items = truth.items();
  for (int n = 0; n < users; ++n) {
    if (static_cast<int>(truth.mu_true[n].size()) < T - 1) {
      throw DimensionError("mu_true covers fewer than T-1 transitions");
    }
  }

  SynthCorpus out;
  out.corpus.user_ids.reserve(users);
  for (int n = 0; n < users; ++n) out.corpus.user_ids.push_back(synth_user_name(n, users));
  for (int m = 0; m < items; ++m) out.corpus.vocabulary.add(synth_item_name(m, items));
  out.corpus.tokens.assign(users, {});
  out.theta_drawn.assign(users, {});

  Rng rng(seed);
  std::vector<double> x_filter(topics, 0.0);
  std::vector<double> x_prior(topics, 0.0);
  std::vector<double> alpha(topics, 0.0);
  for (int n = 0; n < users; ++n) {
    out.corpus.tokens[n].assign(T, {});
    out.theta_drawn[n].reserve(T);
    for (int t = 1; t <= T; ++t) {
      if (t == 1) {
        for (int k = 0; k < topics; ++k) {
          x_prior[k] = truth.seed_concentration * truth.theta_seed[n][k];
        }
      } else {
        for (int k = 0; k < topics; ++k) {
          x_prior[k] = truth.mu_true[n][t - 2][k] * x_filter[k];
        }
      }
      for (int k = 0; k < topics; ++k) alpha[k] = x_prior[k] + truth.draw_smoothing;
      std::vector<double> theta = rng.dirichlet(alpha);
      std::vector<int> psi(topics, 0);
      auto& seq = out.corpus.tokens[n][t - 1];
      seq.reserve(truth.tokens_per_step);
      for (int d = 0; d < truth.tokens_per_step; ++d) {
        const int z = static_cast<int>(rng.categorical(theta));
        const int w = static_cast<int>(rng.categorical(truth.phi_true[z]));
        psi[z] += 1;
        seq.push_back(w);
      }
      // Mirror the filter update: absorbed counts raise the concentration.
      for (int k = 0; k < topics; ++k) x_filter[k] = x_prior[k] + psi[k];
      out.theta_drawn[n].push_back(std::move(theta));
    }
  }
  out.corpus.rebuild_user_index();
  return out;
}

GroundTruth make_heterogeneous_truth(int users, int T, int topics, int items, int tokens_per_step,
                                     std::uint64_t seed, const std::vector<double>& mu_choices) {
  if (users < 1 || T < 1 || topics < 1 || items < topics) {
    throw ConfigError("make_heterogeneous_truth: bad dimensions");
  }
  if (mu_choices.empty()) throw ConfigError("make_heterogeneous_truth: no mu choices");
  GroundTruth truth;
  truth.tokens_per_step = tokens_per_step;

  // Topic k owns an equal slice of the item range; 5% of the mass is spread
  // over the rest so no item has probability zero under any topic.
  const int base = items / topics;
  const int extra = items % topics;
  truth.phi_true.assign(topics, std::vector<double>(items, 0.0));
  int start = 0;
  for (int k = 0; k < topics; ++k) {
    const int width = base + (k < extra ? 1 : 0);
    const double inside = 0.95 / width;
    const double outside = items == width ? 0.0 : 0.05 / (items - width);
    for (int m = 0; m < items; ++m) {
      const bool own = m >= start && m < start + width;
      truth.phi_true[k][m] = own ? inside : outside;
    }
    if (items == width) {
      for (int m = 0; m < items; ++m) truth.phi_true[k][m] = 1.0 / items;
    }
    start += width;
  }
  for (auto& row : truth.phi_true) normalize_exact(row);

  Rng rng(seed);
  truth.theta_seed.reserve(users);
  truth.mu_true.assign(users, {});
  const std::vector<double> ones(topics, 1.0);
  for (int n = 0; n < users; ++n) {
    truth.theta_seed.push_back(rng.dirichlet(ones));
    const double mu = mu_choices[n % mu_choices.size()];
    truth.mu_true[n].assign(std::max(0, T - 1), std::vector<double>(topics, mu));
  }
  return truth;
}

CausalPair generate_causal_pair(int lag, double noise, int T, int topics, std::uint64_t seed,
                                double coupling, double ar) {
  if (lag < 1) throw ConfigError("generate_causal_pair: lag must be >= 1");
  if (T <= lag + 8) throw ConfigError("generate_causal_pair: need T > lag + 8");
  if (topics < 2) throw ConfigError("generate_causal_pair: need at least 2 topics");
  if (!(noise >= 0.0)) throw ConfigError("generate_causal_pair: noise must be >= 0");
  if (!(coupling >= 0.0 && coupling <= 1.0)) {
    throw ConfigError("generate_causal_pair: coupling must lie in [0,1]");
  }
  if (!(ar > 0.0 && ar <= 1.0)) throw ConfigError("generate_causal_pair: ar must lie in (0,1]");

  Rng rng(seed);
  const std::vector<double> ones(topics, 1.0);
  CausalPair pair;
  pair.i_series.reserve(T);
  pair.j_series.reserve(T);

  // Driver chain kept unnormalized; emitted rows are normalized views.
  std::vector<double> raw = rng.dirichlet(ones);
  for (int t = 1; t <= T; ++t) {
    if (t > 1) {
      for (int k = 0; k < topics; ++k) {
        raw[k] = ar * raw[k] + noise * rng.gamma(1.0);
      }
    }
    std::vector<double> row = raw;
    normalize_exact(row);
    pair.i_series.push_back(std::move(row));
  }

  std::vector<double> j_prev = rng.dirichlet(ones);
  normalize_exact(j_prev);
  pair.j_series.push_back(j_prev);
  for (int t = 2; t <= T; ++t) {
    std::vector<double> row(topics);
    if (t > lag) {
      const auto& src = pair.i_series[t - lag - 1];
      for (int k = 0; k < topics; ++k) {
        row[k] = coupling * src[k] + (1.0 - coupling) * j_prev[k] + noise * rng.gamma(1.0);
      }
    } else {
      // No lagged driver exists yet; persist with noise only.
      for (int k = 0; k < topics; ++k) row[k] = j_prev[k] + noise * rng.gamma(1.0);
    }
    normalize_exact(row);
    j_prev = row;
    pair.j_series.push_back(std::move(row));
  }
  return pair;
}

CausalPair generate_causal_pair(int lag, double noise, int T, int topics, std::uint64_t seed) {
  return generate_causal_pair(lag, noise, T, topics, seed, 0.8, 0.5);
}

std::vector<AdoptionEvent> corpus_to_events(const Corpus& corpus) {
  std::vector<AdoptionEvent> events;
  for (int n = 0; n < corpus.user_count(); ++n) {
    for (int t = 1; t <= corpus.max_time(n); ++t) {
      for (int item : corpus.tokens[n][t - 1]) {
        events.push_back({corpus.user_ids[n], t, corpus.vocabulary.token_at(item), 1});
      }
    }
  }
  return events;
}

}  // namespace ldtm
