#include "ldtm/model.hpp"

#include <cmath>

#include "ldtm/dynamics.hpp"

namespace ldtm {

void ModelConfig::validate() const {
  if (topics < 2) throw ConfigError("topics must be >= 2");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(learn_rate > 0.0)) throw ConfigError("learn_rate must be > 0");
  if (max_gd_steps < 1) throw ConfigError("max_gd_steps must be >= 1");
  if (!(gd_tolerance >= 0.0)) throw ConfigError("gd_tolerance must be >= 0");
}

TopicState init_assignments(const Corpus& corpus, const ModelConfig& config) {
  Rng rng(derive_seed(config.seed, 0));
  return init_assignments(corpus, config, rng);
}

TopicState init_assignments(const Corpus& corpus, const ModelConfig& config, Rng& rng) {
  const int K = config.topics;
  const int M = corpus.vocabulary.size();
  TopicState state;
  state.z.resize(corpus.user_count());
  state.psi.resize(corpus.user_count());
  state.xi.assign(K, std::vector<long long>(M, 0));
  state.xi_row_sum.assign(K, 0);

  for (int n = 0; n < corpus.user_count(); ++n) {
    const int T_n = corpus.max_time(n);
    state.z[n].resize(T_n);
    state.psi[n].assign(T_n, std::vector<int>(K, 0));
    for (int t = 0; t < T_n; ++t) {
      const auto& slice = corpus.tokens[n][t];
      state.z[n][t].resize(slice.size());
      for (std::size_t pos = 0; pos < slice.size(); ++pos) {
        const int k = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(K)));
        state.z[n][t][pos] = k;
        ++state.psi[n][t][k];
        ++state.xi[k][slice[pos]];
        ++state.xi_row_sum[k];
      }
    }
  }
  return state;
}

std::vector<double> kalman_predict(const std::vector<double>& mu_prev,
                                   const std::vector<double>& x_post_prev) {
  if (mu_prev.size() != x_post_prev.size())
    throw DimensionError("kalman_predict: mu and x_post length mismatch");
  std::vector<double> out(mu_prev.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mu_prev[k] * x_post_prev[k];
  return out;
}

std::vector<double> kalman_update(const std::vector<double>& x_prior,
                                  const std::vector<int>& psi) {
  if (x_prior.size() != psi.size())
    throw DimensionError("kalman_update: x_prior and psi length mismatch");
  std::vector<double> out(x_prior.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = x_prior[k] + static_cast<double>(psi[k]);
  return out;
}

std::vector<double> expected_distribution(const std::vector<double>& x, double alpha) {
  const double K = static_cast<double>(x.size());
  double total = 0.0;
  for (double v : x) total += v;
  const double denom = total + K * alpha;
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] + alpha) / denom;
  return out;
}

std::vector<double> topic_weights(int item, const std::vector<double>& prior_plus_psi,
                                  const TopicState& state, int vocab_size,
                                  const ModelConfig& config) {
  const int K = static_cast<int>(prior_plus_psi.size());
  const double beta = config.beta;
  const double smoothing_dim =
      config.gibbs_normalizer == GibbsNormalizer::VocabBeta ? static_cast<double>(vocab_size)
                                                            : static_cast<double>(K);
  std::vector<double> weights(K);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    const double topic_factor = prior_plus_psi[k] + config.alpha;
    const double item_factor = (static_cast<double>(state.xi[k][item]) + beta) /
                               (static_cast<double>(state.xi_row_sum[k]) + smoothing_dim * beta);
    weights[k] = topic_factor * item_factor;
    total += weights[k];
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericError("topic_weights: degenerate weight vector");
  for (double& w : weights) w /= total;
  return weights;
}

int sample_topic(int item, const std::vector<double>& prior_plus_psi, const TopicState& state,
                 int vocab_size, const ModelConfig& config, Rng& rng) {
  const auto weights = topic_weights(item, prior_plus_psi, state, vocab_size, config);
  return static_cast<int>(rng.categorical(weights));
}

PhiMatrix make_phi(const TopicState& state, int vocab_size, double beta) {
  const int K = static_cast<int>(state.xi.size());
  PhiMatrix phi;
  phi.phi.assign(K, std::vector<double>(vocab_size));
  for (int k = 0; k < K; ++k) {
    const double denom =
        static_cast<double>(state.xi_row_sum[k]) + static_cast<double>(vocab_size) * beta;
    for (int m = 0; m < vocab_size; ++m)
      phi.phi[k][m] = (static_cast<double>(state.xi[k][m]) + beta) / denom;
  }
  return phi;
}

TopicSeries make_theta(const DirichletParams& params, double alpha) {
  TopicSeries series;
  series.theta.resize(params.x_post.size());
  for (std::size_t n = 0; n < params.x_post.size(); ++n) {
    series.theta[n].reserve(params.x_post[n].size());
    for (const auto& x : params.x_post[n])
      series.theta[n].push_back(expected_distribution(x, alpha));
  }
  return series;
}

double training_log_likelihood(const Corpus& corpus, const DirichletParams& params,
                               const TopicState& state, const ModelConfig& config) {
  const int K = config.topics;
  const PhiMatrix phi = make_phi(state, corpus.vocabulary.size(), config.beta);
  double loglik = 0.0;
  for (int n = 0; n < corpus.user_count(); ++n) {
    for (int t = 0; t < corpus.max_time(n); ++t) {
      const auto& slice = corpus.tokens[n][t];
      if (slice.empty()) continue;
      const auto theta = expected_distribution(params.x_post[n][t], config.alpha);
      for (int item : slice) {
        double p = 0.0;
        for (int k = 0; k < K; ++k) p += theta[k] * phi.phi[k][item];
        loglik += std::log(p);
      }
    }
  }
  return loglik;
}

namespace {

DynamicsMatrix init_dynamics(const Corpus& corpus, const ModelConfig& config) {
  double mu0 = 1.0;
  switch (config.dynamics_mode) {
    case DynamicsMode::Identity: mu0 = 1.0; break;
    case DynamicsMode::HalfDecay: mu0 = 0.5; break;
    case DynamicsMode::FullDecay: mu0 = 0.0; break;
    case DynamicsMode::Learned: mu0 = 1.0; break;  // behaves like LDA until counts settle
  }
  DynamicsMatrix dyn;
  dyn.mu.resize(corpus.user_count());
  for (int n = 0; n < corpus.user_count(); ++n) {
    const int transitions = std::max(0, corpus.max_time(n) - 1);
    dyn.mu[n].assign(transitions, std::vector<double>(config.topics, mu0));
  }
  return dyn;
}

}  // namespace

InferenceResult run_inference(const Corpus& corpus, const ModelConfig& config) {
  return run_inference(corpus, config, SweepObserver{});
}

InferenceResult run_inference(const Corpus& corpus, const ModelConfig& config,
                              const SweepObserver& observer) {
  config.validate();
  if (corpus.total_tokens() == 0) throw EmptyCorpus("run_inference: corpus has no tokens");

  const int K = config.topics;
  const int M = corpus.vocabulary.size();
  const int N = corpus.user_count();

  Rng rng(derive_seed(config.seed, 0));
  TopicState state = init_assignments(corpus, config, rng);
  DynamicsMatrix dynamics = init_dynamics(corpus, config);

  DirichletParams params;
  params.x_prior.resize(N);
  params.x_post.resize(N);
  for (int n = 0; n < N; ++n) {
    params.x_prior[n].assign(corpus.max_time(n), std::vector<double>(K, 0.0));
    params.x_post[n].assign(corpus.max_time(n), std::vector<double>(K, 0.0));
  }

  std::vector<double> trace;
  trace.reserve(config.iterations);
  std::vector<double> prior_plus_psi(K);

  for (int sweep = 1; sweep <= config.iterations; ++sweep) {
    for (int n = 0; n < N; ++n) {
      const int T_n = corpus.max_time(n);
      for (int t = 1; t <= T_n; ++t) {
        auto& x_prior = params.x_prior[n][t - 1];
        if (t == 1) {
          std::fill(x_prior.begin(), x_prior.end(), 0.0);  // no history before t=1
        } else {
          x_prior = kalman_predict(dynamics.mu[n][t - 2], params.x_post[n][t - 2]);
        }

        const auto& slice = corpus.tokens[n][t - 1];
        auto& psi = state.psi[n][t - 1];
        for (std::size_t pos = 0; pos < slice.size(); ++pos) {
          const int item = slice[pos];
          const int k_old = state.z[n][t - 1][pos];
          --psi[k_old];
          --state.xi[k_old][item];
          --state.xi_row_sum[k_old];

          for (int k = 0; k < K; ++k)
            prior_plus_psi[k] = x_prior[k] + static_cast<double>(psi[k]);
          const int k_new = sample_topic(item, prior_plus_psi, state, M, config, rng);

          ++psi[k_new];
          ++state.xi[k_new][item];
          ++state.xi_row_sum[k_new];
          state.z[n][t - 1][pos] = k_new;
        }

        params.x_post[n][t - 1] = kalman_update(x_prior, psi);
      }

      if (config.dynamics_mode == DynamicsMode::Learned) {
        const DescentControls controls{config.learn_rate, config.max_gd_steps,
                                       config.gd_tolerance};
        for (int t = 2; t <= T_n; ++t) {
          KlContext ctx;
          ctx.x_post_prev = params.x_post[n][t - 2];
          ctx.psi.assign(state.psi[n][t - 1].begin(), state.psi[n][t - 1].end());
          ctx.alpha = config.alpha;
          ctx.mu = dynamics.mu[n][t - 2];
          dynamics.mu[n][t - 2] = update_dynamics(ctx, controls);
        }
      }
    }

    trace.push_back(training_log_likelihood(corpus, params, state, config));
    if (observer) observer(sweep, state, params, dynamics);
  }

  InferenceResult result;
  result.theta = make_theta(params, config.alpha);
  result.phi = make_phi(state, M, config.beta);
  result.dynamics = std::move(dynamics);
  result.loglik_trace = std::move(trace);
  result.state = std::move(state);
  result.params = std::move(params);
  return result;
}

const char* dynamics_mode_name(DynamicsMode mode) {
  switch (mode) {
    case DynamicsMode::Identity: return "identity";
    case DynamicsMode::HalfDecay: return "half";
    case DynamicsMode::FullDecay: return "full";
    case DynamicsMode::Learned: return "learned";
  }
  return "?";
}

DynamicsMode parse_dynamics_mode(const std::string& name) {
  if (name == "identity" || name == "lda") return DynamicsMode::Identity;
  if (name == "half" || name == "half-decay") return DynamicsMode::HalfDecay;
  if (name == "full" || name == "full-decay") return DynamicsMode::FullDecay;
  if (name == "learned") return DynamicsMode::Learned;
  throw ConfigError("unknown dynamics mode '" + name +
                    "' (expected identity, half, full or learned)");
}

const char* gibbs_normalizer_name(GibbsNormalizer g) {
  return g == GibbsNormalizer::VocabBeta ? "vocab" : "topic";
}

GibbsNormalizer parse_gibbs_normalizer(const std::string& name) {
  if (name == "vocab") return GibbsNormalizer::VocabBeta;
  if (name == "topic") return GibbsNormalizer::TopicBeta;
  throw ConfigError("unknown gibbs normalizer '" + name + "' (expected vocab or topic)");
}

}  // namespace ldtm
