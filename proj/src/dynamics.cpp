#include "ldtm/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace ldtm {

void KlContext::validate() const {
  const std::size_t K = mu.size();
  if (K == 0) throw DimensionError("KlContext: empty mu");
  if (x_post_prev.size() != K || psi.size() != K)
    throw DimensionError("KlContext: x_post_prev, psi and mu must have equal length");
  if (!(alpha > 0.0)) throw ConfigError("KlContext: alpha must be > 0");
}

namespace {

// Shared intermediate quantities. u/U are the posterior numerators and
// normalizer, v/V the prior ones. The posterior normalizer accumulates
// (m_k + psi_k) term by term so that psi == 0 reproduces the prior
// normalizer bit for bit; the psi == 0 identities in the contract rely on
// that.
struct Expectations {
  std::vector<double> u, v;
  double U = 0.0, V = 0.0;
};

Expectations expectations(const KlContext& ctx) {
  const std::size_t K = ctx.mu.size();
  const double k_alpha = static_cast<double>(K) * ctx.alpha;
  Expectations e;
  e.u.resize(K);
  e.v.resize(K);
  double sum_post = 0.0, sum_prior = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double m = ctx.mu[k] * ctx.x_post_prev[k];
    e.u[k] = m + ctx.psi[k] + ctx.alpha;
    e.v[k] = m + ctx.alpha;
    sum_post += m + ctx.psi[k];
    sum_prior += m;
  }
  e.U = sum_post + k_alpha;
  e.V = sum_prior + k_alpha;
  return e;
}

}  // namespace

double kl_objective(const KlContext& ctx) {
  ctx.validate();
  const Expectations e = expectations(ctx);
  double kl = 0.0;
  for (std::size_t k = 0; k < ctx.mu.size(); ++k) {
    const double post = e.u[k] / e.U;
    const double prior = e.v[k] / e.V;
    kl += post * (std::log(post) - std::log(prior));
  }
  return kl;
}

std::vector<double> kl_gradient(const KlContext& ctx) {
  ctx.validate();
  const std::size_t K = ctx.mu.size();
  const Expectations e = expectations(ctx);

  std::vector<double> log_ratio(K);
  double kl = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double post = e.u[k] / e.U;
    const double prior = e.v[k] / e.V;
    log_ratio[k] = std::log(post) - std::log(prior);
    kl += post * log_ratio[k];
  }

  // d/dmu_j of sum_k p_k (log p_k - log q_k), with p = u/U and q = v/V:
  // the sum_k p_k dlog(p_k) part telescopes to zero because the p_k sum to
  // one, leaving
  //   (x_j / U) * (log_ratio_j - KL) - x_j * (u_j V - v_j U) / (U v_j V).
  // The second term is the sum_k p_k dlog(q_k) contribution written so that
  // u_j == v_j and U == V cancel exactly.
  std::vector<double> grad(K);
  for (std::size_t j = 0; j < K; ++j) {
    const double x = ctx.x_post_prev[j];
    const double carry = (x / e.U) * (log_ratio[j] - kl);
    const double prior_term = x * (e.u[j] * e.V - e.v[j] * e.U) / (e.U * e.v[j] * e.V);
    grad[j] = carry - prior_term;
  }
  return grad;
}

std::vector<double> kl_gradient_shared_scale(const KlContext& ctx) {
  ctx.validate();
  const std::size_t K = ctx.mu.size();
  const Expectations e = expectations(ctx);
  const double k_alpha = static_cast<double>(K) * ctx.alpha;

  double sum_x = 0.0, sum_psi = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    sum_x += ctx.x_post_prev[k];
    sum_psi += ctx.psi[k];
  }

  std::vector<double> grad(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double x = ctx.x_post_prev[k];
    const double post = e.u[k] / e.U;
    const double prior = e.v[k] / e.V;
    const double d_post = (x * (sum_psi + k_alpha) - sum_x * (ctx.psi[k] + ctx.alpha)) /
                          (e.U * e.U);
    const double dlog_post = d_post / post;
    const double dlog_prior = x / e.v[k] - sum_x / e.V;
    grad[k] = d_post * (std::log(post) - std::log(prior)) + post * (dlog_post - dlog_prior);
  }
  return grad;
}

std::vector<double> update_dynamics(const KlContext& ctx, const DescentControls& controls) {
  ctx.validate();
  if (!(controls.learn_rate > 0.0)) throw ConfigError("update_dynamics: learn_rate must be > 0");

  const std::size_t K = ctx.mu.size();
  KlContext work = ctx;
  for (double& m : work.mu) m = std::clamp(m, 0.0, 1.0);

  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-20;

  double f = kl_objective(work);
  for (int step = 0; step < controls.max_steps; ++step) {
    const std::vector<double> grad = kl_gradient(work);
    double grad_inf = 0.0;
    for (double g : grad) grad_inf = std::max(grad_inf, std::abs(g));
    if (grad_inf == 0.0) break;

    std::vector<double> candidate(K);
    double f_candidate = 0.0;
    double move_inf = 0.0;
    bool accepted = false;
    for (double s = controls.learn_rate; s >= kMinStep; s *= 0.5) {
      double descent = 0.0;  // <g, candidate - mu>, nonpositive after the clamp
      move_inf = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        candidate[k] = std::clamp(work.mu[k] - s * grad[k], 0.0, 1.0);
        const double delta = candidate[k] - work.mu[k];
        descent += grad[k] * delta;
        move_inf = std::max(move_inf, std::abs(delta));
      }
      if (move_inf == 0.0) break;  // clamp blocks every coordinate
      KlContext trial = work;
      trial.mu = candidate;
      f_candidate = kl_objective(trial);
      if (f_candidate <= f + kArmijo * descent) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    work.mu = candidate;
    f = f_candidate;
    if (move_inf < controls.tolerance) break;
  }
  return work.mu;
}

double total_objective(const std::vector<std::vector<double>>& x_post,
                       const std::vector<std::vector<double>>& psi,
                       const std::vector<std::vector<double>>& mu, double alpha) {
  const std::size_t T = x_post.size();
  if (T < 2) return 0.0;
  if (psi.size() != T || mu.size() != T - 1)
    throw DimensionError("total_objective: expected T psi entries and T-1 mu entries");
  double total = 0.0;
  for (std::size_t t = 2; t <= T; ++t) {
    KlContext ctx;
    ctx.x_post_prev = x_post[t - 2];
    ctx.psi = psi[t - 1];
    ctx.alpha = alpha;
    ctx.mu = mu[t - 2];
    total += kl_objective(ctx);
  }
  return total;
}

}  // namespace ldtm
