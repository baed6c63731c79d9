#pragma once

#include <vector>

#include "ldtm/errors.hpp"

namespace ldtm {

// One user transition t-1 -> t as seen by the decay estimator: the posterior
// concentration at t-1, the topic counts drawn at t, and the current decay
// entries being optimized.
struct KlContext {
  std::vector<double> x_post_prev;  // x_{t-1|t-1}
  std::vector<double> psi;          // topic counts at t
  double alpha = 0.5;
  std::vector<double> mu;           // current decay entries, in [0,1]

  int topics() const { return static_cast<int>(mu.size()); }
  void validate() const;
};

// KL divergence between the expected posterior and expected prior topic
// distributions induced by the context. Zero exactly when psi is zero.
double kl_objective(const KlContext& ctx);

// Exact gradient of kl_objective with respect to each decay entry. Every
// expected-value component depends on every mu entry through the shared
// normalizer; the assembly accounts for those cross terms, which is what
// makes it agree with central finite differences.
std::vector<double> kl_gradient(const KlContext& ctx);

// Simplified variant that differentiates the normalizer as if all decay
// entries moved through one shared scalar. It drops the per-coordinate cross
// terms, so it deviates from finite differences whenever K >= 2 and the
// history is non-uniform. Retained for comparison only; the descent uses
// kl_gradient.
std::vector<double> kl_gradient_shared_scale(const KlContext& ctx);

struct DescentControls {
  double learn_rate = 0.1;  // initial step, halved until sufficient decrease
  int max_steps = 100;
  double tolerance = 1e-6;  // stop when the max-abs mu change falls below this
};

// Projected gradient descent on kl_objective over [0,1]^K. The returned
// entries satisfy the clamp and the objective never increases across steps.
std::vector<double> update_dynamics(const KlContext& ctx, const DescentControls& controls);

// Sum of per-transition KL objectives over t = 2..T for one user history.
// x_post and psi carry T entries (index t-1 for time t); mu carries T-1
// transition vectors. Returns 0 when T < 2.
double total_objective(const std::vector<std::vector<double>>& x_post,
                       const std::vector<std::vector<double>>& psi,
                       const std::vector<std::vector<double>>& mu, double alpha);

}  // namespace ldtm
