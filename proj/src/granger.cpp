#include "ldtm/granger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ldtm {
namespace {

constexpr int kMaxCycles = 10000;
constexpr double kCoordTol = 1e-10;
constexpr double kTieTol = 1e-12;

// Residual of the restricted model at window index W + r, component k.
double base_residual(const SeriesWindow& w, const RegressionFit& fit, int r, int k) {
  double pred = fit.intercept[k];
  for (int lag = 1; lag <= w.width; ++lag) {
    pred += fit.own_lags[lag - 1] * w.j_series[w.width + r - lag][k];
  }
  return w.j_series[w.width + r][k] - pred;
}

}  // namespace

void SeriesWindow::validate() const {
  if (width < 1 || lookahead < 1) {
    throw ConfigError("window width and lookahead must be at least 1");
  }
  const auto need = static_cast<size_t>(length());
  if (i_series.size() != need || j_series.size() != need) {
    throw DimensionError("series window has wrong length");
  }
  const size_t k = i_series[0].size();
  if (k == 0) throw DimensionError("series window has zero topics");
  for (const auto& v : i_series) {
    if (v.size() != k) throw DimensionError("ragged i_series in window");
  }
  for (const auto& v : j_series) {
    if (v.size() != k) throw DimensionError("ragged j_series in window");
  }
}

RegressionFit fit_restricted(const SeriesWindow& window) {
  window.validate();
  const int w_lags = window.width;
  const int targets = window.lookahead + 1;
  const int topics = window.topics();

  // Gram pieces over the target rows: predictors p^w_r = j[tau + r - w].
  std::vector<std::vector<double>> lag_sum(w_lags, std::vector<double>(topics, 0.0));
  std::vector<double> target_sum(topics, 0.0);
  std::vector<std::vector<double>> gram(w_lags, std::vector<double>(w_lags, 0.0));
  std::vector<double> lag_target(w_lags, 0.0);
  for (int r = 0; r < targets; ++r) {
    const auto& y = window.j_series[w_lags + r];
    for (int k = 0; k < topics; ++k) target_sum[k] += y[k];
    for (int a = 1; a <= w_lags; ++a) {
      const auto& pa = window.j_series[w_lags + r - a];
      double dot_y = 0.0;
      for (int k = 0; k < topics; ++k) {
        lag_sum[a - 1][k] += pa[k];
        dot_y += pa[k] * y[k];
      }
      lag_target[a - 1] += dot_y;
      for (int b = a; b <= w_lags; ++b) {
        const auto& pb = window.j_series[w_lags + r - b];
        double dot = 0.0;
        for (int k = 0; k < topics; ++k) dot += pa[k] * pb[k];
        gram[a - 1][b - 1] += dot;
        if (a != b) gram[b - 1][a - 1] += dot;
      }
    }
  }

  RegressionFit fit;
  fit.intercept.assign(topics, 0.0);
  fit.own_lags.assign(w_lags, 0.0);

  for (int cycle = 0; cycle < kMaxCycles; ++cycle) {
    double max_change = 0.0;
    for (int k = 0; k < topics; ++k) {
      double num = target_sum[k];
      for (int a = 0; a < w_lags; ++a) num -= fit.own_lags[a] * lag_sum[a][k];
      const double next = num / targets;
      max_change = std::max(max_change, std::fabs(next - fit.intercept[k]));
      fit.intercept[k] = next;
    }
    for (int a = 0; a < w_lags; ++a) {
      if (gram[a][a] <= 0.0) continue;  // identically-zero predictor; leave at current value
      double num = lag_target[a];
      for (int k = 0; k < topics; ++k) num -= lag_sum[a][k] * fit.intercept[k];
      for (int b = 0; b < w_lags; ++b) {
        if (b != a) num -= gram[a][b] * fit.own_lags[b];
      }
      const double next = num / gram[a][a];
      max_change = std::max(max_change, std::fabs(next - fit.own_lags[a]));
      fit.own_lags[a] = next;
    }
    if (max_change < kCoordTol) break;
  }

  fit.rss = 0.0;
  for (int r = 0; r < targets; ++r) {
    for (int k = 0; k < topics; ++k) {
      const double res = base_residual(window, fit, r, k);
      fit.rss += res * res;
    }
  }
  return fit;
}

RegressionFit fit_unrestricted(const SeriesWindow& window, const RegressionFit& restricted) {
  window.validate();
  const int w_lags = window.width;
  const int targets = window.lookahead + 1;
  const int topics = window.topics();
  if (restricted.intercept.size() != static_cast<size_t>(topics) ||
      restricted.own_lags.size() != static_cast<size_t>(w_lags)) {
    throw DimensionError("restricted fit does not match window");
  }

  // Cross predictors q^w_r = i[tau + r - w] regressed against the frozen
  // restricted residuals; starting from lambda = 0 keeps rss <= restricted.rss.
  std::vector<std::vector<double>> resid(targets, std::vector<double>(topics, 0.0));
  for (int r = 0; r < targets; ++r) {
    for (int k = 0; k < topics; ++k) resid[r][k] = base_residual(window, restricted, r, k);
  }
  std::vector<std::vector<double>> gram(w_lags, std::vector<double>(w_lags, 0.0));
  std::vector<double> cross_target(w_lags, 0.0);
  for (int r = 0; r < targets; ++r) {
    for (int a = 1; a <= w_lags; ++a) {
      const auto& qa = window.i_series[w_lags + r - a];
      double dot_res = 0.0;
      for (int k = 0; k < topics; ++k) dot_res += qa[k] * resid[r][k];
      cross_target[a - 1] += dot_res;
      for (int b = a; b <= w_lags; ++b) {
        const auto& qb = window.i_series[w_lags + r - b];
        double dot = 0.0;
        for (int k = 0; k < topics; ++k) dot += qa[k] * qb[k];
        gram[a - 1][b - 1] += dot;
        if (a != b) gram[b - 1][a - 1] += dot;
      }
    }
  }

  RegressionFit fit = restricted;
  fit.cross_lags.assign(w_lags, 0.0);
  for (int cycle = 0; cycle < kMaxCycles; ++cycle) {
    double max_change = 0.0;
    for (int a = 0; a < w_lags; ++a) {
      if (gram[a][a] <= 0.0) continue;
      double num = cross_target[a];
      for (int b = 0; b < w_lags; ++b) {
        if (b != a) num -= gram[a][b] * fit.cross_lags[b];
      }
      const double next = num / gram[a][a];
      max_change = std::max(max_change, std::fabs(next - fit.cross_lags[a]));
      fit.cross_lags[a] = next;
    }
    if (max_change < kCoordTol) break;
  }

  fit.rss = 0.0;
  for (int r = 0; r < targets; ++r) {
    for (int k = 0; k < topics; ++k) {
      double cross = 0.0;
      for (int lag = 1; lag <= w_lags; ++lag) {
        cross += fit.cross_lags[lag - 1] * window.i_series[w_lags + r - lag][k];
      }
      const double res = resid[r][k] - cross;
      fit.rss += res * res;
    }
  }
  if (fit.rss > restricted.rss) {
    // Rounding pushed the fit past the nested optimum; fall back to lambda = 0,
    // which reproduces the restricted residuals exactly.
    std::fill(fit.cross_lags.begin(), fit.cross_lags.end(), 0.0);
    fit.rss = restricted.rss;
  }
  return fit;
}

FStat f_stat(double r1, double r2, int width, int lookahead, FVariant variant, int topics) {
  if (width < 1 || lookahead < 1) throw ConfigError("f_stat needs width, lookahead >= 1");
  if (r1 < 0.0 || r2 < 0.0 || !std::isfinite(r1) || !std::isfinite(r2)) {
    throw NumericError("f_stat requires finite non-negative rss values");
  }
  FStat out;
  if (r2 == 0.0) {
    out.value = std::numeric_limits<double>::infinity();
    out.perfect_fit = true;
    return out;
  }
  const double diff = std::max(0.0, r1 - r2);
  if (variant == FVariant::Windowed) {
    out.value = (diff / r2) * ((2.0 * lookahead - 1.0) / width);
  } else {
    const double n = static_cast<double>(lookahead + 1) * topics;
    const double denom_dof = n - 2.0 * width - 1.0;
    if (denom_dof <= 0.0) {
      throw NumericError("classical f_stat undefined: non-positive denominator dof");
    }
    out.value = (diff / width) / (r2 / denom_dof);
  }
  return out;
}

SeriesWindow make_window(const TopicSeries& series, int user_i, int user_j, int tau, int width,
                         int lookahead, bool* carried_forward) {
  if (width < 1 || lookahead < 1) {
    throw ConfigError("window width and lookahead must be at least 1");
  }
  const int users = static_cast<int>(series.theta.size());
  if (user_i < 0 || user_i >= users || user_j < 0 || user_j >= users) {
    throw DimensionError("make_window: user index out of range");
  }
  if (tau - width < 1) {
    throw InsufficientHistory("interaction at t=" + std::to_string(tau) +
                              " needs history back to t=" + std::to_string(tau - width));
  }
  const auto& ti = series.theta[user_i];
  const auto& tj = series.theta[user_j];
  if (ti.empty() || tj.empty()) throw DimensionError("make_window: user has no time steps");

  bool extended = false;
  auto slice = [&](const std::vector<std::vector<double>>& user_theta) {
    std::vector<std::vector<double>> out;
    out.reserve(width + lookahead + 1);
    const int last = static_cast<int>(user_theta.size());  // user's final time step
    for (int t = tau - width; t <= tau + lookahead; ++t) {
      if (t <= last) {
        out.push_back(user_theta[t - 1]);
      } else {
        out.push_back(user_theta[last - 1]);  // interests persist past the last adoption
        extended = true;
      }
    }
    return out;
  };

  SeriesWindow window;
  window.i_series = slice(ti);
  window.j_series = slice(tj);
  window.tau = tau;
  window.width = width;
  window.lookahead = lookahead;
  window.validate();
  if (carried_forward != nullptr) *carried_forward = extended;
  return window;
}

TscResult tsc_pair(const SeriesWindow& window, FVariant variant) {
  const int topics = window.topics();
  TscResult out;

  const RegressionFit fwd_r = fit_restricted(window);
  const RegressionFit fwd_u = fit_unrestricted(window, fwd_r);
  const FStat fwd = f_stat(fwd_r.rss, fwd_u.rss, window.width, window.lookahead, variant, topics);
  out.f_forward = fwd.value;
  out.forward_perfect_fit = fwd.perfect_fit;

  SeriesWindow reversed = window;
  std::swap(reversed.i_series, reversed.j_series);
  const RegressionFit bwd_r = fit_restricted(reversed);
  const RegressionFit bwd_u = fit_unrestricted(reversed, bwd_r);
  const FStat bwd = f_stat(bwd_r.rss, bwd_u.rss, window.width, window.lookahead, variant, topics);
  out.f_backward = bwd.value;
  out.backward_perfect_fit = bwd.perfect_fit;

  if (std::isinf(out.f_forward) && std::isinf(out.f_backward)) {
    out.direction = Direction::Tie;
  } else if (std::isinf(out.f_forward)) {
    out.direction = Direction::ItoJ;
  } else if (std::isinf(out.f_backward)) {
    out.direction = Direction::JtoI;
  } else {
    const double diff = out.f_forward - out.f_backward;
    if (std::fabs(diff) < kTieTol) {
      out.direction = Direction::Tie;
    } else {
      out.direction = diff > 0.0 ? Direction::ItoJ : Direction::JtoI;
    }
  }
  return out;
}

TscResult tsc_pair(const TopicSeries& series, int user_i, int user_j, int tau, int width,
                   int lookahead, FVariant variant) {
  bool extended = false;
  const SeriesWindow window = make_window(series, user_i, user_j, tau, width, lookahead, &extended);
  TscResult out = tsc_pair(window, variant);
  out.carried_forward = extended;
  return out;
}

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::ItoJ: return "i->j";
    case Direction::JtoI: return "j->i";
    case Direction::Tie: return "tie";
  }
  return "tie";
}

FVariant parse_f_variant(const std::string& name) {
  if (name == "windowed" || name == "paper") return FVariant::Windowed;
  if (name == "classical") return FVariant::Classical;
  throw ConfigError("unknown f-stat variant: " + name);
}

}  // namespace ldtm
