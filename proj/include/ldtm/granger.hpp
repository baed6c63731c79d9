#pragma once

#include <string>
#include <vector>

#include "ldtm/errors.hpp"
#include "ldtm/model.hpp"

namespace ldtm {

// Aligned slice of two users' topic series over [tau - W, tau + L]; index 0
// holds time tau - W. Regression targets are the times tau .. tau + L.
struct SeriesWindow {
  std::vector<std::vector<double>> i_series;
  std::vector<std::vector<double>> j_series;
  int tau = 0;
  int width = 1;      // W, past lags used as predictors
  int lookahead = 1;  // L, future steps being predicted

  int length() const { return width + lookahead + 1; }
  int topics() const { return i_series.empty() ? 0 : static_cast<int>(i_series[0].size()); }
  void validate() const;
};

// Fitted lag regression. own_lags are the scalar coefficients on the
// target's own lagged vectors; cross_lags (empty for the restricted model)
// are the coefficients on the other user's lagged vectors.
struct RegressionFit {
  std::vector<double> intercept;  // per topic
  std::vector<double> own_lags;   // size W
  std::vector<double> cross_lags;
  double rss = 0.0;
};

enum class Direction { ItoJ, JtoI, Tie };

enum class FVariant {
  Windowed,   // ((r1 - r2) / r2) * ((2L - 1) / W)
  Classical,  // ((r1 - r2) / W) / (r2 / (n - 2W - 1)), n = L + 1 target steps
};

struct FStat {
  double value = 0.0;
  bool perfect_fit = false;  // r2 == 0; value is +infinity
};

struct TscResult {
  double f_forward = 0.0;   // TSC(i -> j, tau)
  double f_backward = 0.0;  // TSC(j -> i, tau)
  Direction direction = Direction::Tie;
  bool forward_perfect_fit = false;
  bool backward_perfect_fit = false;
  bool carried_forward = false;  // a series value was extended past a user's last step
};

// Fits {eta0, eta_1..eta_W} on the target's own lags by cyclic coordinate
// descent; each coordinate update is the exact one-dimensional least-squares
// minimizer. rss is evaluated from the final parameters.
RegressionFit fit_restricted(const SeriesWindow& window);

// Holds eta fixed at the restricted solution and fits only the cross-lag
// coefficients, starting from zero, so rss never exceeds the restricted rss.
RegressionFit fit_unrestricted(const SeriesWindow& window, const RegressionFit& restricted);

// topics only matters for the classical variant, where the sample size is the
// scalar observation count n = (L + 1) * topics.
FStat f_stat(double r1, double r2, int width, int lookahead,
             FVariant variant = FVariant::Windowed, int topics = 1);

// Builds the window for users i and j around tau. Values past a user's last
// time step are carried forward from the last available posterior; a window
// reaching before time 1 is an error rather than truncated.
SeriesWindow make_window(const TopicSeries& series, int user_i, int user_j, int tau, int width,
                         int lookahead, bool* carried_forward = nullptr);

TscResult tsc_pair(const SeriesWindow& window, FVariant variant = FVariant::Windowed);
TscResult tsc_pair(const TopicSeries& series, int user_i, int user_j, int tau, int width,
                   int lookahead, FVariant variant = FVariant::Windowed);

const char* direction_name(Direction d);
FVariant parse_f_variant(const std::string& name);

}  // namespace ldtm
