#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ldtm/corpus.hpp"
#include "ldtm/granger.hpp"
#include "ldtm/model.hpp"

namespace ldtm {

// Average log-likelihood per held-out token at one time step.
struct AllAtT {
  int t = 1;
  double value = 0.0;
  int support = 0;  // hidden tokens scored at t
};

// One directed pair evaluation, tagged with its sustained-co-authorship bin.
struct TscOutcome {
  PairTask task;
  double f_influence = 0.0;  // TSC(influencer -> influencee, tau)
  double f_reverse = 0.0;    // TSC(influencee -> influencer, tau)
  bool influence_wins = false;  // strict inequality
  bool tie = false;
  bool carried_forward = false;
  bool perfect_forward = false;
  bool perfect_backward = false;
  int bin = 0;  // distinct time steps at which the pair co-occurs
};

struct RatioPoint {
  int bin = 0;
  double ratio = 0.0;
  int support = 0;
};

// Scores hidden tokens under p(w) = sum_k theta_{n,t,k} * phi_{k,m}; time
// steps with no hidden tokens are omitted. theta rows past a user's last
// step are carried forward, matching the window construction in granger.
std::vector<AllAtT> all_at_t(const TopicSeries& theta, const PhiMatrix& phi,
                             const std::vector<HeldOutToken>& hidden);

// Mean of the per-step values for t >= first_t, weighted equally per step.
double mean_all_from(const std::vector<AllAtT>& points, int first_t);

// Distinct tau values among records listing both users (order-insensitive).
int sustained_steps(const std::vector<InteractionRecord>& records, const std::string& user_a,
                    const std::string& user_b);

// Runs tsc_pair for every task; tasks whose window would start before t=1
// are skipped and counted into *skipped. Results keep task order regardless
// of thread count.
std::vector<TscOutcome> evaluate_pairs(const TopicSeries& series, const Corpus& corpus,
                                       const std::vector<PairTask>& tasks,
                                       const std::vector<InteractionRecord>& records, int width,
                                       int lookahead, FVariant variant = FVariant::Windowed,
                                       int threads = 1, int* skipped = nullptr);

// Per-bin fraction of strict influencer wins; bins under min_support are
// suppressed (pass 0 to keep all). Empty input is an error.
std::vector<RatioPoint> ratio(const std::vector<TscOutcome>& outcomes, int min_support = 90);

double overall_ratio(const std::vector<TscOutcome>& outcomes);

// CSV/TSV emitters (schemas documented in the README). Doubles are printed
// with %.17g so identical runs produce identical bytes.
void write_convergence_csv(std::ostream& out, const std::vector<double>& trace,
                           const std::string& model, const std::string& mode);
void write_all_csv(std::ostream& out, const std::vector<AllAtT>& points, const std::string& model,
                   const std::string& mode);
void write_ratio_csv(std::ostream& out, const std::vector<RatioPoint>& points,
                     const std::string& model, const std::string& hypothesis);
void write_tsc_tsv(std::ostream& out, const std::vector<TscOutcome>& outcomes);

std::string format_double(double v);

}  // namespace ldtm
