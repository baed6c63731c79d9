#include "ldtm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <thread>
#include <unordered_map>

namespace ldtm {

std::vector<AllAtT> all_at_t(const TopicSeries& theta, const PhiMatrix& phi,
                             const std::vector<HeldOutToken>& hidden) {
  const int users = static_cast<int>(theta.theta.size());
  const int topics = static_cast<int>(phi.phi.size());
  std::map<int, std::pair<double, int>> per_t;  // t -> (log-lik sum, count)
  for (const auto& h : hidden) {
    if (h.user < 0 || h.user >= users) throw DimensionError("held-out token names unknown user");
    const auto& rows = theta.theta[h.user];
    if (rows.empty()) throw DimensionError("held-out token for user with no time steps");
    const int t_idx = std::min(h.time, static_cast<int>(rows.size())) - 1;
    const auto& row = rows[t_idx];
    double p = 0.0;
    for (int k = 0; k < topics; ++k) {
      if (h.item < 0 || h.item >= static_cast<int>(phi.phi[k].size())) {
        throw DimensionError("held-out token outside vocabulary");
      }
      p += row[k] * phi.phi[k][h.item];
    }
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw NumericError("held-out token has non-positive mixture probability");
    }
    auto& acc = per_t[h.time];
    acc.first += std::log(p);
    acc.second += 1;
  }
  std::vector<AllAtT> out;
  out.reserve(per_t.size());
  for (const auto& [t, acc] : per_t) {
    out.push_back({t, acc.first / acc.second, acc.second});
  }
  return out;
}

double mean_all_from(const std::vector<AllAtT>& points, int first_t) {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : points) {
    if (p.t >= first_t) {
      sum += p.value;
      ++n;
    }
  }
  if (n == 0) throw EmptyPairSet("no ALL@t points at or after t=" + std::to_string(first_t));
  return sum / n;
}

int sustained_steps(const std::vector<InteractionRecord>& records, const std::string& user_a,
                    const std::string& user_b) {
  std::set<int> steps;
  for (const auto& rec : records) {
    bool has_a = false;
    bool has_b = false;
    for (const auto& u : rec.users) {
      has_a = has_a || u == user_a;
      has_b = has_b || u == user_b;
    }
    if (has_a && has_b) steps.insert(rec.tau);
  }
  return static_cast<int>(steps.size());
}

std::vector<TscOutcome> evaluate_pairs(const TopicSeries& series, const Corpus& corpus,
                                       const std::vector<PairTask>& tasks,
                                       const std::vector<InteractionRecord>& records, int width,
                                       int lookahead, FVariant variant, int threads,
                                       int* skipped) {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  const int n_tasks = static_cast<int>(tasks.size());
  std::vector<std::optional<TscOutcome>> slots(n_tasks);

  // Bin lookup is shared and read-only once built; precompute per unordered pair.
  std::map<std::pair<std::string, std::string>, int> bins;
  for (const auto& task : tasks) {
    auto key = std::minmax(task.influencer, task.influencee);
    std::pair<std::string, std::string> k{key.first, key.second};
    if (bins.find(k) == bins.end()) {
      bins[k] = sustained_steps(records, task.influencer, task.influencee);
    }
  }

  auto run_slot = [&](int idx) {
    const PairTask& task = tasks[idx];
    const int ui = corpus.user_index(task.influencer);
    const int uj = corpus.user_index(task.influencee);
    if (ui < 0 || uj < 0) throw DimensionError("pair task names user absent from corpus");
    if (task.tau - width < 1) return;  // insufficient history; leave slot empty
    TscResult r = tsc_pair(series, ui, uj, task.tau, width, lookahead, variant);
    TscOutcome o;
    o.task = task;
    o.f_influence = r.f_forward;
    o.f_reverse = r.f_backward;
    o.influence_wins = r.direction == Direction::ItoJ;
    o.tie = r.direction == Direction::Tie;
    o.carried_forward = r.carried_forward;
    o.perfect_forward = r.forward_perfect_fit;
    o.perfect_backward = r.backward_perfect_fit;
    auto key = std::minmax(task.influencer, task.influencee);
    o.bin = bins.at({key.first, key.second});
    slots[idx] = o;
  };

  if (threads == 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) run_slot(i);
  } else {
    const int workers = std::min(threads, n_tasks);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n_tasks; i += workers) run_slot(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<TscOutcome> out;
  out.reserve(n_tasks);
  int dropped = 0;
  for (auto& slot : slots) {
    if (slot.has_value()) {
      out.push_back(std::move(*slot));
    } else {
      ++dropped;
    }
  }
  if (skipped != nullptr) *skipped = dropped;
  return out;
}

std::vector<RatioPoint> ratio(const std::vector<TscOutcome>& outcomes, int min_support) {
  if (outcomes.empty()) throw EmptyPairSet("ratio over an empty pair set");
  std::map<int, std::pair<int, int>> by_bin;  // bin -> (wins, total)
  for (const auto& o : outcomes) {
    auto& acc = by_bin[o.bin];
    acc.first += o.influence_wins ? 1 : 0;
    acc.second += 1;
  }
  std::vector<RatioPoint> out;
  for (const auto& [bin, acc] : by_bin) {
    if (acc.second < min_support) continue;
    out.push_back({bin, static_cast<double>(acc.first) / acc.second, acc.second});
  }
  return out;
}

double overall_ratio(const std::vector<TscOutcome>& outcomes) {
  if (outcomes.empty()) throw EmptyPairSet("ratio over an empty pair set");
  int wins = 0;
  for (const auto& o : outcomes) wins += o.influence_wins ? 1 : 0;
  return static_cast<double>(wins) / static_cast<double>(outcomes.size());
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_convergence_csv(std::ostream& out, const std::vector<double>& trace,
                           const std::string& model, const std::string& mode) {
  out << "model,mode,iter,loglik\n";
  for (size_t i = 0; i < trace.size(); ++i) {
    out << model << ',' << mode << ',' << (i + 1) << ',' << format_double(trace[i]) << '\n';
  }
}

void write_all_csv(std::ostream& out, const std::vector<AllAtT>& points, const std::string& model,
                   const std::string& mode) {
  out << "model,mode,t,all_at_t,support\n";
  for (const auto& p : points) {
    out << model << ',' << mode << ',' << p.t << ',' << format_double(p.value) << ',' << p.support
        << '\n';
  }
}

void write_ratio_csv(std::ostream& out, const std::vector<RatioPoint>& points,
                     const std::string& model, const std::string& hypothesis) {
  out << "model,hypothesis,bin,ratio,support\n";
  for (const auto& p : points) {
    out << model << ',' << hypothesis << ',' << p.bin << ',' << format_double(p.ratio) << ','
        << p.support << '\n';
  }
}

void write_tsc_tsv(std::ostream& out, const std::vector<TscOutcome>& outcomes) {
  out << "i\tj\ttau\tf_forward\tf_backward\tdirection\tflags\n";
  for (const auto& o : outcomes) {
    std::string flags;
    auto add = [&flags](const char* f) {
      if (!flags.empty()) flags += ',';
      flags += f;
    };
    if (o.carried_forward) add("cf");
    if (o.perfect_forward) add("pf");
    if (o.perfect_backward) add("pb");
    if (flags.empty()) flags = "-";
    const char* dir = o.tie ? "tie" : (o.influence_wins ? "i->j" : "j->i");
    out << o.task.influencer << '\t' << o.task.influencee << '\t' << o.task.tau << '\t'
        << format_double(o.f_influence) << '\t' << format_double(o.f_reverse) << '\t' << dir
        << '\t' << flags << '\n';
  }
}

}  // namespace ldtm
