#include "ldtm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ldtm/rng.hpp"

namespace ldtm {

int Vocabulary::add(const std::string& token) {
  auto it = item_to_index_.find(token);
  if (it != item_to_index_.end()) return it->second;
  const int idx = static_cast<int>(index_to_item_.size());
  index_to_item_.push_back(token);
  item_to_index_.emplace(token, idx);
  return idx;
}

int Vocabulary::index_of(const std::string& token) const {
  auto it = item_to_index_.find(token);
  return it == item_to_index_.end() ? -1 : it->second;
}

int Corpus::global_max_time() const {
  int t_max = 0;
  for (const auto& user : tokens) t_max = std::max(t_max, static_cast<int>(user.size()));
  return t_max;
}

long long Corpus::total_tokens() const {
  long long total = 0;
  for (const auto& user : tokens)
    for (const auto& slice : user) total += static_cast<long long>(slice.size());
  return total;
}

int Corpus::user_index(const std::string& id) const {
  auto it = user_index_.find(id);
  return it == user_index_.end() ? -1 : it->second;
}

void Corpus::rebuild_user_index() {
  user_index_.clear();
  for (int n = 0; n < user_count(); ++n) user_index_.emplace(user_ids[n], n);
}

Corpus ingest_events(const std::vector<AdoptionEvent>& stream, const PruneRules& rules) {
  if (stream.empty()) throw EmptyCorpus("no adoption events supplied");

  std::unordered_map<std::string, long long> frequency;
  for (const auto& ev : stream) {
    if (ev.time_step < 1)
      throw MalformedEvent("time_step must be >= 1 (user '" + ev.user_id + "', item '" +
                           ev.item + "', t=" + std::to_string(ev.time_step) + ")");
    if (ev.count < 1) throw MalformedEvent("count must be >= 1 (item '" + ev.item + "')");
    if (ev.item.empty()) throw MalformedEvent("empty item token (user '" + ev.user_id + "')");
    if (ev.user_id.empty()) throw MalformedEvent("empty user id (item '" + ev.item + "')");
    if (!rules.stopwords.count(ev.item)) frequency[ev.item] += ev.count;
  }

  Corpus corpus;
  // First pass in stream order keeps user and vocabulary numbering stable.
  std::unordered_map<std::string, int> user_slot;
  for (const auto& ev : stream) {
    if (rules.stopwords.count(ev.item)) continue;
    if (frequency.at(ev.item) < rules.min_count) continue;
    auto [it, fresh] = user_slot.try_emplace(ev.user_id, corpus.user_count());
    if (fresh) {
      corpus.user_ids.push_back(ev.user_id);
      corpus.tokens.emplace_back();
    }
    auto& user = corpus.tokens[it->second];
    if (static_cast<int>(user.size()) < ev.time_step) user.resize(ev.time_step);
    const int item = corpus.vocabulary.add(ev.item);
    user[ev.time_step - 1].insert(user[ev.time_step - 1].end(), ev.count, item);
  }

  if (corpus.total_tokens() == 0) throw EmptyCorpus("no tokens survived pruning");
  corpus.rebuild_user_index();
  return corpus;
}

std::vector<HoldoutSplit> make_holdout(const Corpus& corpus, const std::vector<int>& levels,
                                       std::uint64_t seed) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1 || levels[i] > 90)
      throw InvalidSplit("holdout level must be in [1, 90], got " + std::to_string(levels[i]));
    if (i > 0 && levels[i] <= levels[i - 1])
      throw InvalidSplit("holdout levels must be strictly ascending");
  }

  std::vector<TokenPosition> all;
  all.reserve(static_cast<std::size_t>(corpus.total_tokens()));
  for (int n = 0; n < corpus.user_count(); ++n)
    for (int t = 1; t <= corpus.max_time(n); ++t)
      for (int p = 0; p < static_cast<int>(corpus.tokens[n][t - 1].size()); ++p)
        all.push_back({n, t, p});

  // One global shuffle; each level takes a prefix, which makes nesting exact.
  Rng rng(seed);
  rng.shuffle(all);

  std::vector<HoldoutSplit> splits;
  splits.reserve(levels.size());
  for (int level : levels) {
    const std::size_t count = all.size() * static_cast<std::size_t>(level) / 100;
    HoldoutSplit split;
    split.level = level;
    split.hidden.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(split.hidden.begin(), split.hidden.end());
    splits.push_back(std::move(split));
  }
  return splits;
}

namespace {

std::string lower_last_name(const std::string& user_id) {
  const auto end = user_id.find_last_not_of(" \t");
  if (end == std::string::npos) return {};
  auto begin = user_id.find_last_of(" \t", end);
  begin = (begin == std::string::npos) ? 0 : begin + 1;
  std::string name = user_id.substr(begin, end - begin + 1);
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return name;
}

}  // namespace

bool InteractionRecord::compute_alphabetical(const std::vector<std::string>& users) {
  for (std::size_t i = 1; i < users.size(); ++i)
    if (lower_last_name(users[i - 1]) > lower_last_name(users[i])) return false;
  return true;
}

std::vector<InteractionRecord> filter_interactions(const std::vector<InteractionRecord>& records) {
  std::vector<InteractionRecord> kept;
  for (const auto& rec : records)
    if (!rec.is_alphabetical) kept.push_back(rec);
  return kept;
}

std::vector<PairTask> pair_tasks(const std::vector<InteractionRecord>& records,
                                 Hypothesis hypothesis, const Corpus* corpus) {
  std::vector<PairTask> tasks;
  long long dropped = 0;
  auto known = [&](const std::string& id) {
    return corpus == nullptr || corpus->user_index(id) >= 0;
  };
  auto emit = [&](const std::string& influencer, const std::string& influencee, int tau) {
    if (known(influencer) && known(influencee)) {
      tasks.push_back({influencer, influencee, tau});
    } else {
      ++dropped;
    }
  };

  for (const auto& rec : records) {
    const auto& u = rec.users;
    if (u.size() < 2) continue;
    switch (hypothesis) {
      case Hypothesis::AB:
        emit(u[1], u[0], rec.tau);  // second author -> first author
        break;
      case Hypothesis::AZ:
        if (u.size() > 2) emit(u.back(), u[0], rec.tau);  // last -> first
        break;
      case Hypothesis::BfAf:
        if (u.size() > 2)
          for (std::size_t a = 0; a < u.size(); ++a)
            for (std::size_t b = a + 1; b < u.size(); ++b) emit(u[b], u[a], rec.tau);
        break;
    }
  }
  if (dropped > 0)
    std::cerr << "warning: dropped " << dropped << " pair task(s) naming users absent from the corpus\n";
  return tasks;
}

SplitCorpus apply_holdout(const Corpus& corpus, const HoldoutSplit& split) {
  SplitCorpus out;
  out.train.user_ids = corpus.user_ids;
  out.train.vocabulary = corpus.vocabulary;
  out.train.tokens.resize(corpus.user_count());

  // Group hidden positions per (user, time) for one linear pass.
  std::map<std::pair<int, int>, std::vector<int>> hidden_at;
  for (const auto& pos : split.hidden) {
    if (pos.user < 0 || pos.user >= corpus.user_count() || pos.time < 1 ||
        pos.time > corpus.max_time(pos.user) ||
        pos.pos >= static_cast<int>(corpus.tokens[pos.user][pos.time - 1].size()))
      throw InvalidSplit("hidden position outside the corpus");
    hidden_at[{pos.user, pos.time}].push_back(pos.pos);
  }

  for (int n = 0; n < corpus.user_count(); ++n) {
    out.train.tokens[n].resize(corpus.max_time(n));
    for (int t = 1; t <= corpus.max_time(n); ++t) {
      const auto& slice = corpus.tokens[n][t - 1];
      auto it = hidden_at.find({n, t});
      if (it == hidden_at.end()) {
        out.train.tokens[n][t - 1] = slice;
        continue;
      }
      std::vector<bool> hide(slice.size(), false);
      for (int p : it->second) hide[static_cast<std::size_t>(p)] = true;
      auto& kept = out.train.tokens[n][t - 1];
      kept.reserve(slice.size() - it->second.size());
      for (std::size_t p = 0; p < slice.size(); ++p) {
        if (hide[p]) {
          out.heldout.push_back({n, t, slice[p]});
        } else {
          kept.push_back(slice[p]);
        }
      }
    }
  }
  out.train.rebuild_user_index();
  return out;
}

// --- Text formats -----------------------------------------------------------

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

int parse_int(const std::string& s, const char* what, long line_no) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return value;
  } catch (const std::exception&) {
    throw MalformedEvent(std::string("line ") + std::to_string(line_no) + ": bad " + what +
                         " '" + s + "'");
  }
}

bool skippable(const std::string& line) {
  return line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::vector<AdoptionEvent> read_events_tsv(std::istream& in) {
  std::vector<AdoptionEvent> events;
  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4)
      throw MalformedEvent("line " + std::to_string(line_no) +
                           ": expected `user TAB time TAB item [TAB count]`");
    AdoptionEvent ev;
    ev.user_id = fields[0];
    ev.time_step = parse_int(fields[1], "time_step", line_no);
    ev.item = fields[2];
    ev.count = fields.size() == 4 ? parse_int(fields[3], "count", line_no) : 1;
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<AdoptionEvent> read_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SnapshotError("cannot open events file: " + path);
  return read_events_tsv(in);
}

void write_events_tsv(std::ostream& out, const std::vector<AdoptionEvent>& events) {
  for (const auto& ev : events)
    out << ev.user_id << '\t' << ev.time_step << '\t' << ev.item << '\t' << ev.count << '\n';
}

std::vector<InteractionRecord> read_interactions_tsv(std::istream& in) {
  std::vector<InteractionRecord> records;
  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 3)
      throw MalformedEvent("line " + std::to_string(line_no) +
                           ": interaction needs `tau TAB user1 TAB user2 [...]`");
    InteractionRecord rec;
    rec.tau = parse_int(fields[0], "tau", line_no);
    if (rec.tau < 1)
      throw MalformedEvent("line " + std::to_string(line_no) + ": tau must be >= 1");
    rec.users.assign(fields.begin() + 1, fields.end());
    rec.is_alphabetical = InteractionRecord::compute_alphabetical(rec.users);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<InteractionRecord> read_interactions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SnapshotError("cannot open interactions file: " + path);
  return read_interactions_tsv(in);
}

std::unordered_set<std::string> read_stopwords_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SnapshotError("cannot open stopword file: " + path);
  std::unordered_set<std::string> words;
  std::string raw;
  while (std::getline(in, raw)) {
    const std::string line = strip_cr(raw);
    if (!skippable(line)) words.insert(line);
  }
  return words;
}

const char* hypothesis_name(Hypothesis h) {
  switch (h) {
    case Hypothesis::AB: return "AB";
    case Hypothesis::AZ: return "AZ";
    case Hypothesis::BfAf: return "BfAf";
  }
  return "?";
}

Hypothesis parse_hypothesis(const std::string& name) {
  if (name == "AB" || name == "ab") return Hypothesis::AB;
  if (name == "AZ" || name == "az") return Hypothesis::AZ;
  if (name == "BfAf" || name == "bfaf" || name == "bf_af") return Hypothesis::BfAf;
  throw ConfigError("unknown hypothesis '" + name + "' (expected AB, AZ or BfAf)");
}

}  // namespace ldtm
