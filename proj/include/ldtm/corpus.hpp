#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ldtm/errors.hpp"

namespace ldtm {

// One user action on one item at an integer time step (1-based).
struct AdoptionEvent {
  std::string user_id;
  int time_step = 1;
  std::string item;
  int count = 1;
};

struct PruneRules {
  std::unordered_set<std::string> stopwords;
  int min_count = 10;  // corpus-wide occurrence threshold; tokens below it are dropped
};

// Bijective token <-> index map over the retained vocabulary.
class Vocabulary {
public:
  int add(const std::string& token);          // returns index, inserting if new
  int index_of(const std::string& token) const;  // -1 if absent
  const std::string& token_at(int index) const { return index_to_item_.at(index); }
  int size() const { return static_cast<int>(index_to_item_.size()); }
  const std::vector<std::string>& tokens() const { return index_to_item_; }

private:
  std::unordered_map<std::string, int> item_to_index_;
  std::vector<std::string> index_to_item_;
};

// Time-bucketed token sequences per user. tokens[n][t-1] holds the item
// indices user n adopted at time step t; per-user length is T_n. Users with
// no tokens at any step do not appear.
struct Corpus {
  std::vector<std::string> user_ids;
  std::vector<std::vector<std::vector<int>>> tokens;
  Vocabulary vocabulary;

  int user_count() const { return static_cast<int>(user_ids.size()); }
  int max_time(int n) const { return static_cast<int>(tokens[n].size()); }
  int global_max_time() const;
  long long total_tokens() const;
  int user_index(const std::string& id) const;  // -1 if absent
  void rebuild_user_index();

private:
  std::unordered_map<std::string, int> user_index_;
};

// Ordered author list of one artifact plus its interaction time step.
struct InteractionRecord {
  std::vector<std::string> users;  // appearance order
  int tau = 1;
  bool is_alphabetical = false;

  // True iff the users' last names already appear in ascending order
  // (case-insensitive; last name = final whitespace-separated token).
  static bool compute_alphabetical(const std::vector<std::string>& users);
};

struct TokenPosition {
  int user = 0;  // corpus user index
  int time = 1;  // 1-based time step
  int pos = 0;   // position within the (user, time) token sequence

  friend bool operator==(const TokenPosition&, const TokenPosition&) = default;
  friend auto operator<=>(const TokenPosition&, const TokenPosition&) = default;
};

struct HoldoutSplit {
  int level = 0;                      // percent of tokens hidden
  std::vector<TokenPosition> hidden;  // sorted ascending
};

Corpus ingest_events(const std::vector<AdoptionEvent>& stream, const PruneRules& rules);

// Nested holdout splits: the split at each level extends the previous one,
// so hidden(p) is a subset of hidden(q) whenever p < q.
std::vector<HoldoutSplit> make_holdout(const Corpus& corpus, const std::vector<int>& levels,
                                       std::uint64_t seed);

std::vector<InteractionRecord> filter_interactions(const std::vector<InteractionRecord>& records);

enum class Hypothesis { AB, AZ, BfAf };

struct PairTask {
  std::string influencer;  // i
  std::string influencee;  // j
  int tau = 1;
};

// Expands filtered interaction records into directed (i, j, tau) tasks for
// the given hypothesis. When a corpus is supplied, tasks naming users absent
// from it are dropped with a warning on stderr.
std::vector<PairTask> pair_tasks(const std::vector<InteractionRecord>& records,
                                 Hypothesis hypothesis, const Corpus* corpus = nullptr);

// Held-out view of a corpus: `train` has the hidden tokens removed from its
// sequences (users and vocabulary are preserved), `heldout` lists them for
// scoring.
struct HeldOutToken {
  int user = 0;
  int time = 1;
  int item = 0;
};

struct SplitCorpus {
  Corpus train;
  std::vector<HeldOutToken> heldout;
};

SplitCorpus apply_holdout(const Corpus& corpus, const HoldoutSplit& split);

// --- Text formats -----------------------------------------------------------
// Adoption events: one event per line, `user TAB time_step TAB item [TAB count]`.
// Interactions:    one record per line, `tau TAB user1 TAB user2 [TAB ...]`.
// Blank lines and lines starting with '#' are skipped.

std::vector<AdoptionEvent> read_events_tsv(std::istream& in);
std::vector<AdoptionEvent> read_events_file(const std::string& path);
void write_events_tsv(std::ostream& out, const std::vector<AdoptionEvent>& events);

std::vector<InteractionRecord> read_interactions_tsv(std::istream& in);
std::vector<InteractionRecord> read_interactions_file(const std::string& path);

std::unordered_set<std::string> read_stopwords_file(const std::string& path);

const char* hypothesis_name(Hypothesis h);
Hypothesis parse_hypothesis(const std::string& name);

}  // namespace ldtm
