#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ldtm/corpus.hpp"

using namespace ldtm;

namespace {

AdoptionEvent ev(const std::string& user, int t, const std::string& item, int count = 1) {
  return AdoptionEvent{user, t, item, count};
}

InteractionRecord rec(std::vector<std::string> users, int tau) {
  InteractionRecord r;
  r.users = std::move(users);
  r.tau = tau;
  r.is_alphabetical = InteractionRecord::compute_alphabetical(r.users);
  return r;
}

}  // namespace

TEST_CASE("ingest: stopwords drop before counting, survivors keep multiplicity") {
  PruneRules rules;
  rules.stopwords = {"the"};
  rules.min_count = 10;
  Corpus c = ingest_events({ev("u1", 1, "the", 12), ev("u1", 1, "security", 12)}, rules);
  CHECK(c.vocabulary.size() == 1);
  CHECK(c.vocabulary.index_of("security") == 0);
  CHECK(c.vocabulary.index_of("the") == -1);
  REQUIRE(c.user_count() == 1);
  REQUIRE(c.max_time(0) == 1);
  CHECK(c.tokens[0][0].size() == 12);
  for (int w : c.tokens[0][0]) CHECK(w == 0);
}

TEST_CASE("ingest: corpus-wide frequency below min_count is pruned") {
  PruneRules rules;
  rules.min_count = 10;
  std::vector<AdoptionEvent> events;
  // "rare" appears 9 times spread over users; "common" appears 10 times.
  for (int i = 0; i < 9; ++i) events.push_back(ev("u" + std::to_string(i % 3), 1 + i % 2, "rare"));
  for (int i = 0; i < 10; ++i) events.push_back(ev("u0", 1, "common"));
  Corpus c = ingest_events(events, rules);
  CHECK(c.vocabulary.index_of("rare") == -1);
  CHECK(c.vocabulary.index_of("common") >= 0);
  CHECK(c.vocabulary.size() == 1);
  CHECK(c.total_tokens() == 10);
}

TEST_CASE("ingest: count field multiplies occurrences for pruning and tokens") {
  PruneRules rules;
  rules.min_count = 10;
  Corpus c = ingest_events({ev("u1", 2, "w", 10)}, rules);
  CHECK(c.total_tokens() == 10);
  REQUIRE(c.max_time(0) == 2);
  CHECK(c.tokens[0][0].empty());  // nothing at t=1
  CHECK(c.tokens[0][1].size() == 10);
}

TEST_CASE("ingest: malformed events rejected") {
  PruneRules rules;
  rules.min_count = 1;
  CHECK_THROWS_AS(ingest_events({ev("u1", 0, "w")}, rules), MalformedEvent);
  CHECK_THROWS_AS(ingest_events({ev("u1", -3, "w")}, rules), MalformedEvent);
  CHECK_THROWS_AS(ingest_events({ev("u1", 1, "w", 0)}, rules), MalformedEvent);
  CHECK_THROWS_AS(ingest_events({ev("u1", 1, "")}, rules), MalformedEvent);
  CHECK_THROWS_AS(ingest_events({ev("", 1, "w")}, rules), MalformedEvent);
  CHECK_THROWS_AS(ingest_events({}, rules), EmptyCorpus);
}

TEST_CASE("ingest: everything pruned away is EmptyCorpus") {
  PruneRules rules;
  rules.min_count = 100;
  CHECK_THROWS_AS(ingest_events({ev("u1", 1, "w", 5)}, rules), EmptyCorpus);
}

TEST_CASE("ingest: user and vocabulary numbering follow first retained appearance") {
  PruneRules rules;
  rules.min_count = 1;
  Corpus c = ingest_events({ev("b", 1, "beta"), ev("a", 1, "alpha"), ev("b", 2, "alpha")}, rules);
  REQUIRE(c.user_count() == 2);
  CHECK(c.user_ids[0] == "b");
  CHECK(c.user_ids[1] == "a");
  CHECK(c.user_index("b") == 0);
  CHECK(c.user_index("a") == 1);
  CHECK(c.user_index("nobody") == -1);
  CHECK(c.vocabulary.index_of("beta") == 0);
  CHECK(c.vocabulary.index_of("alpha") == 1);
}

TEST_CASE("vocabulary: bijection over retained tokens") {
  PruneRules rules;
  rules.min_count = 1;
  std::vector<AdoptionEvent> events;
  for (int i = 0; i < 40; ++i) events.push_back(ev("u", 1, "tok" + std::to_string(i)));
  Corpus c = ingest_events(events, rules);
  REQUIRE(c.vocabulary.size() == 40);
  for (int m = 0; m < c.vocabulary.size(); ++m)
    CHECK(c.vocabulary.index_of(c.vocabulary.token_at(m)) == m);
}

TEST_CASE("ingest: pruning monotonicity — raising min_count never grows M") {
  std::vector<AdoptionEvent> events;
  for (int i = 0; i < 30; ++i)
    events.push_back(ev("u" + std::to_string(i % 4), 1 + i % 3, "t" + std::to_string(i % 7),
                        1 + i % 5));
  int prev_m = -1;
  for (int mc = 1; mc <= 12; ++mc) {
    PruneRules rules;
    rules.min_count = mc;
    int m = 0;
    try {
      m = ingest_events(events, rules).vocabulary.size();
    } catch (const EmptyCorpus&) {
      m = 0;
    }
    if (prev_m >= 0) CHECK(m <= prev_m);
    prev_m = m;
  }
}

static Corpus hundred_token_corpus() {
  PruneRules rules;
  rules.min_count = 1;
  std::vector<AdoptionEvent> events;
  for (int n = 0; n < 5; ++n)
    for (int t = 1; t <= 4; ++t)
      for (int p = 0; p < 5; ++p)
        events.push_back(ev("u" + std::to_string(n), t, "w" + std::to_string((n + t + p) % 11)));
  Corpus c = ingest_events(events, rules);
  REQUIRE(c.total_tokens() == 100);
  return c;
}

TEST_CASE("holdout: exact proportion on a 100-token corpus") {
  Corpus c = hundred_token_corpus();
  auto splits = make_holdout(c, {10}, 7);
  REQUIRE(splits.size() == 1);
  CHECK(splits[0].level == 10);
  CHECK(splits[0].hidden.size() == 10);
}

TEST_CASE("holdout: nesting — each level extends the previous") {
  Corpus c = hundred_token_corpus();
  auto splits = make_holdout(c, {10, 20, 30, 40, 50}, 7);
  REQUIRE(splits.size() == 5);
  for (std::size_t i = 1; i < splits.size(); ++i) {
    std::set<TokenPosition> prev(splits[i - 1].hidden.begin(), splits[i - 1].hidden.end());
    std::set<TokenPosition> cur(splits[i].hidden.begin(), splits[i].hidden.end());
    CHECK(prev.size() < cur.size());
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
  }
}

TEST_CASE("holdout: deterministic per seed, different across seeds") {
  Corpus c = hundred_token_corpus();
  auto a = make_holdout(c, {20}, 7);
  auto b = make_holdout(c, {20}, 7);
  CHECK(a[0].hidden == b[0].hidden);
  auto d = make_holdout(c, {20}, 8);
  CHECK(a[0].hidden != d[0].hidden);
}

TEST_CASE("holdout: level validation") {
  Corpus c = hundred_token_corpus();
  CHECK_THROWS_AS(make_holdout(c, {91}, 1), InvalidSplit);
  CHECK_THROWS_AS(make_holdout(c, {0}, 1), InvalidSplit);
  CHECK_THROWS_AS(make_holdout(c, {20, 10}, 1), InvalidSplit);
  CHECK_THROWS_AS(make_holdout(c, {10, 10}, 1), InvalidSplit);
}

TEST_CASE("apply_holdout: hidden tokens move to heldout, everything accounted for") {
  Corpus c = hundred_token_corpus();
  auto splits = make_holdout(c, {30}, 11);
  SplitCorpus sc = apply_holdout(c, splits[0]);
  CHECK(sc.heldout.size() == 30);
  CHECK(sc.train.total_tokens() == 70);
  CHECK(sc.train.user_count() == c.user_count());
  CHECK(sc.train.vocabulary.size() == c.vocabulary.size());

  // Per-(user, time) multiset of items must be preserved between the split
  // pieces and the original corpus.
  for (int n = 0; n < c.user_count(); ++n) {
    REQUIRE(sc.train.max_time(n) == c.max_time(n));
    for (int t = 1; t <= c.max_time(n); ++t) {
      std::multiset<int> original(c.tokens[n][t - 1].begin(), c.tokens[n][t - 1].end());
      std::multiset<int> rebuilt(sc.train.tokens[n][t - 1].begin(),
                                 sc.train.tokens[n][t - 1].end());
      for (const auto& h : sc.heldout)
        if (h.user == n && h.time == t) rebuilt.insert(h.item);
      CHECK(original == rebuilt);
    }
  }
}

TEST_CASE("apply_holdout: hidden item matches the position it came from") {
  Corpus c = hundred_token_corpus();
  HoldoutSplit split;
  split.level = 1;
  split.hidden = {{0, 1, 2}};
  SplitCorpus sc = apply_holdout(c, split);
  REQUIRE(sc.heldout.size() == 1);
  CHECK(sc.heldout[0].user == 0);
  CHECK(sc.heldout[0].time == 1);
  CHECK(sc.heldout[0].item == c.tokens[0][0][2]);

  HoldoutSplit bad;
  bad.hidden = {{0, 1, 999}};
  CHECK_THROWS_AS(apply_holdout(c, bad), InvalidSplit);
}

TEST_CASE("interactions: ascending last-name order is flagged and filtered") {
  auto adams_baker_chua = rec({"Alice Adams", "Bob Baker", "Carol Chua"}, 3);
  CHECK(adams_baker_chua.is_alphabetical);
  auto chua_adams = rec({"Carol Chua", "Alice Adams"}, 3);
  CHECK_FALSE(chua_adams.is_alphabetical);

  auto kept = filter_interactions({adams_baker_chua, chua_adams});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].users == chua_adams.users);
  for (const auto& r : kept) CHECK_FALSE(r.is_alphabetical);
}

TEST_CASE("interactions: last name = final whitespace token, case-insensitive") {
  CHECK(InteractionRecord::compute_alphabetical({"X ADAMS", "Y baker"}));
  CHECK(InteractionRecord::compute_alphabetical({"adams", "Baker"}));
  CHECK_FALSE(InteractionRecord::compute_alphabetical({"A Zimmer", "B Adams"}));
  // First names must not participate: Zed Adams < Ann Baker by last name.
  CHECK(InteractionRecord::compute_alphabetical({"Zed Adams", "Ann Baker"}));
  // Ties in last name do not break ascending order.
  CHECK(InteractionRecord::compute_alphabetical({"A Smith", "B Smith"}));
}

TEST_CASE("interactions: constructed 41% alphabetical corpus loses exactly 41%") {
  std::vector<InteractionRecord> records;
  for (int i = 0; i < 41; ++i) records.push_back(rec({"A Aa", "B Bb"}, 1 + i % 5));
  for (int i = 0; i < 59; ++i) records.push_back(rec({"B Bb", "A Aa"}, 1 + i % 5));
  REQUIRE(records.size() == 100);
  auto kept = filter_interactions(records);
  CHECK(kept.size() == 59);
}

TEST_CASE("pair_tasks: AB takes second author as influencer of the first") {
  auto tasks = pair_tasks({rec({"A Aa", "B Bb"}, 5)}, Hypothesis::AB);
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].influencer == "B Bb");
  CHECK(tasks[0].influencee == "A Aa");
  CHECK(tasks[0].tau == 5);
}

TEST_CASE("pair_tasks: AZ needs more than two authors") {
  CHECK(pair_tasks({rec({"A Aa", "B Bb"}, 2)}, Hypothesis::AZ).empty());
  auto tasks = pair_tasks({rec({"B Bb", "A Aa", "C Cc"}, 2)}, Hypothesis::AZ);
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].influencer == "C Cc");
  CHECK(tasks[0].influencee == "B Bb");
}

TEST_CASE("pair_tasks: BfAf enumerates later-before pairs, skips two-author records") {
  CHECK(pair_tasks({rec({"B Bb", "A Aa"}, 4)}, Hypothesis::BfAf).empty());
  auto tasks = pair_tasks({rec({"C a", "B b", "A c"}, 4)}, Hypothesis::BfAf);
  REQUIRE(tasks.size() == 3);
  auto has = [&](const std::string& i, const std::string& j) {
    return std::any_of(tasks.begin(), tasks.end(), [&](const PairTask& t) {
      return t.influencer == i && t.influencee == j && t.tau == 4;
    });
  };
  CHECK(has("B b", "C a"));
  CHECK(has("A c", "C a"));
  CHECK(has("A c", "B b"));
}

TEST_CASE("pair_tasks: users missing from the corpus are dropped") {
  PruneRules rules;
  rules.min_count = 1;
  Corpus c = ingest_events({ev("B Bb", 1, "w"), ev("A Aa", 1, "w")}, rules);
  auto tasks =
      pair_tasks({rec({"A Aa", "B Bb"}, 1), rec({"A Aa", "Z Zz"}, 1)}, Hypothesis::AB, &c);
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].influencer == "B Bb");
}

TEST_CASE("events tsv: round trip, comments, default count") {
  std::istringstream in(
      "# header comment\n"
      "u1\t1\tword\n"
      "\n"
      "u2\t3\tother\t4\r\n");
  auto events = read_events_tsv(in);
  REQUIRE(events.size() == 2);
  CHECK(events[0].user_id == "u1");
  CHECK(events[0].time_step == 1);
  CHECK(events[0].item == "word");
  CHECK(events[0].count == 1);
  CHECK(events[1].count == 4);
  CHECK(events[1].time_step == 3);

  std::ostringstream out;
  write_events_tsv(out, events);
  std::istringstream back(out.str());
  auto reread = read_events_tsv(back);
  REQUIRE(reread.size() == 2);
  CHECK(reread[1].user_id == "u2");
  CHECK(reread[1].count == 4);
}

TEST_CASE("events tsv: malformed lines rejected with line numbers") {
  std::istringstream missing("u1\t1\n");
  CHECK_THROWS_AS(read_events_tsv(missing), MalformedEvent);
  std::istringstream bad_int("u1\tone\tword\n");
  CHECK_THROWS_AS(read_events_tsv(bad_int), MalformedEvent);
  std::istringstream bad_count("u1\t1\tword\tmany\n");
  CHECK_THROWS_AS(read_events_tsv(bad_count), MalformedEvent);
}

TEST_CASE("interactions tsv: parses order, tau, alphabetical flag") {
  std::istringstream in(
      "3\tCarol Chua\tAlice Adams\n"
      "4\tAlice Adams\tBob Baker\tCarol Chua\n");
  auto records = read_interactions_tsv(in);
  REQUIRE(records.size() == 2);
  CHECK(records[0].tau == 3);
  CHECK_FALSE(records[0].is_alphabetical);
  CHECK(records[1].users.size() == 3);
  CHECK(records[1].is_alphabetical);

  std::istringstream short_line("5\tonly-one\n");
  CHECK_THROWS_AS(read_interactions_tsv(short_line), MalformedEvent);
  std::istringstream bad_tau("0\ta\tb\n");
  CHECK_THROWS_AS(read_interactions_tsv(bad_tau), MalformedEvent);
}

TEST_CASE("hypothesis names parse both ways") {
  CHECK(parse_hypothesis("AB") == Hypothesis::AB);
  CHECK(parse_hypothesis("az") == Hypothesis::AZ);
  CHECK(parse_hypothesis("BfAf") == Hypothesis::BfAf);
  CHECK(parse_hypothesis("bf_af") == Hypothesis::BfAf);
  CHECK(std::string(hypothesis_name(Hypothesis::AZ)) == "AZ");
  CHECK_THROWS_AS(parse_hypothesis("XY"), ConfigError);
}
