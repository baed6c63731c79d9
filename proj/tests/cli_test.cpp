// End-to-end tests of the ldtm binary. Each test shells out to the real
// executable (path injected via LDTM_CLI_BIN) and checks exit codes, stdout,
// and the files left behind. The library is linked in too, so snapshots the
// CLI writes can be loaded and inspected directly.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ldtm/corpus.hpp"
#include "ldtm/model.hpp"
#include "ldtm/snapshot.hpp"
#include "ldtm/synth.hpp"

using namespace ldtm;
namespace fs = std::filesystem;

namespace {

fs::path work_root() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "ldtm_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = work_root() / name;
  fs::create_directories(d);
  return d;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out_path = work_root() / ("stdout_" + std::to_string(counter) + ".txt");
  const fs::path err_path = work_root() / ("stderr_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(LDTM_CLI_BIN) + " " + args + " > " + out_path.string() +
                          " 2> " + err_path.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

// One shared synth -> train pipeline; built on first use.
struct Pipeline {
  fs::path synth_dir;
  fs::path model;
  fs::path manifest;
  fs::path trace;
  std::string corpus() const { return (synth_dir / "corpus.json").string(); }
};

const Pipeline& pipeline() {
  static const Pipeline p = [] {
    Pipeline pl;
    pl.synth_dir = fresh_dir("pipe_synth");
    const RunResult synth =
        run("synth --users 8 --steps 6 --topics 3 --items 30 --tokens 12 --seed 5 --out-dir " +
            pl.synth_dir.string());
    REQUIRE(synth.status == 0);
    const fs::path dir = fresh_dir("pipe_train");
    pl.model = dir / "model.json";
    pl.manifest = dir / "model.run.json";
    pl.trace = dir / "trace.csv";
    const RunResult train = run("train --corpus " + pl.corpus() +
                                " --topics 3 --iters 5 --mode learned --seed 9 --holdout 10 "
                                "--holdout-seed 3 --out " +
                                pl.model.string() + " --trace " + pl.trace.string());
    REQUIRE(train.status == 0);
    return pl;
  }();
  return p;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("version flag and help exit cleanly") {
  const RunResult v = run("--version");
  CHECK(v.status == 0);
  CHECK(v.out.find("0.1.0") != std::string::npos);

  const RunResult h = run("--help");
  CHECK(h.status == 0);
  CHECK(h.out.find("train") != std::string::npos);
}

TEST_CASE("usage mistakes exit with code 2") {
  CHECK(run("").status == 2);
  CHECK(run("bogus-subcommand").status == 2);
  CHECK(run("ingest").status == 2);  // --events is required
  const RunResult r = run("train --corpus nowhere.json --mode sideways");
  CHECK(r.status == 2);
  CHECK(r.err.find("error:usage:") != std::string::npos);
}

TEST_CASE("synth writes corpus, truth, events, and a manifest") {
  const Pipeline& p = pipeline();
  CHECK(fs::exists(p.synth_dir / "corpus.json"));
  CHECK(fs::exists(p.synth_dir / "truth.json"));
  CHECK(fs::exists(p.synth_dir / "events.tsv"));
  CHECK(fs::exists(p.synth_dir / "run.json"));

  const Corpus corpus = load_corpus(p.corpus());
  CHECK(corpus.user_count() == 8);
  CHECK(corpus.vocabulary.size() == 30);
  CHECK(corpus.global_max_time() == 6);

  const GroundTruth truth = load_ground_truth((p.synth_dir / "truth.json").string());
  CHECK(truth.users() == 8);
  CHECK(truth.topics() == 3);

  // The events file replays into the same shape.
  const auto events = read_events_file((p.synth_dir / "events.tsv").string());
  CHECK(static_cast<long long>(events.size()) == corpus.total_tokens());
  CHECK(read_file(p.synth_dir / "run.json").find("\"synth\"") != std::string::npos);
}

TEST_CASE("train writes a loadable snapshot, a manifest, and a trace") {
  const Pipeline& p = pipeline();
  REQUIRE(fs::exists(p.model));
  REQUIRE(fs::exists(p.manifest));
  REQUIRE(fs::exists(p.trace));

  const ModelSnapshot snap = load_model(p.model.string());
  CHECK(snap.config.topics == 3);
  CHECK(snap.config.iterations == 5);
  CHECK(snap.config.dynamics_mode == DynamicsMode::Learned);
  CHECK(snap.config.seed == 9);
  CHECK(snap.holdout_level == 10);
  CHECK(snap.holdout_seed == 3);
  CHECK(snap.loglik_trace.size() == 5);
  CHECK(snap.vocab_hash == vocabulary_hash(load_corpus(p.corpus()).vocabulary));

  const std::string trace = read_file(p.trace);
  CHECK(trace.rfind("model,mode,iter,loglik\n", 0) == 0);
  CHECK(count_lines(trace) == 6);  // header + one row per sweep
  CHECK(trace.find("learned") != std::string::npos);
}

TEST_CASE("eval scores held-out tokens into a csv") {
  const Pipeline& p = pipeline();
  const fs::path dir = fresh_dir("eval");
  const fs::path out = dir / "all.csv";
  const RunResult r =
      run("eval --corpus " + p.corpus() + " --model " + p.model.string() + " --out " + out.string());
  CHECK(r.status == 0);
  CHECK(r.out.find("points=") != std::string::npos);
  REQUIRE(fs::exists(out));
  const std::string csv = read_file(out);
  CHECK(csv.rfind("model,mode,t,all_at_t,support\n", 0) == 0);
  CHECK(csv.find("model,learned,") != std::string::npos);  // label defaults to the file stem
  CHECK(fs::exists(dir / "all.run.json"));

  const RunResult labeled = run("eval --corpus " + p.corpus() + " --model " + p.model.string() +
                                " --label fancy --out " + (dir / "labeled.csv").string());
  CHECK(labeled.status == 0);
  CHECK(read_file(dir / "labeled.csv").find("fancy,") != std::string::npos);
}

TEST_CASE("tsc and ratio consume interactions and emit tables") {
  const Pipeline& p = pipeline();
  const fs::path dir = fresh_dir("pairs");
  const fs::path inter = dir / "interactions.tsv";
  // u003,u001 and u005,u002,u000 are non-alphabetical author orders and
  // survive the filter; u001,u004 is alphabetical and is dropped by default.
  write_file(inter,
             "# tau TAB authors...\n"
             "4\tu003\tu001\n"
             "5\tu005\tu002\tu000\n"
             "3\tu001\tu004\n");

  const fs::path tsc_out = dir / "tsc.tsv";
  const RunResult tsc = run("tsc --corpus " + p.corpus() + " --model " + p.model.string() +
                            " --interactions " + inter.string() +
                            " --width 2 --lookahead 2 --out " + tsc_out.string());
  CHECK(tsc.status == 0);
  CHECK(tsc.out.find("pairs=2 skipped=0") != std::string::npos);
  const std::string tsv = read_file(tsc_out);
  CHECK(tsv.rfind("i\tj\ttau\tf_forward\tf_backward\tdirection\tflags\n", 0) == 0);
  CHECK(count_lines(tsv) == 3);
  CHECK(fs::exists(dir / "tsc.run.json"));

  const RunResult unfiltered = run("tsc --corpus " + p.corpus() + " --model " + p.model.string() +
                                   " --interactions " + inter.string() +
                                   " --width 2 --lookahead 2 --no-filter-alpha --out " +
                                   (dir / "tsc_all.tsv").string());
  CHECK(unfiltered.status == 0);
  CHECK(unfiltered.out.find("pairs=3") != std::string::npos);

  const fs::path ratio_out = dir / "ratio.csv";
  const RunResult ratio = run("ratio --corpus " + p.corpus() + " --model " + p.model.string() +
                              " --interactions " + inter.string() +
                              " --width 2 --lookahead 2 --min-support 0 --out " +
                              ratio_out.string());
  CHECK(ratio.status == 0);
  CHECK(ratio.out.find("overall_ratio=") != std::string::npos);
  const std::string csv = read_file(ratio_out);
  CHECK(csv.rfind("model,hypothesis,bin,ratio,support\n", 0) == 0);
  CHECK(csv.find(",AB,") != std::string::npos);
  CHECK(count_lines(csv) >= 2);
}

TEST_CASE("ingest expands counts and honors stopwords") {
  const fs::path dir = fresh_dir("ingest");
  const fs::path events = dir / "events.tsv";
  write_file(events,
             "# user TAB time TAB item TAB count\n"
             "alice\t1\tapple\t2\n"
             "bob\t1\tapple\n"
             "alice\t2\tbanana\n"
             "bob\t2\tbanana\n"
             "bob\t2\tapple\n");
  const RunResult r = run("ingest --events " + events.string() + " --min-count 1 --out " +
                          (dir / "corpus.json").string());
  CHECK(r.status == 0);
  CHECK(r.out.find("users=2 vocab=2 tokens=6 t_max=2") != std::string::npos);
  CHECK(fs::exists(dir / "corpus.run.json"));
  const Corpus corpus = load_corpus((dir / "corpus.json").string());
  CHECK(corpus.user_ids == std::vector<std::string>{"alice", "bob"});

  const fs::path stop = dir / "stop.txt";
  write_file(stop, "apple\n");
  const RunResult s = run("ingest --events " + events.string() + " --min-count 1 --stopwords " +
                          stop.string() + " --out " + (dir / "nostop.json").string());
  CHECK(s.status == 0);
  CHECK(s.out.find("vocab=1 tokens=2") != std::string::npos);

  // Everything pruned away is a data error, not a silent empty corpus.
  const RunResult empty = run("ingest --events " + events.string() + " --min-count 10 --out " +
                              (dir / "empty.json").string());
  CHECK(empty.status == 3);
  CHECK(empty.err.find("error:data:") != std::string::npos);
}

TEST_CASE("rerun replays a manifest and reproduces outputs byte for byte") {
  const Pipeline& p = pipeline();
  const std::string before = read_file(p.model);
  const RunResult r = run("rerun --manifest " + p.manifest.string());
  CHECK(r.status == 0);
  CHECK(read_file(p.model) == before);

  // Re-training directly with the same flags is also byte-identical.
  const fs::path dir = fresh_dir("retrain");
  const fs::path copy = dir / "model2.json";
  const RunResult again = run("train --corpus " + p.corpus() +
                              " --topics 3 --iters 5 --mode learned --seed 9 --holdout 10 "
                              "--holdout-seed 3 --out " +
                              copy.string());
  CHECK(again.status == 0);
  CHECK(read_file(copy) == before);
}

TEST_CASE("rerun rejects non-manifests and recursive manifests") {
  const Pipeline& p = pipeline();
  const RunResult not_manifest =
      run("rerun --manifest " + (p.synth_dir / "truth.json").string());
  CHECK(not_manifest.status == 3);

  const fs::path dir = fresh_dir("rerun_bad");
  const fs::path recursive = dir / "loop.run.json";
  write_file(recursive,
             R"({"format": "ldtm-run", "version": 1, "tool_version": "0.1.0", "command": "rerun", "args": ["rerun", "--manifest", "x"]})");
  const RunResult loop = run("rerun --manifest " + recursive.string());
  CHECK(loop.status == 2);
}

TEST_CASE("data and config problems map to distinct exit codes") {
  const Pipeline& p = pipeline();
  // Missing input file.
  CHECK(run("train --corpus " + (work_root() / "nope.json").string()).status == 3);
  // Invalid model configuration.
  CHECK(run("train --corpus " + p.corpus() + " --topics 1 --out " +
            (work_root() / "t1.json").string())
            .status == 2);
  // Vocabulary mismatch between model and corpus.
  const fs::path other = fresh_dir("other_synth");
  REQUIRE(run("synth --users 4 --steps 6 --topics 3 --items 20 --tokens 8 --seed 77 --out-dir " +
              other.string())
              .status == 0);
  const RunResult mismatch = run("eval --corpus " + (other / "corpus.json").string() +
                                 " --model " + p.model.string() + " --out " +
                                 (work_root() / "mismatch.csv").string());
  CHECK(mismatch.status == 3);
  CHECK(mismatch.err.find("does not match") != std::string::npos);

  // A model trained without a holdout cannot be evaluated without one.
  const fs::path dir = fresh_dir("no_holdout");
  REQUIRE(run("train --corpus " + p.corpus() + " --topics 3 --iters 2 --out " +
              (dir / "m.json").string())
              .status == 0);
  const RunResult no_holdout = run("eval --corpus " + p.corpus() + " --model " +
                                   (dir / "m.json").string() + " --out " +
                                   (dir / "all.csv").string());
  CHECK(no_holdout.status == 2);

  // ...but an explicit level on the command line fixes it.
  const RunResult with_level = run("eval --corpus " + p.corpus() + " --model " +
                                   (dir / "m.json").string() + " --holdout 10 --holdout-seed 1 " +
                                   "--out " + (dir / "all2.csv").string());
  CHECK(with_level.status == 0);
}
