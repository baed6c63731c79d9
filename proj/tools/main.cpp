#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldtm/corpus.hpp"
#include "ldtm/eval.hpp"
#include "ldtm/granger.hpp"
#include "ldtm/model.hpp"
#include "ldtm/rng.hpp"
#include "ldtm/snapshot.hpp"
#include "ldtm/synth.hpp"

namespace fs = std::filesystem;
using namespace ldtm;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numeric: return 4;
  }
  return 4;
}

const char* category_tag(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return "usage";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::Numeric: return "numeric";
  }
  return "numeric";
}

std::string stem_of(const std::string& path) {
  const std::string s = fs::path(path).stem().string();
  return s.empty() ? path : s;
}

void manifest_for(const std::string& out_path, const std::string& command,
                  const std::vector<std::string>& args) {
  fs::path p(out_path);
  p.replace_extension();
  write_manifest(p.string() + ".run.json", command, args);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("cannot write " + path);
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse '" + part + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

Corpus load_corpus_checked(const std::string& path, const ModelSnapshot& snap) {
  Corpus corpus = load_corpus(path);
  if (vocabulary_hash(corpus.vocabulary) != snap.vocab_hash) {
    throw SnapshotError("corpus vocabulary does not match the model snapshot");
  }
  return corpus;
}

// Shared by `tsc` and `ratio`.
struct PairRun {
  std::string corpus_path, model_path, interactions_path, hypothesis = "AB";
  int width = 4, lookahead = 4, threads = 1;
  bool keep_unfiltered = false;
  std::string f_variant = "windowed";
};

std::vector<TscOutcome> run_pairs(const PairRun& pr, int* skipped) {
  const ModelSnapshot snap = load_model(pr.model_path);
  const Corpus corpus = load_corpus_checked(pr.corpus_path, snap);
  std::vector<InteractionRecord> records = read_interactions_file(pr.interactions_path);
  if (!pr.keep_unfiltered) records = filter_interactions(records);
  const auto tasks = pair_tasks(records, parse_hypothesis(pr.hypothesis), &corpus);
  return evaluate_pairs(snap.theta(), corpus, tasks, records, pr.width, pr.lookahead,
                        parse_f_variant(pr.f_variant), pr.threads, skipped);
}

int run_cli(const std::vector<std::string>& raw_args) {
  CLI::App app{"Linear dynamical topic model: ingestion, training, evaluation, TSC analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersionString);
  app.set_config("--config", "", "Read flags from an INI file (command line overrides it)");

  // --- ingest ---------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Build a corpus snapshot from adoption events");
  std::string in_events, in_stopwords, ingest_out = "corpus.json";
  int min_count = 10;
  ingest->add_option("--events", in_events, "events TSV: user TAB time TAB item [TAB count]")
      ->required();
  ingest->add_option("--stopwords", in_stopwords, "optional stopword list, one token per line");
  ingest->add_option("--min-count", min_count, "drop items with fewer corpus-wide occurrences");
  ingest->add_option("--out", ingest_out, "corpus snapshot path");

  // --- train ----------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Run collapsed Gibbs inference");
  std::string tr_corpus, tr_out = "model.json", tr_trace, tr_mode = "learned";
  std::string tr_gibbs = "vocab";
  ModelConfig base_cfg;
  int tr_holdout = 0, tr_threads = 1;
  std::uint64_t tr_holdout_seed = 0;
  train->add_option("--corpus", tr_corpus, "corpus snapshot from `ingest` or `synth`")->required();
  train->add_option("--topics", base_cfg.topics, "number of topics K");
  train->add_option("--alpha", base_cfg.alpha, "Dirichlet smoothing on theta");
  train->add_option("--beta", base_cfg.beta, "Dirichlet smoothing on phi");
  train->add_option("--iters", base_cfg.iterations, "Gibbs sweeps");
  train->add_option("--mode", tr_mode, "dynamics: identity|half|full|learned");
  train->add_option("--seed", base_cfg.seed, "sampler seed");
  train->add_option("--learn-rate", base_cfg.learn_rate, "decay descent starting step");
  train->add_option("--gd-steps", base_cfg.max_gd_steps, "max descent steps per sweep");
  train->add_option("--gd-tol", base_cfg.gd_tolerance, "descent stopping tolerance");
  train->add_option("--gibbs-denominator", tr_gibbs, "item-factor smoothing: vocab|topic");
  train->add_option("--holdout", tr_holdout, "percent of tokens to hide before training (0-90)");
  train->add_option("--holdout-seed", tr_holdout_seed, "seed of the holdout shuffle");
  train->add_option("--threads", tr_threads, "accepted for symmetry; training is sequential");
  train->add_option("--out", tr_out, "model snapshot path");
  train->add_option("--trace", tr_trace, "optional convergence CSV path");

  // --- eval -----------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Score held-out tokens (ALL@t)");
  std::string ev_corpus, ev_model, ev_out = "all.csv", ev_label;
  int ev_holdout = -1;
  std::uint64_t ev_holdout_seed = 0;
  bool ev_holdout_seed_set = false;
  eval->add_option("--corpus", ev_corpus, "corpus snapshot")->required();
  eval->add_option("--model", ev_model, "model snapshot")->required();
  eval->add_option("--holdout", ev_holdout, "holdout percent (default: model snapshot value)");
  eval->add_option("--holdout-seed", ev_holdout_seed, "holdout shuffle seed (default: snapshot)")
      ->each([&ev_holdout_seed_set](const std::string&) { ev_holdout_seed_set = true; });
  eval->add_option("--label", ev_label, "model column in the CSV (default: model file stem)");
  eval->add_option("--out", ev_out, "output CSV path");

  // --- tsc / ratio ----------------------------------------------------------
  PairRun pr;
  std::string tsc_out = "tsc.tsv";
  auto add_pair_flags = [&pr](CLI::App* cmd) {
    cmd->add_option("--corpus", pr.corpus_path, "corpus snapshot")->required();
    cmd->add_option("--model", pr.model_path, "model snapshot")->required();
    cmd->add_option("--interactions", pr.interactions_path, "interactions TSV")->required();
    cmd->add_option("--hypothesis", pr.hypothesis, "pair construction: AB|AZ|BfAf");
    cmd->add_option("--width", pr.width, "past lags W");
    cmd->add_option("--lookahead", pr.lookahead, "future steps L");
    cmd->add_option("--f-variant", pr.f_variant, "windowed|classical");
    cmd->add_option("--threads", pr.threads, "worker threads over pairs");
    cmd->add_flag("--no-filter-alpha", pr.keep_unfiltered,
                  "keep alphabetically-ordered author lists instead of dropping them");
  };
  auto* tsc = app.add_subcommand("tsc", "Directed temporal social correlation per pair");
  add_pair_flags(tsc);
  tsc->add_option("--out", tsc_out, "output TSV path");

  auto* ratio_cmd = app.add_subcommand("ratio", "Win-rate of the influence direction, by bin");
  std::string ratio_out = "ratio.csv", ratio_label;
  int ratio_min_support = 90;
  add_pair_flags(ratio_cmd);
  ratio_cmd->add_option("--min-support", ratio_min_support,
                        "suppress bins with fewer pairs (0 keeps all)");
  ratio_cmd->add_option("--label", ratio_label, "model column in the CSV");
  ratio_cmd->add_option("--out", ratio_out, "output CSV path");

  // --- synth ----------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a corpus from known parameters");
  int sy_users = 50, sy_steps = 12, sy_topics = 5, sy_items = 200, sy_tokens = 40;
  std::uint64_t sy_seed = 1;
  std::string sy_mu_set = "1.0,0.5,0.0", sy_dir = ".";
  synth->add_option("--users", sy_users, "user count N");
  synth->add_option("--steps", sy_steps, "time steps T");
  synth->add_option("--topics", sy_topics, "topic count K");
  synth->add_option("--items", sy_items, "vocabulary size M");
  synth->add_option("--tokens", sy_tokens, "tokens per user per step");
  synth->add_option("--seed", sy_seed, "generator seed");
  synth->add_option("--mu-set", sy_mu_set, "decay values cycled over users, comma-separated");
  synth->add_option("--out-dir", sy_dir, "directory for corpus.json, truth.json, events.tsv");

  // --- rerun ----------------------------------------------------------------
  auto* rerun = app.add_subcommand("rerun", "Replay a command from its run.json manifest");
  std::string rr_manifest;
  rerun->add_option("--manifest", rr_manifest, "run.json path")->required();

  std::vector<std::string> cli11_args(raw_args.rbegin(), raw_args.rend());
  try {
    app.parse(cli11_args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e);
    }
    std::cerr << "error:usage:" << e.what() << "\n";
    return 2;
  }

  if (ingest->parsed()) {
    PruneRules rules;
    rules.min_count = min_count;
    if (!in_stopwords.empty()) rules.stopwords = read_stopwords_file(in_stopwords);
    const Corpus corpus = ingest_events(read_events_file(in_events), rules);
    save_corpus(ingest_out, corpus);
    manifest_for(ingest_out, "ingest", raw_args);
    std::cout << "users=" << corpus.user_count() << " vocab=" << corpus.vocabulary.size()
              << " tokens=" << corpus.total_tokens() << " t_max=" << corpus.global_max_time()
              << "\n";
    return 0;
  }

  if (train->parsed()) {
    base_cfg.dynamics_mode = parse_dynamics_mode(tr_mode);
    base_cfg.gibbs_normalizer = parse_gibbs_normalizer(tr_gibbs);
    base_cfg.validate();
    if (tr_threads != 1) {
      std::cerr << "note: the sampler is sequential for determinism; --threads ignored\n";
    }
    const Corpus corpus = load_corpus(tr_corpus);
    SplitCorpus split;
    const Corpus* train_on = &corpus;
    if (tr_holdout > 0) {
      const auto splits = make_holdout(corpus, {tr_holdout}, tr_holdout_seed);
      split = apply_holdout(corpus, splits[0]);
      train_on = &split.train;
    }
    const InferenceResult res = run_inference(*train_on, base_cfg);
    ModelSnapshot snap;
    snap.config = base_cfg;
    snap.vocab_hash = vocabulary_hash(corpus.vocabulary);
    snap.holdout_level = tr_holdout;
    snap.holdout_seed = tr_holdout_seed;
    snap.x_post = res.params.x_post;
    snap.dynamics = res.dynamics;
    snap.xi = res.state.xi;
    snap.loglik_trace = res.loglik_trace;
    save_model(tr_out, snap);
    if (!tr_trace.empty()) {
      auto out = open_out(tr_trace);
      write_convergence_csv(out, res.loglik_trace, stem_of(tr_out),
                            dynamics_mode_name(base_cfg.dynamics_mode));
    }
    manifest_for(tr_out, "train", raw_args);
    std::cout << "sweeps=" << res.loglik_trace.size() << " final_loglik="
              << format_double(res.loglik_trace.empty() ? 0.0 : res.loglik_trace.back()) << "\n";
    return 0;
  }

  if (eval->parsed()) {
    const ModelSnapshot snap = load_model(ev_model);
    const Corpus corpus = load_corpus_checked(ev_corpus, snap);
    const int level = ev_holdout >= 0 ? ev_holdout : snap.holdout_level;
    const std::uint64_t seed = ev_holdout_seed_set ? ev_holdout_seed : snap.holdout_seed;
    if (level <= 0) {
      throw ConfigError("model was trained without a holdout; pass --holdout/--holdout-seed");
    }
    const auto splits = make_holdout(corpus, {level}, seed);
    const SplitCorpus split = apply_holdout(corpus, splits[0]);
    const auto points = all_at_t(snap.theta(), snap.phi(), split.heldout);
    auto out = open_out(ev_out);
    write_all_csv(out, points, ev_label.empty() ? stem_of(ev_model) : ev_label,
                  dynamics_mode_name(snap.config.dynamics_mode));
    manifest_for(ev_out, "eval", raw_args);
    std::cout << "points=" << points.size() << " hidden=" << split.heldout.size() << "\n";
    return 0;
  }

  if (tsc->parsed() || ratio_cmd->parsed()) {
    int skipped = 0;
    const auto outcomes = run_pairs(pr, &skipped);
    if (tsc->parsed()) {
      auto out = open_out(tsc_out);
      write_tsc_tsv(out, outcomes);
      manifest_for(tsc_out, "tsc", raw_args);
    } else {
      const auto points = ratio(outcomes, ratio_min_support);
      auto out = open_out(ratio_out);
      write_ratio_csv(out, points, ratio_label.empty() ? stem_of(pr.model_path) : ratio_label,
                      hypothesis_name(parse_hypothesis(pr.hypothesis)));
      manifest_for(ratio_out, "ratio", raw_args);
      std::cout << "overall_ratio=" << format_double(overall_ratio(outcomes)) << " bins="
                << points.size() << "\n";
    }
    std::cout << "pairs=" << outcomes.size() << " skipped=" << skipped << "\n";
    return 0;
  }

  if (synth->parsed()) {
    const GroundTruth truth =
        make_heterogeneous_truth(sy_users, sy_steps, sy_topics, sy_items, sy_tokens,
                                 derive_seed(sy_seed, 1), parse_double_list(sy_mu_set));
    const SynthCorpus sc = generate_corpus(truth, sy_steps, derive_seed(sy_seed, 2));
    fs::create_directories(sy_dir);
    const fs::path dir(sy_dir);
    save_corpus((dir / "corpus.json").string(), sc.corpus);
    save_ground_truth((dir / "truth.json").string(), truth);
    {
      auto out = open_out((dir / "events.tsv").string());
      write_events_tsv(out, corpus_to_events(sc.corpus));
    }
    write_manifest((dir / "run.json").string(), "synth", raw_args);
    std::cout << "users=" << sc.corpus.user_count() << " vocab=" << sc.corpus.vocabulary.size()
              << " tokens=" << sc.corpus.total_tokens() << "\n";
    return 0;
  }

  if (rerun->parsed()) {
    std::ifstream in(rr_manifest);
    if (!in) throw SnapshotError("cannot open " + rr_manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw SnapshotError(rr_manifest + ": " + e.what());
    }
    if (j.value("format", "") != "ldtm-run") throw SnapshotError(rr_manifest + ": not a manifest");
    const auto args = j.at("args").get<std::vector<std::string>>();
    if (!args.empty() && args[0] == "rerun") throw ConfigError("manifest records a rerun");
    return run_cli(args);
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const Error& e) {
    std::cerr << "error:" << category_tag(e.category()) << ":" << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error:numeric:" << e.what() << "\n";
    return 4;
  }
}
