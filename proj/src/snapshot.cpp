#include "ldtm/snapshot.hpp"

#include <fstream>

#include <json.hpp>

namespace ldtm {
namespace {

using json = nlohmann::ordered_json;

json parse_file(const std::string& path, const char* format, int version) {
  std::ifstream in(path);
  if (!in) throw SnapshotError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SnapshotError(path + ": " + e.what());
  }
  if (j.value("format", "") != format) {
    throw SnapshotError(path + ": expected format '" + format + "'");
  }
  if (j.value("version", -1) != version) {
    throw SnapshotError(path + ": unsupported version");
  }
  return j;
}

void dump_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("cannot write " + path);
  out << j.dump(1, '\t') << '\n';
  if (!out) throw SnapshotError("write failed: " + path);
}

template <typename T>
T pull(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw SnapshotError(path + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SnapshotError(path + ": key '" + key + "': " + e.what());
  }
}

}  // namespace

TopicSeries ModelSnapshot::theta() const {
  TopicSeries series;
  series.theta.reserve(x_post.size());
  for (const auto& user : x_post) {
    std::vector<std::vector<double>> rows;
    rows.reserve(user.size());
    for (const auto& x : user) rows.push_back(expected_distribution(x, config.alpha));
    series.theta.push_back(std::move(rows));
  }
  return series;
}

PhiMatrix ModelSnapshot::phi() const {
  if (xi.empty()) throw SnapshotError("model snapshot has no topic-item counts");
  TopicState state;
  state.xi = xi;
  state.xi_row_sum.reserve(xi.size());
  for (const auto& row : xi) {
    long long sum = 0;
    for (long long v : row) sum += v;
    state.xi_row_sum.push_back(sum);
  }
  return make_phi(state, static_cast<int>(xi[0].size()), config.beta);
}

std::uint64_t vocabulary_hash(const Vocabulary& vocab) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& token : vocab.tokens()) {
    for (unsigned char c : token) mix(c);
    mix('\n');
  }
  return h;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  json j;
  j["format"] = "ldtm-corpus";
  j["version"] = 1;
  j["users"] = corpus.user_ids;
  j["vocabulary"] = corpus.vocabulary.tokens();
  j["tokens"] = corpus.tokens;
  dump_file(path, j);
}

Corpus load_corpus(const std::string& path) {
  const json j = parse_file(path, "ldtm-corpus", 1);
  Corpus corpus;
  corpus.user_ids = pull<std::vector<std::string>>(j, "users", path);
  for (const auto& token : pull<std::vector<std::string>>(j, "vocabulary", path)) {
    corpus.vocabulary.add(token);
  }
  corpus.tokens = pull<std::vector<std::vector<std::vector<int>>>>(j, "tokens", path);
  if (corpus.tokens.size() != corpus.user_ids.size()) {
    throw SnapshotError(path + ": token array does not match user list");
  }
  const int vocab = corpus.vocabulary.size();
  for (const auto& user : corpus.tokens) {
    for (const auto& step : user) {
      for (int item : step) {
        if (item < 0 || item >= vocab) throw SnapshotError(path + ": token index out of range");
      }
    }
  }
  corpus.rebuild_user_index();
  return corpus;
}

void save_model(const std::string& path, const ModelSnapshot& snapshot) {
  json j;
  j["format"] = "ldtm-model";
  j["version"] = 1;
  json cfg;
  cfg["topics"] = snapshot.config.topics;
  cfg["alpha"] = snapshot.config.alpha;
  cfg["beta"] = snapshot.config.beta;
  cfg["iterations"] = snapshot.config.iterations;
  cfg["mode"] = dynamics_mode_name(snapshot.config.dynamics_mode);
  cfg["seed"] = snapshot.config.seed;
  cfg["learn_rate"] = snapshot.config.learn_rate;
  cfg["max_gd_steps"] = snapshot.config.max_gd_steps;
  cfg["gd_tolerance"] = snapshot.config.gd_tolerance;
  cfg["gibbs_denominator"] = gibbs_normalizer_name(snapshot.config.gibbs_normalizer);
  j["config"] = cfg;
  j["vocab_hash"] = snapshot.vocab_hash;
  j["holdout_level"] = snapshot.holdout_level;
  j["holdout_seed"] = snapshot.holdout_seed;
  j["loglik_trace"] = snapshot.loglik_trace;
  j["x_post"] = snapshot.x_post;
  j["mu"] = snapshot.dynamics.mu;
  j["xi"] = snapshot.xi;
  dump_file(path, j);
}

ModelSnapshot load_model(const std::string& path) {
  const json j = parse_file(path, "ldtm-model", 1);
  ModelSnapshot snap;
  if (!j.contains("config")) throw SnapshotError(path + ": missing key 'config'");
  const json& cfg = j.at("config");
  snap.config.topics = pull<int>(cfg, "topics", path);
  snap.config.alpha = pull<double>(cfg, "alpha", path);
  snap.config.beta = pull<double>(cfg, "beta", path);
  snap.config.iterations = pull<int>(cfg, "iterations", path);
  snap.config.dynamics_mode = parse_dynamics_mode(pull<std::string>(cfg, "mode", path));
  snap.config.seed = pull<std::uint64_t>(cfg, "seed", path);
  snap.config.learn_rate = pull<double>(cfg, "learn_rate", path);
  snap.config.max_gd_steps = pull<int>(cfg, "max_gd_steps", path);
  snap.config.gd_tolerance = pull<double>(cfg, "gd_tolerance", path);
  snap.config.gibbs_normalizer =
      parse_gibbs_normalizer(pull<std::string>(cfg, "gibbs_denominator", path));
  snap.vocab_hash = pull<std::uint64_t>(j, "vocab_hash", path);
  snap.holdout_level = pull<int>(j, "holdout_level", path);
  snap.holdout_seed = pull<std::uint64_t>(j, "holdout_seed", path);
  snap.loglik_trace = pull<std::vector<double>>(j, "loglik_trace", path);
  snap.x_post = pull<std::vector<std::vector<std::vector<double>>>>(j, "x_post", path);
  snap.dynamics.mu = pull<std::vector<std::vector<std::vector<double>>>>(j, "mu", path);
  snap.xi = pull<std::vector<std::vector<long long>>>(j, "xi", path);
  return snap;
}

void save_ground_truth(const std::string& path, const GroundTruth& truth) {
  json j;
  j["format"] = "ldtm-truth";
  j["version"] = 1;
  j["tokens_per_step"] = truth.tokens_per_step;
  j["seed_concentration"] = truth.seed_concentration;
  j["draw_smoothing"] = truth.draw_smoothing;
  j["phi_true"] = truth.phi_true;
  j["theta_seed"] = truth.theta_seed;
  j["mu_true"] = truth.mu_true;
  dump_file(path, j);
}

GroundTruth load_ground_truth(const std::string& path) {
  const json j = parse_file(path, "ldtm-truth", 1);
  GroundTruth truth;
  truth.tokens_per_step = pull<int>(j, "tokens_per_step", path);
  truth.seed_concentration = pull<double>(j, "seed_concentration", path);
  truth.draw_smoothing = pull<double>(j, "draw_smoothing", path);
  truth.phi_true = pull<std::vector<std::vector<double>>>(j, "phi_true", path);
  truth.theta_seed = pull<std::vector<std::vector<double>>>(j, "theta_seed", path);
  truth.mu_true = pull<std::vector<std::vector<std::vector<double>>>>(j, "mu_true", path);
  truth.validate();
  return truth;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& args) {
  json j;
  j["format"] = "ldtm-run";
  j["version"] = 1;
  j["tool_version"] = kVersionString;
  j["command"] = command;
  j["args"] = args;
  dump_file(path, j);
}

}  // namespace ldtm
