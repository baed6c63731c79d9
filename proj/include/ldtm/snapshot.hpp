#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldtm/corpus.hpp"
#include "ldtm/model.hpp"
#include "ldtm/synth.hpp"

namespace ldtm {

inline constexpr const char* kVersionString = "0.1.0";

// 64-bit FNV-1a over the vocabulary tokens joined by newline in index
// order, used to detect corpus/model mismatches.
std::uint64_t vocabulary_hash(const Vocabulary& vocab);

// Persists the sufficient state (x_post, mu, xi); theta and phi are derived
// views, so the file never stores redundant probability tables.
struct ModelSnapshot {
  ModelConfig config;
  std::uint64_t vocab_hash = 0;
  int holdout_level = 0;           // percent of tokens hidden during training; 0 = none
  std::uint64_t holdout_seed = 0;  // seed of the split the model was trained against
  std::vector<std::vector<std::vector<double>>> x_post;  // [n][t-1][k]
  DynamicsMatrix dynamics;
  std::vector<std::vector<long long>> xi;  // [k][m]
  std::vector<double> loglik_trace;

  TopicSeries theta() const;
  PhiMatrix phi() const;
};

void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

void save_model(const std::string& path, const ModelSnapshot& snapshot);
ModelSnapshot load_model(const std::string& path);

void save_ground_truth(const std::string& path, const GroundTruth& truth);
GroundTruth load_ground_truth(const std::string& path);

// run.json manifest: the exact command line plus version, written next to
// every command's outputs so any run can be replayed from the manifest alone.
void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& args);

}  // namespace ldtm
