#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctrlsum/cloze.hpp"
#include "ctrlsum/corpus.hpp"
#include "ctrlsum/policy.hpp"
#include "ctrlsum/trainer.hpp"

namespace ctrlsum::cli {

// Settings shared by every command. Stored on disk as nested JSON:
//
//   { "task": "length", "seed": 1, "out": "run", "data": "corpus",
//     "checkpoint": null, "split": "test",
//     "corpus":   { "train_samples": 2000, ..., "abs_mix": [1, 0, 0] },
//     "policy":   { "embed": 16, "control": 16, "hidden": 32, "init_scale": 0.1 },
//     "training": { "mode": "cmdp", "policy_lr": 5e-05, ... },
//     "mdp_gamma": null,
//     "oracle":   { "window": 5, "min_score": 1 },
//     "evaluation": { "all_length_bins": false } }
//
// Unknown keys anywhere are rejected.
struct RunConfig {
  Task task = Task::kLength;
  std::uint64_t seed = 1;
  std::filesystem::path out = "run";
  std::filesystem::path data = "corpus";
  std::optional<std::filesystem::path> checkpoint;
  std::string split = "test";

  CorpusSpec corpus;
  int train_samples = 2000;
  int valid_samples = 200;
  int test_samples = 400;

  int embed = 16;
  int control = 16;
  int hidden = 32;
  double init_scale = 0.1;

  TrainingConfig training;
  std::optional<std::vector<double>> mdp_gamma;  // defaults to the reported weights
  AnswerOracle oracle;
  bool all_length_bins = false;

  /// Throws ConfigError on the first invalid field.
  void validate() const;

  PolicyDims dims(int vocab_size) const;
  MdpWeights weights() const;
};

std::string config_to_json(const RunConfig& config);

/// Parses a full or partial document over the defaults.
RunConfig config_from_json(const std::string& text);

/// Reads `path` (if any), applies each "dotted.key=value" override in order,
/// and parses the result. Values are read as JSON when they parse, otherwise
/// as plain strings.
RunConfig resolve_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides);

}  // namespace ctrlsum::cli
