#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctrlsum/bin_table.hpp"
#include "ctrlsum/constraints.hpp"
#include "ctrlsum/policy.hpp"
#include "ctrlsum/vocabulary.hpp"

namespace ctrlsum {

inline constexpr int kCheckpointFormatVersion = 1;

/// Everything needed to resume training or decode: a JSON document holding
/// format_version, task, mode, iteration, vocabulary, bin table, policy
/// dimensions, the flat parameter array (order documented in policy.hpp),
/// and the multiplier vector.
struct Checkpoint {
  Task task = Task::kLength;
  std::string mode;  // ml, cmdp, or mdp
  long iteration = 0;
  Vocabulary vocab;
  std::optional<BinTable> bin_table;
  PolicyParams params{PolicyDims{}};
  std::vector<double> lambda;
};

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ctrlsum
