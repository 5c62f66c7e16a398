#pragma once

#include <stdexcept>
#include <string>

namespace ctrlsum {

/// Invalid configuration: bad keys, dimension mismatches, infeasible specs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (corpus records, checkpoints, samples
/// that cannot be used for a task).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite parameters or values detected during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctrlsum
