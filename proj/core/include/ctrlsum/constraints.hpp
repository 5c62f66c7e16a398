#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlsum/bin_table.hpp"
#include "ctrlsum/cloze.hpp"
#include "ctrlsum/vocabulary.hpp"

namespace ctrlsum {

enum class Task { kLength, kEntity, kAbstractiveness };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

/// What the user asks for: a length bin, an abstractiveness bin, or a list of
/// entities, matching the task.
class ControlRequest {
 public:
  static ControlRequest length(int bin);
  static ControlRequest abstractiveness(int bin);
  static ControlRequest entities(std::vector<TokenId> entities);

  Task task() const { return task_; }
  /// Target bin for length and abstractiveness requests.
  int bin() const;
  const std::vector<TokenId>& entity_list() const;

  friend bool operator==(const ControlRequest&, const ControlRequest&) = default;

 private:
  Task task_ = Task::kLength;
  int bin_ = 0;
  std::vector<TokenId> entities_;
};

enum class CostKind { kLengthBinDistance, kAbsBinDistance, kRepeat3, kQaNegF1, kEntityRepetition, kConjunction };

std::string_view to_string(CostKind kind);

struct Constraint {
  CostKind kind;
  double threshold;
};

/// Ordered constraints for one task. Cost vectors and multipliers share this
/// order:
///   length:           length_bin_distance, repeat3
///   entity:           qa_negf1, repeat3, entity_repetition
///   abstractiveness:  abs_bin_distance, repeat3, conjunction
struct ConstraintSet {
  Task task;
  std::vector<Constraint> constraints;

  std::size_t size() const { return constraints.size(); }
  std::vector<double> thresholds() const;

  static ConstraintSet for_task(Task task);
};

/// |generated - target| / 10.
double length_bin_cost(int generated_bin, int target_bin);
/// |generated - target| / 3.
double abs_bin_cost(int generated_bin, int target_bin);

/// Largest value each cost can take; assigned to empty rollouts.
double max_cost(CostKind kind);
std::vector<double> max_costs(const ConstraintSet& set);

/// Everything cost evaluation needs beyond the sequences themselves.
struct CostContext {
  const Vocabulary* vocab = nullptr;
  const BinTable* table = nullptr;
  AnswerOracle oracle;
};

/// Cost vector in constraint-set order. Throws std::invalid_argument for an
/// empty summary or a request that does not match the set's task.
std::vector<double> evaluate_costs(const CostContext& ctx, TokenSpan document, TokenSpan summary,
                                   TokenSpan reference, const ControlRequest& request, const ConstraintSet& set);

/// Entry i is true when cost i exceeds its threshold.
std::vector<bool> violations(std::span<const double> costs, const ConstraintSet& set);

}  // namespace ctrlsum
