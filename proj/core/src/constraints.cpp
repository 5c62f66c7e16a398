#include "ctrlsum/constraints.hpp"

#include <cmath>
#include <stdexcept>

#include "ctrlsum/error.hpp"
#include "ctrlsum/metrics.hpp"

namespace ctrlsum {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kLength: return "length";
    case Task::kEntity: return "entity";
    case Task::kAbstractiveness: return "abstractiveness";
  }
  return "unknown";
}

Task task_from_string(std::string_view name) {
  if (name == "length") return Task::kLength;
  if (name == "entity") return Task::kEntity;
  if (name == "abstractiveness" || name == "abs") return Task::kAbstractiveness;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected length, entity, abstractiveness)");
}

ControlRequest ControlRequest::length(int bin) {
  if (bin < 1 || bin > kLengthBins) throw ConfigError("length bin out of range: " + std::to_string(bin));
  ControlRequest r;
  r.task_ = Task::kLength;
  r.bin_ = bin;
  return r;
}

ControlRequest ControlRequest::abstractiveness(int bin) {
  if (bin < 1 || bin > kAbstractivenessBins) {
    throw ConfigError("abstractiveness bin out of range: " + std::to_string(bin));
  }
  ControlRequest r;
  r.task_ = Task::kAbstractiveness;
  r.bin_ = bin;
  return r;
}

ControlRequest ControlRequest::entities(std::vector<TokenId> entities) {
  if (entities.empty()) throw ConfigError("entity request needs at least one entity");
  ControlRequest r;
  r.task_ = Task::kEntity;
  r.entities_ = std::move(entities);
  return r;
}

int ControlRequest::bin() const {
  if (task_ == Task::kEntity) throw std::logic_error("entity request has no target bin");
  return bin_;
}

const std::vector<TokenId>& ControlRequest::entity_list() const {
  if (task_ != Task::kEntity) throw std::logic_error("bin request has no entity list");
  return entities_;
}

std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::kLengthBinDistance: return "length_bin_distance";
    case CostKind::kAbsBinDistance: return "abs_bin_distance";
    case CostKind::kRepeat3: return "repeat3";
    case CostKind::kQaNegF1: return "qa_negf1";
    case CostKind::kEntityRepetition: return "entity_repetition";
    case CostKind::kConjunction: return "conjunction";
  }
  return "unknown";
}

std::vector<double> ConstraintSet::thresholds() const {
  std::vector<double> out;
  out.reserve(constraints.size());
  for (const auto& c : constraints) out.push_back(c.threshold);
  return out;
}

ConstraintSet ConstraintSet::for_task(Task task) {
  switch (task) {
    case Task::kLength:
      return {task, {{CostKind::kLengthBinDistance, 0.0}, {CostKind::kRepeat3, 0.0}}};
    case Task::kEntity:
      return {task, {{CostKind::kQaNegF1, -0.9}, {CostKind::kRepeat3, 0.0}, {CostKind::kEntityRepetition, 0.0}}};
    case Task::kAbstractiveness:
      return {task, {{CostKind::kAbsBinDistance, 0.0}, {CostKind::kRepeat3, 0.0}, {CostKind::kConjunction, 0.0}}};
  }
  throw std::logic_error("unhandled task");
}

double length_bin_cost(int generated_bin, int target_bin) {
  return std::abs(generated_bin - target_bin) / static_cast<double>(kLengthBins);
}

double abs_bin_cost(int generated_bin, int target_bin) {
  return std::abs(generated_bin - target_bin) / static_cast<double>(kAbstractivenessBins);
}

double max_cost(CostKind kind) {
  switch (kind) {
    case CostKind::kLengthBinDistance: return length_bin_cost(1, kLengthBins);
    case CostKind::kAbsBinDistance: return abs_bin_cost(1, kAbstractivenessBins);
    case CostKind::kRepeat3: return 1.0;
    case CostKind::kQaNegF1: return 0.0;
    case CostKind::kEntityRepetition: return 1.0;
    case CostKind::kConjunction: return 1.0;
  }
  return 0.0;
}

std::vector<double> max_costs(const ConstraintSet& set) {
  std::vector<double> out;
  for (const auto& c : set.constraints) out.push_back(max_cost(c.kind));
  return out;
}

std::vector<double> evaluate_costs(const CostContext& ctx, TokenSpan document, TokenSpan summary,
                                   TokenSpan reference, const ControlRequest& request, const ConstraintSet& set) {
  if (summary.empty()) throw std::invalid_argument("evaluate_costs: empty summary");
  if (request.task() != set.task) throw std::invalid_argument("evaluate_costs: request does not match task");
  std::vector<double> costs;
  costs.reserve(set.size());
  for (const auto& c : set.constraints) {
    switch (c.kind) {
      case CostKind::kLengthBinDistance:
        costs.push_back(length_bin_cost(metrics::length_bin_of(summary.size(), *ctx.table), request.bin()));
        break;
      case CostKind::kAbsBinDistance:
        costs.push_back(abs_bin_cost(
            metrics::abstractiveness_bin(metrics::extractive_density(document, summary)), request.bin()));
        break;
      case CostKind::kRepeat3:
        costs.push_back(metrics::repeat_ratio(summary, 3));
        break;
      case CostKind::kQaNegF1: {
        const auto items = make_cloze_items(*ctx.vocab, reference, request.entity_list(), reference);
        if (items.empty()) throw DataError("reference mentions none of the requested entities");
        costs.push_back(-qa_f1(*ctx.vocab, items, summary, ctx.oracle));
        break;
      }
      case CostKind::kEntityRepetition:
        costs.push_back(metrics::entity_repetition_fraction(summary, request.entity_list()));
        break;
      case CostKind::kConjunction:
        costs.push_back(metrics::conjunction_indicator(summary, reference));
        break;
    }
  }
  return costs;
}

std::vector<bool> violations(std::span<const double> costs, const ConstraintSet& set) {
  if (costs.size() != set.size()) throw ConfigError("cost vector size does not match constraint set");
  std::vector<bool> out;
  for (std::size_t i = 0; i < costs.size(); ++i) out.push_back(costs[i] > set.constraints[i].threshold);
  return out;
}

}  // namespace ctrlsum
