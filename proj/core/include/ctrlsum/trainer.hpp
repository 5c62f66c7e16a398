#pragma once

// Maximum-likelihood pretraining and the two reinforcement fine-tuning
// schemes: the Lagrangian (CMDP) trainer with learned multipliers, and the
// fixed-weight penalty (MDP) baseline. Both use the reward of the greedy
// decode as a self-critical baseline.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctrlsum/bin_table.hpp"
#include "ctrlsum/cloze.hpp"
#include "ctrlsum/constraints.hpp"
#include "ctrlsum/corpus.hpp"
#include "ctrlsum/policy.hpp"

namespace ctrlsum {

enum class TrainMode { kMl, kCmdp, kMdp };
std::string_view to_string(TrainMode mode);
TrainMode train_mode_from_string(std::string_view name);

struct TrainingConfig {
  Task task = Task::kLength;
  TrainMode mode = TrainMode::kCmdp;
  double policy_lr = 5e-5;   // reinforcement fine-tuning step size
  double ml_lr = 1e-3;       // maximum-likelihood step size
  double lambda_lr = 1e-2;
  double lambda_init = 0.01;
  double clip_norm = 5.0;    // global L2 clip on each policy update
  int batch_size = 16;
  int iterations = 1000;     // reinforcement updates
  int ml_epochs = 10;
  int checkpoint_interval = 10;
  int max_len = 40;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Lagrange multipliers, one per constraint, kept non-negative.
struct LagrangianState {
  std::vector<double> lambda;

  static LagrangianState initial(const ConstraintSet& set, double value);
};

/// Penalty weights for the fixed-weight baseline, one per constraint in
/// constraint-set order. The scalar reward is r - sum_j gamma_j c_j, so the
/// negated QA-F1 cost turns into a positive QA-F1 bonus.
struct MdpWeights {
  std::vector<double> gamma;

  /// Weights reported for the full-scale systems: length (0.4, 0.6), entity
  /// (0.15, 0.4, 0.5), abstractiveness on a balanced corpus (0.4, 0.5, 0.3).
  static MdpWeights reported(Task task);
  void validate(const ConstraintSet& set) const;
};

/// A corpus sample prepared for one task: its control request and, for the
/// entity task, the entity-filtered reference.
struct TaskSample {
  const CorpusSample* source = nullptr;
  TokenSeq reference;
  ControlRequest request = ControlRequest::length(1);
};

/// The request each sample trains with (the reference's own bin or
/// entities). Entity-task samples without usable entities are skipped.
std::vector<TaskSample> prepare_task_samples(Task task, const std::vector<CorpusSample>& samples,
                                             const BinTable& table);

struct Trajectory {
  const TaskSample* sample = nullptr;
  Rollout sampled;
  Rollout greedy;
  double reward = 0.0;    // lcs_f1 of the sampled summary
  double baseline = 0.0;  // lcs_f1 of the greedy summary
  std::vector<double> costs;
  std::vector<double> greedy_costs;
};

struct TrajectoryBatch {
  std::vector<Trajectory> items;
  std::vector<double> mean_costs() const;
  double mean_reward() const;
};

/// Rewards, costs, and baselines for one rollout pair.
struct Environment {
  CostContext costs;
  ConstraintSet set;

  Trajectory score(const TaskSample& sample, Rollout sampled, Rollout greedy) const;
  std::vector<double> evaluate(const TaskSample& sample, TokenSpan summary) const;
};

/// Samples and greedy-decodes every task sample; rollout i uses seed
/// `seed_base + i`.
TrajectoryBatch collect_batch(const PolicyParams& params, const Environment& env,
                              std::span<const TaskSample* const> samples, std::uint64_t seed_base, int max_len);

/// Scales `g` down to `max_norm` if its L2 norm is larger.
void clip_global_norm(Eigen::VectorXd& g, double max_norm);

/// Batch-mean of grad log pi(y) * (r - lambda.c - b), before clipping.
Eigen::VectorXd cmdp_policy_gradient(const PolicyParams& params, const LagrangianState& lambda,
                                     const TrajectoryBatch& batch);

/// One Lagrangian step: theta += policy_lr * clip(gradient); then
/// lambda = max(0, lambda + lambda_lr * (mean_cost - threshold)).
void cmdp_update(PolicyParams& params, LagrangianState& lambda, const TrajectoryBatch& batch,
                 const ConstraintSet& set, const TrainingConfig& config);

/// Batch-mean of grad log pi(y) * (R(y) - R(greedy)) with R = r - gamma.c.
Eigen::VectorXd mdp_policy_gradient(const PolicyParams& params, const TrajectoryBatch& batch,
                                    const MdpWeights& weights);

void mdp_update(PolicyParams& params, const TrajectoryBatch& batch, const MdpWeights& weights,
                const TrainingConfig& config);

/// Mean per-sample log-likelihood of the references after each epoch.
struct PretrainResult {
  std::vector<double> epoch_loglik;
};

/// Minibatch gradient ascent on the reference log-likelihood (references
/// scored with a trailing <eos>).
PretrainResult ml_pretrain(PolicyParams& params, std::span<const TaskSample> samples, const TrainingConfig& config);

double mean_loglik(const PolicyParams& params, std::span<const TaskSample> samples);

/// One row of the training trace, aggregated over a checkpoint interval.
struct TraceRecord {
  long iteration = 0;
  double mean_reward = 0.0;
  std::vector<double> mean_costs;
  std::vector<double> lambda;  // after the last update of the interval
  std::vector<double> violation_rate;
};

/// Per-update detail kept in memory alongside the interval trace.
struct UpdateRecord {
  std::vector<double> lambda_before;
  std::vector<double> lambda_after;
  std::vector<double> batch_mean_costs;
};

struct TrainingTrace {
  std::vector<TraceRecord> records;
  std::vector<UpdateRecord> updates;
};

std::string trace_csv_header(std::size_t constraints);
std::string trace_csv_row(const TraceRecord& record);
std::string trace_to_csv(const TrainingTrace& trace, std::size_t constraints);

/// Reinforcement fine-tuning loop (CMDP or MDP per config.mode). Each
/// iteration draws a batch uniformly from `samples`, collects rollouts,
/// applies the update, and checks every parameter is finite (NumericError
/// names the first bad entry). `on_record` is called per trace record.
struct TrainResult {
  TrainingTrace trace;
  LagrangianState lambda;
};
TrainResult train(PolicyParams& params, std::span<const TaskSample> samples, const Environment& env,
                  const TrainingConfig& config, std::optional<MdpWeights> weights = std::nullopt,
                  std::optional<LagrangianState> initial_lambda = std::nullopt,
                  const std::function<void(const TraceRecord&)>& on_record = {});

}  // namespace ctrlsum
