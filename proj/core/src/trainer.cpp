#include "ctrlsum/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ctrlsum/error.hpp"
#include "ctrlsum/metrics.hpp"
#include "ctrlsum/rng.hpp"

namespace ctrlsum {

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kMl: return "ml";
    case TrainMode::kCmdp: return "cmdp";
    case TrainMode::kMdp: return "mdp";
  }
  return "unknown";
}

TrainMode train_mode_from_string(std::string_view name) {
  if (name == "ml") return TrainMode::kMl;
  if (name == "cmdp") return TrainMode::kCmdp;
  if (name == "mdp") return TrainMode::kMdp;
  throw ConfigError("unknown training mode '" + std::string(name) + "' (expected ml, cmdp, mdp)");
}

void TrainingConfig::validate() const {
  if (!(policy_lr > 0.0) || !(ml_lr > 0.0) || !(lambda_lr > 0.0)) throw ConfigError("learning rates must be > 0");
  if (!(lambda_init >= 0.0)) throw ConfigError("lambda_init must be >= 0");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (iterations < 0 || ml_epochs < 0) throw ConfigError("iterations and ml_epochs must be >= 0");
  if (checkpoint_interval < 1) throw ConfigError("checkpoint_interval must be >= 1");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
}

LagrangianState LagrangianState::initial(const ConstraintSet& set, double value) {
  return {std::vector<double>(set.size(), value)};
}

MdpWeights MdpWeights::reported(Task task) {
  switch (task) {
    case Task::kLength: return {{0.4, 0.6}};
    case Task::kEntity: return {{0.15, 0.4, 0.5}};
    case Task::kAbstractiveness: return {{0.4, 0.5, 0.3}};
  }
  throw std::logic_error("unhandled task");
}

void MdpWeights::validate(const ConstraintSet& set) const {
  if (gamma.size() != set.size()) {
    throw ConfigError("MDP weights: expected " + std::to_string(set.size()) + " weights, got " +
                      std::to_string(gamma.size()));
  }
  for (const double g : gamma) {
    if (!(g >= 0.0)) throw ConfigError("MDP weights must be non-negative");
  }
}

std::vector<TaskSample> prepare_task_samples(Task task, const std::vector<CorpusSample>& samples,
                                             const BinTable& table) {
  std::vector<TaskSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    TaskSample ts;
    ts.source = &s;
    switch (task) {
      case Task::kLength:
        ts.reference = s.reference;
        ts.request = ControlRequest::length(metrics::length_bin_of(s.reference.size(), table));
        break;
      case Task::kAbstractiveness:
        ts.reference = s.reference;
        ts.request = ControlRequest::abstractiveness(
            metrics::abstractiveness_bin(metrics::extractive_density(s.document, s.reference)));
        break;
      case Task::kEntity: {
        const auto filtered = filter_reference_for_entities(s, table);
        if (!filtered) continue;
        ts.reference = filtered->reference;
        ts.request = ControlRequest::entities(filtered->entities);
        break;
      }
    }
    out.push_back(std::move(ts));
  }
  return out;
}

std::vector<double> TrajectoryBatch::mean_costs() const {
  if (items.empty()) return {};
  std::vector<double> mean(items.front().costs.size(), 0.0);
  for (const auto& t : items) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t.costs[i];
  }
  for (auto& m : mean) m /= static_cast<double>(items.size());
  return mean;
}

double TrajectoryBatch::mean_reward() const {
  if (items.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : items) sum += t.reward;
  return sum / static_cast<double>(items.size());
}

std::vector<double> Environment::evaluate(const TaskSample& sample, TokenSpan summary) const {
  if (summary.empty()) return max_costs(set);
  return evaluate_costs(costs, sample.source->document, summary, sample.reference, sample.request, set);
}

Trajectory Environment::score(const TaskSample& sample, Rollout sampled, Rollout greedy) const {
  Trajectory t;
  t.sample = &sample;
  t.sampled = std::move(sampled);
  t.greedy = std::move(greedy);
  t.reward = metrics::lcs_f1(t.sampled.summary(), sample.reference);
  t.baseline = metrics::lcs_f1(t.greedy.summary(), sample.reference);
  t.costs = evaluate(sample, t.sampled.summary());
  t.greedy_costs = evaluate(sample, t.greedy.summary());
  return t;
}

TrajectoryBatch collect_batch(const PolicyParams& params, const Environment& env,
                              std::span<const TaskSample* const> samples, std::uint64_t seed_base, int max_len) {
  TrajectoryBatch batch;
  batch.items.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const TaskSample& s = *samples[i];
    auto sampled = sample(params, s.source->document, s.request, seed_base + i, max_len);
    auto decoded = greedy(params, s.source->document, s.request, max_len);
    batch.items.push_back(env.score(s, std::move(sampled), std::move(decoded)));
  }
  return batch;
}

void clip_global_norm(Eigen::VectorXd& g, double max_norm) {
  const double norm = g.norm();
  if (norm > max_norm) g *= max_norm / norm;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

template <typename Advantage>
Eigen::VectorXd weighted_score_function(const PolicyParams& params, const TrajectoryBatch& batch,
                                        Advantage&& advantage) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params.flat().size());
  if (batch.items.empty()) return g;
  for (const auto& t : batch.items) {
    const double a = advantage(t);
    if (a == 0.0) continue;
    const auto lg = logprob_grad(params, t.sample->source->document, t.sample->request, t.sampled.tokens);
    g.noalias() += a * lg.gradient;
  }
  g /= static_cast<double>(batch.items.size());
  return g;
}

void check_finite(const PolicyParams& params) {
  if (const auto bad = params.first_non_finite()) throw NumericError("non-finite policy parameter: " + *bad);
}

}  // namespace

Eigen::VectorXd cmdp_policy_gradient(const PolicyParams& params, const LagrangianState& lambda,
                                     const TrajectoryBatch& batch) {
  for (const auto& t : batch.items) {
    if (t.costs.size() != lambda.lambda.size()) throw ConfigError("multiplier and cost dimensions differ");
  }
  return weighted_score_function(params, batch, [&](const Trajectory& t) {
    return t.reward - dot(lambda.lambda, t.costs) - t.baseline;
  });
}

void cmdp_update(PolicyParams& params, LagrangianState& lambda, const TrajectoryBatch& batch,
                 const ConstraintSet& set, const TrainingConfig& config) {
  if (lambda.lambda.size() != set.size()) throw ConfigError("multiplier and constraint dimensions differ");
  for (const double l : lambda.lambda) {
    if (l < 0.0) throw ConfigError("multipliers must be non-negative before an update");
  }
  Eigen::VectorXd g = cmdp_policy_gradient(params, lambda, batch);
  clip_global_norm(g, config.clip_norm);
  params.flat().noalias() += config.policy_lr * g;

  const auto mean = batch.mean_costs();
  for (std::size_t i = 0; i < set.size(); ++i) {
    // d L / d lambda_i = -(E[c_i] - alpha_i); descend and project onto lambda >= 0.
    const double grad = -(mean[i] - set.constraints[i].threshold);
    lambda.lambda[i] = std::max(0.0, lambda.lambda[i] - config.lambda_lr * grad);
    if (!(lambda.lambda[i] >= 0.0)) throw std::logic_error("multiplier projection failed");
  }
}

Eigen::VectorXd mdp_policy_gradient(const PolicyParams& params, const TrajectoryBatch& batch,
                                    const MdpWeights& weights) {
  return weighted_score_function(params, batch, [&](const Trajectory& t) {
    const double sampled = t.reward - dot(weights.gamma, t.costs);
    const double baseline = t.baseline - dot(weights.gamma, t.greedy_costs);
    return sampled - baseline;
  });
}

void mdp_update(PolicyParams& params, const TrajectoryBatch& batch, const MdpWeights& weights,
                const TrainingConfig& config) {
  for (const auto& t : batch.items) {
    if (t.costs.size() != weights.gamma.size()) throw ConfigError("MDP weight and cost dimensions differ");
  }
  Eigen::VectorXd g = mdp_policy_gradient(params, batch, weights);
  clip_global_norm(g, config.clip_norm);
  params.flat().noalias() += config.policy_lr * g;
}

namespace {

TokenSeq with_eos(const TokenSeq& reference) {
  TokenSeq out = reference;
  out.push_back(Vocabulary::kEos);
  return out;
}

}  // namespace

double mean_loglik(const PolicyParams& params, std::span<const TaskSample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total += logprob(params, s.source->document, s.request, with_eos(s.reference));
  return total / static_cast<double>(samples.size());
}

PretrainResult ml_pretrain(PolicyParams& params, std::span<const TaskSample> samples, const TrainingConfig& config) {
  config.validate();
  if (samples.empty()) throw DataError("ml_pretrain: empty corpus");
  PretrainResult result;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.ml_epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(params.flat().size());
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = samples[order[k]];
        g += logprob_grad(params, s.source->document, s.request, with_eos(s.reference)).gradient;
      }
      g /= static_cast<double>(end - start);
      clip_global_norm(g, config.clip_norm);
      params.flat().noalias() += config.ml_lr * g;
    }
    check_finite(params);
    result.epoch_loglik.push_back(mean_loglik(params, samples));
  }
  return result;
}

std::string trace_csv_header(std::size_t constraints) {
  std::string out = "iter,mean_reward";
  for (const char* prefix : {"cost_", "lambda_", "viol_"}) {
    for (std::size_t i = 1; i <= constraints; ++i) out += "," + std::string(prefix) + std::to_string(i);
  }
  return out;
}

std::string trace_csv_row(const TraceRecord& r) {
  std::ostringstream out;
  out.precision(17);
  out << r.iteration << ',' << r.mean_reward;
  for (const auto* column : {&r.mean_costs, &r.lambda, &r.violation_rate}) {
    for (const double v : *column) out << ',' << v;
  }
  return out.str();
}

std::string trace_to_csv(const TrainingTrace& trace, std::size_t constraints) {
  std::string out = trace_csv_header(constraints) + "\n";
  for (const auto& r : trace.records) out += trace_csv_row(r) + "\n";
  return out;
}

TrainResult train(PolicyParams& params, std::span<const TaskSample> samples, const Environment& env,
                  const TrainingConfig& config, std::optional<MdpWeights> weights,
                  std::optional<LagrangianState> initial_lambda,
                  const std::function<void(const TraceRecord&)>& on_record) {
  config.validate();
  if (samples.empty()) throw DataError("train: no usable samples for this task");
  const std::size_t m = env.set.size();
  if (config.mode == TrainMode::kMl) throw ConfigError("train() runs reinforcement modes; use ml_pretrain for ml");
  if (config.mode == TrainMode::kMdp) {
    if (!weights) weights = MdpWeights::reported(config.task);
    weights->validate(env.set);
  }
  TrainResult result;
  result.lambda = initial_lambda.value_or(LagrangianState::initial(env.set, config.lambda_init));
  if (result.lambda.lambda.size() != m) throw ConfigError("initial multipliers do not match the constraint set");

  Rng picker(config.seed);
  std::uint64_t rollout_seed = config.seed * 1000003ULL;
  const auto thresholds = env.set.thresholds();

  TraceRecord acc;
  int in_interval = 0;
  auto reset = [&] {
    acc = TraceRecord{};
    acc.mean_costs.assign(m, 0.0);
    acc.violation_rate.assign(m, 0.0);
    in_interval = 0;
  };
  reset();
  std::size_t interval_samples = 0;

  std::vector<const TaskSample*> picks(static_cast<std::size_t>(config.batch_size));
  for (int iter = 1; iter <= config.iterations; ++iter) {
    for (auto& p : picks) p = &samples[picker.index(samples.size())];
    const auto batch = collect_batch(params, env, picks, rollout_seed, config.max_len);
    rollout_seed += picks.size();

    UpdateRecord update;
    update.lambda_before = result.lambda.lambda;
    update.batch_mean_costs = batch.mean_costs();
    if (config.mode == TrainMode::kCmdp) {
      cmdp_update(params, result.lambda, batch, env.set, config);
    } else {
      mdp_update(params, batch, *weights, config);
    }
    update.lambda_after = result.lambda.lambda;
    check_finite(params);
    result.trace.updates.push_back(std::move(update));

    acc.mean_reward += batch.mean_reward() * static_cast<double>(batch.items.size());
    for (const auto& t : batch.items) {
      for (std::size_t i = 0; i < m; ++i) {
        acc.mean_costs[i] += t.costs[i];
        if (t.costs[i] > thresholds[i]) acc.violation_rate[i] += 1.0;
      }
    }
    interval_samples += batch.items.size();
    ++in_interval;

    if (in_interval == config.checkpoint_interval || iter == config.iterations) {
      const auto n = static_cast<double>(interval_samples);
      acc.iteration = iter;
      acc.mean_reward /= n;
      for (std::size_t i = 0; i < m; ++i) {
        acc.mean_costs[i] /= n;
        acc.violation_rate[i] /= n;
      }
      acc.lambda = result.lambda.lambda;
      if (on_record) on_record(acc);
      result.trace.records.push_back(acc);
      reset();
      interval_samples = 0;
    }
  }
  return result;
}

}  // namespace ctrlsum
