#pragma once

#include <map>
#include <string>
#include <vector>

#include "ctrlsum/policy.hpp"
#include "ctrlsum/trainer.hpp"

namespace ctrlsum {

/// Greedy output for one (document, request) pair with its measured attributes.
struct GeneratedRecord {
  std::string sample_id;
  ControlRequest request;
  TokenSeq summary;
  int length_bin = 0;
  int abs_bin = 0;  // 0 for an empty summary
  std::vector<TokenId> appeared;
  std::vector<double> costs;
  bool bin_hit = false;
  bool satisfied = false;  // every constraint within threshold
  double lcs_f1 = 0.0;
  double repeat3 = 0.0;
  double qa_f1 = 0.0;
  double appear = 0.0;
  double entity_repetition = 0.0;
};

struct BinBreakdown {
  int requests = 0;
  int hits = 0;
  double percent() const { return requests ? 100.0 * hits / requests : 0.0; }
};

struct EvaluationReport {
  Task task = Task::kLength;
  int outputs = 0;
  double bin_percent = 0.0;      // length/abstractiveness tasks
  double appear_percent = 0.0;   // entity task
  double qa_f1 = 0.0;            // entity task
  double entity_repetition = 0.0;
  double repeat3 = 0.0;
  double lcs_f1 = 0.0;
  double satisfaction_percent = 0.0;
  std::vector<double> mean_costs;
  std::map<int, BinBreakdown> per_bin;

  std::string to_csv() const;
  std::string to_text() const;
};

struct EvaluationOptions {
  /// Length task: request every bin 1..10 instead of the reference bin.
  bool all_length_bins = false;
  int max_len = 40;
};

/// Decodes greedily for every request the task implies: the reference length
/// bin, each abstractiveness bin 1..3, or the reference entities (samples
/// without them are skipped).
std::vector<GeneratedRecord> generate_records(const PolicyParams& params, const Environment& env,
                                              std::span<const TaskSample> samples, const EvaluationOptions& options);

GeneratedRecord measure(const Environment& env, const TaskSample& sample, const ControlRequest& request,
                        TokenSpan summary);

EvaluationReport summarize(Task task, std::span<const GeneratedRecord> records, std::size_t constraints);

EvaluationReport evaluate(const PolicyParams& params, const Environment& env, std::span<const TaskSample> samples,
                          const EvaluationOptions& options = {});

}  // namespace ctrlsum
