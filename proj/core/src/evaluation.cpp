#include "ctrlsum/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "ctrlsum/metrics.hpp"

namespace ctrlsum {

GeneratedRecord measure(const Environment& env, const TaskSample& sample, const ControlRequest& request,
                        TokenSpan summary) {
  GeneratedRecord r;
  r.sample_id = sample.source->id;
  r.request = request;
  r.summary.assign(summary.begin(), summary.end());
  r.length_bin = metrics::length_bin_of(summary.size(), *env.costs.table);
  if (!summary.empty()) {
    r.abs_bin = metrics::abstractiveness_bin(metrics::extractive_density(sample.source->document, summary));
  }
  r.lcs_f1 = metrics::lcs_f1(summary, sample.reference);
  r.repeat3 = metrics::repeat_ratio(summary, 3);

  TaskSample as_requested = sample;
  as_requested.request = request;
  r.costs = env.evaluate(as_requested, summary);
  const auto violated = violations(r.costs, env.set);
  r.satisfied = std::none_of(violated.begin(), violated.end(), [](bool v) { return v; });

  switch (request.task()) {
    case Task::kLength:
      r.bin_hit = r.length_bin == request.bin();
      break;
    case Task::kAbstractiveness:
      r.bin_hit = r.abs_bin == request.bin();
      break;
    case Task::kEntity: {
      const auto& entities = request.entity_list();
      for (const TokenId e : entities) {
        if (std::find(summary.begin(), summary.end(), e) != summary.end()) r.appeared.push_back(e);
      }
      r.appear = metrics::appear_fraction(summary, entities);
      r.entity_repetition = metrics::entity_repetition_fraction(summary, entities);
      const auto items = make_cloze_items(*env.costs.vocab, sample.reference, entities, sample.reference);
      r.qa_f1 = items.empty() ? 0.0 : qa_f1(*env.costs.vocab, items, summary, env.costs.oracle);
      break;
    }
  }
  return r;
}

std::vector<GeneratedRecord> generate_records(const PolicyParams& params, const Environment& env,
                                              std::span<const TaskSample> samples, const EvaluationOptions& options) {
  std::vector<GeneratedRecord> records;
  for (const auto& s : samples) {
    std::vector<ControlRequest> requests;
    switch (env.set.task) {
      case Task::kLength:
        if (options.all_length_bins) {
          for (int b = 1; b <= kLengthBins; ++b) requests.push_back(ControlRequest::length(b));
        } else {
          requests.push_back(s.request);
        }
        break;
      case Task::kAbstractiveness:
        for (int b = 1; b <= kAbstractivenessBins; ++b) requests.push_back(ControlRequest::abstractiveness(b));
        break;
      case Task::kEntity:
        requests.push_back(s.request);
        break;
    }
    for (const auto& request : requests) {
      const auto out = greedy(params, s.source->document, request, options.max_len);
      records.push_back(measure(env, s, request, out.summary()));
    }
  }
  return records;
}

EvaluationReport summarize(Task task, std::span<const GeneratedRecord> records, std::size_t constraints) {
  EvaluationReport rep;
  rep.task = task;
  rep.outputs = static_cast<int>(records.size());
  rep.mean_costs.assign(constraints, 0.0);
  if (records.empty()) return rep;
  int hits = 0;
  int satisfied = 0;
  for (const auto& r : records) {
    hits += r.bin_hit;
    satisfied += r.satisfied;
    rep.appear_percent += r.appear;
    rep.qa_f1 += r.qa_f1;
    rep.entity_repetition += r.entity_repetition;
    rep.repeat3 += r.repeat3;
    rep.lcs_f1 += r.lcs_f1;
    for (std::size_t i = 0; i < constraints; ++i) rep.mean_costs[i] += r.costs[i];
    if (task != Task::kEntity) {
      auto& b = rep.per_bin[r.request.bin()];
      ++b.requests;
      b.hits += r.bin_hit;
    }
  }
  const auto n = static_cast<double>(records.size());
  rep.bin_percent = task == Task::kEntity ? 0.0 : 100.0 * hits / n;
  rep.appear_percent = 100.0 * rep.appear_percent / n;
  rep.qa_f1 /= n;
  rep.entity_repetition /= n;
  rep.repeat3 /= n;
  rep.lcs_f1 /= n;
  rep.satisfaction_percent = 100.0 * satisfied / n;
  for (auto& c : rep.mean_costs) c /= n;
  return rep;
}

EvaluationReport evaluate(const PolicyParams& params, const Environment& env, std::span<const TaskSample> samples,
                          const EvaluationOptions& options) {
  const auto records = generate_records(params, env, samples, options);
  return summarize(env.set.task, records, env.set.size());
}

std::string EvaluationReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "metric,value\n";
  out << "task," << to_string(task) << '\n';
  out << "outputs," << outputs << '\n';
  out << "bin_percent," << bin_percent << '\n';
  out << "appear_percent," << appear_percent << '\n';
  out << "qa_f1," << qa_f1 << '\n';
  out << "entity_repetition," << entity_repetition << '\n';
  out << "repeat3," << repeat3 << '\n';
  out << "lcs_f1," << lcs_f1 << '\n';
  out << "satisfaction_percent," << satisfaction_percent << '\n';
  for (std::size_t i = 0; i < mean_costs.size(); ++i) out << "cost_" << i + 1 << ',' << mean_costs[i] << '\n';
  for (const auto& [bin, b] : per_bin) out << "bin_" << bin << "_percent," << b.percent() << '\n';
  return out.str();
}

std::string EvaluationReport::to_text() const {
  std::ostringstream out;
  char line[160];
  out << "task: " << to_string(task) << "  outputs: " << outputs << '\n';
  if (task == Task::kEntity) {
    std::snprintf(line, sizeof line, "appear %%: %.2f  QA-F1: %.4f  ER: %.4f\n", appear_percent, qa_f1,
                  entity_repetition);
  } else {
    std::snprintf(line, sizeof line, "bin %%: %.2f\n", bin_percent);
  }
  out << line;
  std::snprintf(line, sizeof line, "repeat3: %.4f  LCS-F1: %.4f  constraints satisfied: %.2f%%\n", repeat3, lcs_f1,
                satisfaction_percent);
  out << line;
  for (const auto& [bin, b] : per_bin) {
    std::snprintf(line, sizeof line, "  bin %2d: %6.2f%% of %d\n", bin, b.percent(), b.requests);
    out << line;
  }
  return out.str();
}

}  // namespace ctrlsum
