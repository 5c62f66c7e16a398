// Acceptance checks, one PASS/FAIL line per criterion. With no arguments all
// ten run; otherwise only the listed criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "ctrlsum/cloze.hpp"
#include "ctrlsum/corpus.hpp"
#include "ctrlsum/evaluation.hpp"
#include "ctrlsum/metrics.hpp"
#include "ctrlsum/rng.hpp"
#include "ctrlsum/trainer.hpp"

using namespace ctrlsum;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Shared training runs

// The toy setting every trend criterion uses: 2,000 training and 400
// held-out samples, one corpus seed, the larger policy of the README.
struct Recipe {
  int ml_epochs = 3;
  double ml_lr = 0.1;
  double policy_lr = 0.01;
  double lambda_lr = 0.02;
  int iterations = 20000;
};

constexpr std::uint64_t kCorpusSeed = 7;
constexpr int kTrain = 2000;
constexpr int kHeldOut = 400;

struct Experiment {
  Task task;
  Corpus corpus;
  std::vector<CorpusSample> train_split;
  std::vector<CorpusSample> test_split;
  BinTable table;
  std::vector<TaskSample> train;
  std::vector<TaskSample> test;
  Environment env;

  Experiment(Task t, const CorpusSpec& spec) : task(t) {
    corpus = generate_corpus(spec, kCorpusSeed);
    train_split.assign(corpus.samples.begin(), corpus.samples.begin() + kTrain);
    test_split.assign(corpus.samples.begin() + kTrain, corpus.samples.end());
    table = build_length_bins(train_split, "acceptance");
    assign_length_bins(train_split, table);
    assign_length_bins(test_split, table);
    train = prepare_task_samples(task, train_split, table);
    test = prepare_task_samples(task, test_split, table);
    env = Environment{CostContext{&corpus.vocab, &table, {}}, ConstraintSet::for_task(task)};
  }
  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  PolicyDims dims() const {
    PolicyDims d;
    d.vocab = static_cast<int>(corpus.vocab.size());
    d.embed = d.control = 32;
    d.hidden = 64;
    return d;
  }

  TrainingConfig config(const Recipe& r, TrainMode mode) const {
    TrainingConfig c;
    c.task = task;
    c.mode = mode;
    c.ml_epochs = r.ml_epochs;
    c.ml_lr = r.ml_lr;
    c.policy_lr = r.policy_lr;
    c.lambda_lr = r.lambda_lr;
    c.iterations = r.iterations;
    c.batch_size = 16;
    c.checkpoint_interval = 50;
    return c;
  }
};

CorpusSpec acceptance_spec(Task task) {
  CorpusSpec spec;
  spec.num_samples = kTrain + kHeldOut;
  spec.canonical_order = true;
  if (task == Task::kAbstractiveness) {
    spec.abs_mix = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    spec.synonyms_per_word = 3;
    spec.minimal_substitution = true;
  }
  return spec;
}

struct Run {
  std::unique_ptr<Experiment> exp;
  EvaluationReport ml;
  EvaluationReport cmdp;
  TrainingTrace trace;
  double seconds = 0.0;  // ML pretraining plus CMDP fine-tuning
  std::optional<EvaluationReport> mdp;
};

Run run_task(Task task, const Recipe& recipe, bool with_mdp) {
  Run run;
  const auto start = Clock::now();
  run.exp = std::make_unique<Experiment>(task, acceptance_spec(task));
  auto& e = *run.exp;
  auto params = PolicyParams::random(e.dims(), 1, 0.1);
  ml_pretrain(params, e.train, e.config(recipe, TrainMode::kMl));
  const auto pretrained = params;
  run.ml = evaluate(params, e.env, e.test);
  run.trace = train(params, e.train, e.env, e.config(recipe, TrainMode::kCmdp)).trace;
  run.seconds = seconds_since(start);
  run.cmdp = evaluate(params, e.env, e.test);
  if (with_mdp) {
    auto mdp_params = pretrained;
    train(mdp_params, e.train, e.env, e.config(recipe, TrainMode::kMdp));
    run.mdp = evaluate(mdp_params, e.env, e.test);
  }
  return run;
}

// Tuned per task; see the README for how these were chosen.
Recipe length_recipe() { return Recipe{}; }
Recipe entity_recipe() { return Recipe{.ml_epochs = 2, .policy_lr = 0.01, .lambda_lr = 0.002, .iterations = 30000}; }
Recipe abs_recipe() {
  return Recipe{.ml_epochs = 50, .ml_lr = 0.3, .policy_lr = 0.01, .lambda_lr = 0.02, .iterations = 30000};
}

class Runs {
 public:
  const Run& length() { return get(Task::kLength, length_recipe(), true); }
  const Run& entity() { return get(Task::kEntity, entity_recipe(), false); }
  const Run& abstractiveness() { return get(Task::kAbstractiveness, abs_recipe(), false); }
  std::vector<const Run*> finished() const {
    std::vector<const Run*> out;
    for (const auto& [task, run] : runs_) out.push_back(&run);
    return out;
  }

 private:
  const Run& get(Task task, const Recipe& recipe, bool with_mdp) {
    auto it = runs_.find(task);
    if (it == runs_.end()) it = runs_.emplace(task, run_task(task, recipe, with_mdp)).first;
    return it->second;
  }
  std::map<Task, Run> runs_;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1

Outcome gradient_check() {
  const auto start = Clock::now();
  PolicyDims dims;
  dims.vocab = 20;
  dims.hidden = 16;
  dims.embed = dims.control = 8;
  double worst = 0.0;
  int seeds = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed, ++seeds) {
    Rng rng(seed);
    auto params = PolicyParams::random(dims, seed, 0.5);
    for (Eigen::Index i = params.flat().size() - dims.vocab; i < params.flat().size(); ++i) params.flat()[i] = rng.normal() * 0.3;
    TokenSeq doc;
    for (int i = 0; i < 12; ++i) doc.push_back(static_cast<TokenId>(1 + rng.index(19)));
    TokenSeq y;
    const int len = rng.between(1, 7);
    for (int i = 0; i < len; ++i) y.push_back(static_cast<TokenId>(1 + rng.index(19)));
    y.push_back(Vocabulary::kEos);
    const auto request = seed % 2 ? ControlRequest::length(rng.between(1, 10)) : ControlRequest::entities({doc[0], doc[1]});

    const auto analytic = logprob_grad(params, doc, request, y).gradient;
    Eigen::VectorXd numeric(analytic.size());
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < numeric.size(); ++i) {
      auto plus = params;
      auto minus = params;
      plus.flat()[i] += h;
      minus.flat()[i] -= h;
      numeric[i] = (logprob(plus, doc, request, y) - logprob(minus, doc, request, y)) / (2 * h);
    }
    worst = std::max(worst, (analytic - numeric).norm() / (analytic.norm() + numeric.norm()));
  }
  const double t = seconds_since(start);
  return {worst < 1e-4 && t < 60.0,
          fmt("max relative error %.2e over %d seeds (limit 1e-4), V=20, d_h=16, length <= 8, %.1f s (limit 60)",
              worst, seeds, t)};
}

// ---------------------------------------------------------------------------
// 2

double brute_force_density(const TokenSeq& x, const TokenSeq& y) {
  double total = 0.0;
  std::size_t i = 0;
  while (i < y.size()) {
    std::size_t best = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      std::size_t k = 0;
      while (i + k < y.size() && j + k < x.size() && y[i + k] == x[j + k]) ++k;
      best = std::max(best, k);
    }
    if (best > 0) {
      total += static_cast<double>(best * best);
      i += best;
    } else {
      ++i;
    }
  }
  return total / static_cast<double>(y.size());
}

Outcome density_oracle() {
  const auto start = Clock::now();
  Rng rng(2718);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    TokenSeq x(rng.index(16));
    TokenSeq y(1 + rng.index(10));
    for (auto& t : x) t = static_cast<TokenId>(100 + rng.index(3));
    for (auto& t : y) t = static_cast<TokenId>(100 + rng.index(3));
    if (metrics::extractive_density(x, y) != brute_force_density(x, y)) ++mismatches;
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 10.0,
          fmt("%d mismatches on 1000 random pairs (doc <= 15, summary <= 10, 3 symbols), %.2f s (limit 10)",
              mismatches, t)};
}

// ---------------------------------------------------------------------------
// 3, 4, 7, 8

Outcome lambda_dynamics(Runs& runs) {
  const auto& run = runs.length();
  const auto thresholds = run.exp->env.set.thresholds();
  long spans = 0;
  long decreases = 0;
  for (const auto& u : run.trace.updates) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (u.batch_mean_costs[i] <= thresholds[i]) continue;
      ++spans;
      if (u.lambda_after[i] < u.lambda_before[i]) ++decreases;
    }
  }
  const auto& rec = run.trace.records;
  constexpr std::size_t kWindow = 20;
  bool dropped = false;
  double initial = 0.0;
  double lowest = 0.0;
  if (rec.size() >= kWindow) {
    auto window_mean = [&](std::size_t start) {
      double s = 0.0;
      for (std::size_t k = start; k < start + kWindow; ++k) s += rec[k].mean_costs[0];
      return s / kWindow;
    };
    initial = window_mean(0);
    lowest = initial;
    for (std::size_t s = 1; s + kWindow <= rec.size(); ++s) lowest = std::min(lowest, window_mean(s));
    dropped = lowest <= 0.5 * initial;
  }
  const bool fast = run.seconds < 600.0;
  return {decreases == 0 && dropped && fast,
          fmt("(a) %ld violated update spans, %ld with a multiplier decrease; (b) length-cost moving average "
              "%.4f -> %.4f (%.0f%% drop, need 50%%); run %.0f s (limit 600)",
              spans, decreases, initial, lowest, initial > 0 ? 100.0 * (1.0 - lowest / initial) : 0.0, run.seconds)};
}

Outcome length_trend(Runs& runs) {
  const auto& run = runs.length();
  const double ml = run.ml.bin_percent;
  const double cmdp = run.cmdp.bin_percent;
  return {cmdp - ml >= 30.0 && cmdp >= 85.0 && run.seconds < 900.0,
          fmt("held-out bin %% %.2f (ML) -> %.2f (CMDP), gain %.2f (need 30, final 85); %d outputs; run %.0f s "
              "(limit 900)",
              ml, cmdp, cmdp - ml, run.cmdp.outputs, run.seconds)};
}

Outcome repetition(Runs& runs) {
  runs.length();
  bool ok = true;
  std::string detail;
  for (const Run* run : runs.finished()) {
    ok &= run->cmdp.repeat3 <= 0.01;
    if (!detail.empty()) detail += ", ";
    detail += fmt("%s %.4f", std::string(to_string(run->exp->task)).c_str(), run->cmdp.repeat3);
  }
  return {ok, "held-out mean repeat3 after CMDP: " + detail + " (limit 0.01)"};
}

Outcome parity(Runs& runs) {
  const auto& run = runs.length();
  const double cmdp = run.cmdp.satisfaction_percent;
  const double mdp = run.mdp->satisfaction_percent;
  return {cmdp >= mdp - 5.0,
          fmt("length task, equal budget: satisfaction %.2f%% (CMDP) vs %.2f%% (MDP, weights 0.4/0.6)", cmdp, mdp)};
}

// ---------------------------------------------------------------------------
// 5, 6

Outcome entity_trend(Runs& runs) {
  const auto& run = runs.entity();
  const auto& ml = run.ml;
  const auto& c = run.cmdp;
  const bool ok = c.appear_percent >= 90.0 && c.qa_f1 - ml.qa_f1 >= 0.2 && c.entity_repetition <= 0.02;
  return {ok, fmt("appear %% %.2f -> %.2f (need 90); QA-F1 %.4f -> %.4f, gain %.4f (need 0.2); "
                  "entity repetition %.4f (limit 0.02)",
                  ml.appear_percent, c.appear_percent, ml.qa_f1, c.qa_f1, c.qa_f1 - ml.qa_f1, c.entity_repetition)};
}

Outcome abs_trend(Runs& runs) {
  const auto& run = runs.abstractiveness();
  auto pct = [](const EvaluationReport& r, int bin) {
    const auto it = r.per_bin.find(bin);
    return it == r.per_bin.end() ? 0.0 : it->second.percent();
  };
  double ml[4];
  double cm[4];
  for (int b = 1; b <= 3; ++b) {
    ml[b] = pct(run.ml, b);
    cm[b] = pct(run.cmdp, b);
  }
  const bool ok = cm[2] - ml[2] >= 20.0 && cm[3] - ml[3] >= 20.0 && cm[1] >= 95.0;
  return {ok, fmt("bin %% per target, ML -> CMDP: bin1 %.2f -> %.2f (need 95), bin2 %.2f -> %.2f (need +20), "
                  "bin3 %.2f -> %.2f (need +20)",
                  ml[1], cm[1], ml[2], cm[2], ml[3], cm[3])};
}

// ---------------------------------------------------------------------------
// 9

std::string slurp(const fs::path& p) { return read_text_file(p); }

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "ctrlsum_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> corpus{"--set", "corpus.train_samples=1000", "--set", "corpus.valid_samples=20",
                                        "--set", "corpus.test_samples=50"};
  const std::vector<std::string> quick{"--set", "training.ml_epochs=1", "--set", "training.iterations=40",
                                       "--set", "training.checkpoint_interval=5"};
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args, const std::vector<std::string>& extra = {}) {
    args.insert(args.begin(), "ctrlsum");
    args.insert(args.end(), extra.begin(), extra.end());
    return cli::run(args, sink, sink);
  };
  std::vector<std::string> files;
  int failures = 0;
  for (const std::string rep : {"a", "b"}) {
    const auto dir = (root / rep).string();
    const auto data = dir + "/corpus";
    auto with_corpus = [&](std::vector<std::string> a) {
      a.insert(a.end(), corpus.begin(), corpus.end());
      a.insert(a.end(), {"--data", data});
      return a;
    };
    failures += cli(with_corpus({"gen-corpus", "--seed", "3", "--out", data})) != 0;
    failures += cli(with_corpus({"train", "--mode", "ml", "--seed", "3", "--out", dir + "/ml"}), quick) != 0;
    for (const std::string mode : {"cmdp", "mdp"}) {
      failures += cli(with_corpus({"train", "--mode", mode, "--seed", "3", "--checkpoint", dir + "/ml/checkpoint.json",
                                   "--out", dir + "/" + mode}),
                      quick) != 0;
      failures += cli(with_corpus({"evaluate", "--checkpoint", dir + "/" + mode + "/checkpoint.json", "--out",
                                   dir + "/" + mode + "/eval"})) != 0;
    }
  }
  for (const char* f : {"corpus/train.jsonl", "corpus/bins.json", "ml/ml_trace.csv", "ml/checkpoint.json",
                        "cmdp/trace.csv", "cmdp/checkpoint.json", "cmdp/eval/report.csv", "cmdp/eval/report.txt",
                        "mdp/trace.csv", "mdp/checkpoint.json", "mdp/eval/report.csv"}) {
    files.push_back(f);
  }
  int differing = 0;
  if (failures == 0) {
    for (const auto& f : files) differing += slurp(root / "a" / f) != slurp(root / "b" / f);
  }
  fs::remove_all(root);
  return {failures == 0 && differing == 0,
          fmt("%d command failures; %d of %zu artifacts differ between two identical runs (traces, checkpoints, "
              "reports)",
              failures, differing, files.size())};
}

// ---------------------------------------------------------------------------
// 10

bool contains(TokenSpan s, TokenId t) { return std::find(s.begin(), s.end(), t) != s.end(); }

Outcome pipeline_audit() {
  CorpusSpec spec;
  spec.num_samples = 200;
  spec.abs_mix = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto corpus = generate_corpus(spec, 10);
  const auto& vocab = corpus.vocab;
  long answerable = 0;
  long irrelevant = 0;
  long repeated = 0;
  long violations = 0;
  auto one_mask = [](const ClozeItem& it) { return std::count(it.question.begin(), it.question.end(), Vocabulary::kMask) == 1; };

  for (const auto& s : corpus.samples) {
    const auto set = build_qa_training_set(vocab, s);
    // Answerable: one item per reference entity occurrence, gold in context.
    long occurrences = 0;
    for (const TokenId t : s.reference) occurrences += contains(s.entities, t);
    const bool has_pseudo = pseudo_reference(s.document, s.reference, s.entities).has_value();
    const long expected_answerable = has_pseudo ? occurrences : 0;
    violations += static_cast<long>(set.reference_context.size()) != expected_answerable;
    violations += set.pseudo_context.size() != set.reference_context.size();
    for (const auto* items : {&set.reference_context, &set.pseudo_context}) {
      for (const auto& it : *items) {
        violations += !one_mask(it);
        violations += it.answer == kUnanswerable || !contains(it.context, it.answer);
      }
    }
    answerable += static_cast<long>(set.reference_context.size() + set.pseudo_context.size());

    // Irrelevant: every entity-free, low-recall document sentence, no others.
    long qualifying = 0;
    for (const auto& sentence : metrics::split_sentences(s.document)) {
      const bool mentions = std::any_of(s.entities.begin(), s.entities.end(), [&](TokenId e) { return contains(sentence, e); });
      if (!mentions && metrics::lcs_recall(sentence, s.reference) <= kIrrelevantRecallLimit) ++qualifying;
    }
    if (occurrences == 0) qualifying = 0;
    violations += static_cast<long>(set.unanswerable.irrelevant.size()) != qualifying;
    for (const auto& it : set.unanswerable.irrelevant) {
      violations += !one_mask(it) || it.answer != kUnanswerable;
      violations += metrics::lcs_recall(it.context, s.reference) > kIrrelevantRecallLimit;
      for (const TokenId e : s.entities) violations += contains(it.context, e);
    }
    irrelevant += static_cast<long>(set.unanswerable.irrelevant.size());

    // Repeated entity: one per reference sentence with two distinct entities.
    long two_entity = 0;
    for (const auto& sentence : metrics::split_sentences(s.reference)) {
      std::set<TokenId> distinct;
      for (const TokenId t : sentence) {
        if (vocab.is_entity(t)) distinct.insert(t);
      }
      two_entity += distinct.size() >= 2;
    }
    violations += static_cast<long>(set.unanswerable.repeated_entity.size()) != two_entity;
    for (const auto& it : set.unanswerable.repeated_entity) {
      violations += !one_mask(it) || it.answer != kUnanswerable;
      // The masked entity now fills both of its sentence's entity slots.
      const auto mask = std::find(it.question.begin(), it.question.end(), Vocabulary::kMask);
      const auto pos = static_cast<std::size_t>(mask - it.question.begin());
      violations += std::count(it.context.begin(), it.context.end(), it.context[pos]) < 2;
    }
    repeated += static_cast<long>(set.unanswerable.repeated_entity.size());
  }
  const bool ok = violations == 0 && answerable > 0 && irrelevant > 0 && repeated > 0;
  return {ok, fmt("200 samples: %ld answerable, %ld irrelevant, %ld repeated-entity items; %ld invariant or count "
                  "violations",
                  answerable, irrelevant, repeated, violations)};
}

}  // namespace

int main(int argc, char** argv) {
  // Arguments select criteria by number. --known-failure N marks a criterion
  // that is recorded as unattained: it still prints FAIL but does not set
  // the exit code. Anything else failing does.
  std::set<int> wanted;
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-failure" && i + 1 < argc) {
      known.insert(std::atoi(argv[++i]));
    } else {
      wanted.insert(std::atoi(arg.c_str()));
    }
  }
  Runs runs;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_check},
      {"fragment-density oracle", density_oracle},
      {"multiplier dynamics", [&] { return lambda_dynamics(runs); }},
      {"length-control trend", [&] { return length_trend(runs); }},
      {"entity-control trend", [&] { return entity_trend(runs); }},
      {"abstractiveness-control trend", [&] { return abs_trend(runs); }},
      {"repetition constraint", [&] { return repetition(runs); }},
      {"CMDP vs MDP parity", [&] { return parity(runs); }},
      {"determinism", determinism},
      {"data-pipeline audit", pipeline_audit},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.contains(id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                seconds_since(start));
    if (!o.pass && known.contains(id)) {
      std::printf("      known failure, not counted; see the README\n");
    } else {
      failed += !o.pass;
    }
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
