#include <benchmark/benchmark.h>

#include "ctrlsum/corpus.hpp"
#include "ctrlsum/trainer.hpp"

using namespace ctrlsum;

namespace {

struct Setup {
  Corpus corpus;
  BinTable table;
  std::vector<TaskSample> samples;

  Setup() {
    CorpusSpec spec;
    spec.num_samples = 1000;  // smaller corpora tie on length bin boundaries
    corpus = generate_corpus(spec, 1);
    table = build_length_bins(corpus.samples);
    samples = prepare_task_samples(Task::kLength, corpus.samples, table);
  }

  PolicyParams params(int hidden) const {
    PolicyDims d;
    d.vocab = static_cast<int>(corpus.vocab.size());
    d.hidden = hidden;
    return PolicyParams::random(d, 1, 0.1);
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_LogprobGrad(benchmark::State& state) {
  const auto& s = setup();
  const auto params = s.params(static_cast<int>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& t = s.samples[i++ % s.samples.size()];
    benchmark::DoNotOptimize(logprob_grad(params, t.source->document, t.request, t.reference));
  }
}
BENCHMARK(BM_LogprobGrad)->Arg(32)->Arg(64);

void BM_Sample(benchmark::State& state) {
  const auto& s = setup();
  const auto params = s.params(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto& t = s.samples[seed % s.samples.size()];
    benchmark::DoNotOptimize(sample(params, t.source->document, t.request, seed++, 40));
  }
}
BENCHMARK(BM_Sample)->Arg(32)->Arg(64);

void BM_Greedy(benchmark::State& state) {
  const auto& s = setup();
  const auto params = s.params(32);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& t = s.samples[i++ % s.samples.size()];
    benchmark::DoNotOptimize(greedy(params, t.source->document, t.request, 40));
  }
}
BENCHMARK(BM_Greedy);

// One full CMDP iteration: 16 sampled and greedy rollouts, costs, update.
void BM_CmdpIteration(benchmark::State& state) {
  const auto& s = setup();
  auto params = s.params(static_cast<int>(state.range(0)));
  const Environment env{CostContext{&s.corpus.vocab, &s.table, {}}, ConstraintSet::for_task(Task::kLength)};
  TrainingConfig config;
  auto lambda = LagrangianState::initial(env.set, config.lambda_init);
  std::vector<const TaskSample*> picks;
  for (std::size_t i = 0; i < 16; ++i) picks.push_back(&s.samples[i]);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto batch = collect_batch(params, env, picks, seed, config.max_len);
    seed += picks.size();
    cmdp_update(params, lambda, batch, env.set, config);
  }
}
BENCHMARK(BM_CmdpIteration)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
