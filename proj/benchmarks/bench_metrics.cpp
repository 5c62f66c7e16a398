#include <benchmark/benchmark.h>

#include "ctrlsum/cloze.hpp"
#include "ctrlsum/corpus.hpp"
#include "ctrlsum/metrics.hpp"

using namespace ctrlsum;

namespace {

const Corpus& corpus() {
  static const Corpus c = [] {
    CorpusSpec spec;
    spec.num_samples = 200;
    spec.abs_mix = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    return generate_corpus(spec, 1);
  }();
  return c;
}

void BM_ExtractiveDensity(benchmark::State& state) {
  const auto& samples = corpus().samples;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& s = samples[i++ % samples.size()];
    benchmark::DoNotOptimize(metrics::extractive_density(s.document, s.reference));
  }
}
BENCHMARK(BM_ExtractiveDensity);

void BM_LcsF1(benchmark::State& state) {
  const auto& samples = corpus().samples;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& s = samples[i++ % samples.size()];
    benchmark::DoNotOptimize(metrics::lcs_f1(s.document, s.reference));
  }
}
BENCHMARK(BM_LcsF1);

void BM_RepeatRatio(benchmark::State& state) {
  const auto& samples = corpus().samples;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(metrics::repeat_ratio(samples[i++ % samples.size()].document, 3));
}
BENCHMARK(BM_RepeatRatio);

void BM_QaF1(benchmark::State& state) {
  const auto& c = corpus();
  std::vector<std::pair<std::vector<ClozeItem>, const CorpusSample*>> cases;
  for (const auto& s : c.samples) {
    auto items = make_cloze_items(c.vocab, s.reference, s.entities, s.reference);
    if (!items.empty()) cases.emplace_back(std::move(items), &s);
  }
  const AnswerOracle oracle;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [items, s] = cases[i++ % cases.size()];
    benchmark::DoNotOptimize(qa_f1(c.vocab, items, s->document, oracle));
  }
}
BENCHMARK(BM_QaF1);

void BM_BuildLengthBins(benchmark::State& state) {
  std::vector<int> lengths(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < lengths.size(); ++i) lengths[i] = static_cast<int>(1 + (i * 7919) % 97);
  for (auto _ : state) benchmark::DoNotOptimize(build_length_bins(lengths));
}
BENCHMARK(BM_BuildLengthBins)->Arg(1000)->Arg(10000);

}  // namespace
