// Serial reference vs OpenMP kernels over a generated corpus.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "masgcn/kernels.h"
#include "masgcn/model.h"
#include "masgcn/synthetic.h"

using namespace masgcn;

namespace {

struct Corpus {
  std::vector<RawExample> raw;
  Vocabularies vocabs;
  std::vector<FeatureBundle> bundles;
  Model model;
  std::vector<const FeatureBundle*> ptrs;
  std::vector<std::uint64_t> seeds;

  Corpus() {
    SyntheticOptions o;
    o.count = 64;
    o.min_len = 10;
    o.max_len = 30;
    raw = synthetic_corpus(o);
    vocabs = build_vocabularies(raw);
    bundles = kernels::compile_serial(raw, vocabs, 10, 40);
    ModelConfig c;
    c.word_vocab = vocabs.word.size();
    c.pos_vocab = vocabs.pos.size();
    c.num_types = vocabs.dep_type.num_types();
    model = Model(c, 42);
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      ptrs.push_back(&bundles[i]);
      seeds.push_back(i);
    }
  }
};

Corpus& corpus() {
  static Corpus c;
  return c;
}

void BM_CompileSerial(benchmark::State& s) {
  auto& c = corpus();
  for (auto _ : s) benchmark::DoNotOptimize(kernels::compile_serial(c.raw, c.vocabs, 10, 40));
}

void BM_CompileOmp(benchmark::State& s) {
  auto& c = corpus();
  omp_set_num_threads(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::compile_omp(c.raw, c.vocabs, 10, 40));
}

void BM_BatchGradSerial(benchmark::State& s) {
  auto& c = corpus();
  kernels::BatchRequest req{std::span(c.ptrs).first(16), std::span(c.seeds).first(16), true, 0.01};
  for (auto _ : s) benchmark::DoNotOptimize(kernels::batch_gradients_serial(c.model, req));
}

void BM_BatchGradOmp(benchmark::State& s) {
  auto& c = corpus();
  omp_set_num_threads(static_cast<int>(s.range(0)));
  kernels::BatchRequest req{std::span(c.ptrs).first(16), std::span(c.seeds).first(16), true, 0.01};
  for (auto _ : s) benchmark::DoNotOptimize(kernels::batch_gradients_omp(c.model, req));
}

void BM_PredictSerial(benchmark::State& s) {
  auto& c = corpus();
  for (auto _ : s) benchmark::DoNotOptimize(kernels::predict_serial(c.model, c.bundles));
}

void BM_PredictOmp(benchmark::State& s) {
  auto& c = corpus();
  omp_set_num_threads(static_cast<int>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(kernels::predict_omp(c.model, c.bundles));
}

}  // namespace

BENCHMARK(BM_CompileSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CompileOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
