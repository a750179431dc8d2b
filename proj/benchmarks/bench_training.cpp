#include <benchmark/benchmark.h>

#include <vector>

#include "setfusion/classifier.hpp"
#include "setfusion/dataset.hpp"
#include "setfusion/metric_learning.hpp"

using namespace setfusion;

namespace {

std::vector<ImageSet> gallery_of(int n) {
  SyntheticSpec spec;
  spec.classes = 4;
  spec.sets_per_class = n / 4;
  return generate_synthetic(spec);
}

TrainConfig bench_config() {
  TrainConfig cfg;
  cfg.q = 3;
  cfg.target_dim = 10;
  cfg.eps = 0.0;
  return cfg;
}

std::vector<DescriptorTriple> encoded(int n) {
  std::vector<DescriptorTriple> out;
  for (const ImageSet& s : gallery_of(n)) out.push_back(encode_set(s, bench_config()));
  return out;
}

void BM_GramMatrix(benchmark::State& state) {
  const auto triples = encoded(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    for (KernelId id : kAllKernels) benchmark::DoNotOptimize(gram_matrix(triples, id, false));
  }
}
BENCHMARK(BM_GramMatrix)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_Scatter(benchmark::State& state) {
  const auto triples = encoded(static_cast<int>(state.range(0)));
  const std::vector<KernelId> ids(std::begin(kAllKernels), std::end(kAllKernels));
  const KernelBank bank = build_kernel_bank(triples, ids, false);
  std::vector<int> labels;
  for (std::size_t i = 0; i < triples.size(); ++i) labels.push_back(static_cast<int>(i % 4));
  const GatingWeights w = gating_weights(bank, init_gating(3, bank.n_train(), 0));
  for (auto _ : state) benchmark::DoNotOptimize(scatter_matrices(bank, labels, w));
}
BENCHMARK(BM_Scatter)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_FitModel(benchmark::State& state) {
  const auto sets = gallery_of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(sets, bench_config()));
}
BENCHMARK(BM_FitModel)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto sets = gallery_of(static_cast<int>(state.range(0)));
  const ModelState model = fit_model(sets, bench_config());
  for (auto _ : state) benchmark::DoNotOptimize(predict(sets.front(), model));
}
BENCHMARK(BM_Predict)->Arg(20)->Arg(80)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
