#include <benchmark/benchmark.h>

#include "alforge/core/rng.hpp"
#include "alforge/metrics/classification.hpp"
#include "alforge/metrics/segmentation.hpp"
#include "alforge/metrics/similarity.hpp"

using namespace alforge;

namespace {

void BM_Nmi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(1, "bench");
  Image x(n, n), y(n, n);
  for (double& v : x.values()) v = rng.uniform();
  for (double& v : y.values()) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(metrics::nmi(x, y));
}
BENCHMARK(BM_Nmi)->Arg(64)->Arg(256);

void BM_Hausdorff(benchmark::State& state) {
  RngStream rng(2, "bench");
  Mask a(64, 64), b(64, 64);
  for (auto& v : a.values()) v = rng.bernoulli(0.1);
  for (auto& v : b.values()) v = rng.bernoulli(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::hausdorff(a, b));
}
BENCHMARK(BM_Hausdorff);

void BM_Auc(benchmark::State& state) {
  RngStream rng(3, "bench");
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> s(n);
  std::vector<Label> l(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.uniform();
    l[i] = i % 2 ? Label::Nodule : Label::Normal;
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::auc(s, l));
}
BENCHMARK(BM_Auc)->Arg(400)->Arg(10000);

}  // namespace
