#include <benchmark/benchmark.h>

#include <cmath>

#include "alforge/core/config.hpp"
#include "alforge/core/error.hpp"
#include "alforge/maskops/contour.hpp"
#include "alforge/maskops/perturb.hpp"

using namespace alforge;

namespace {

Mask disc(int n, double r) {
  Mask m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::hypot(i - n / 2.0, j - n / 2.0) <= r ? 1 : 0;
  return m;
}

void BM_DisplaceBoundary(benchmark::State& state) {
  const Mask m = disc(64, 20.0);
  const auto contour = maskops::extract_boundary(m);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RngStream rng(seed++, "bench");
    maskops::PerturbationSpec spec;
    spec.n_segments = static_cast<int>(state.range(0));
    try {
      benchmark::DoNotOptimize(maskops::displace_boundary(contour, spec, 64, 64, rng));
    } catch (const Error&) {
    }
  }
}
BENCHMARK(BM_DisplaceBoundary)->Arg(1)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_GeneratePerturbations(benchmark::State& state) {
  ImageSample s;
  s.id = "bench";
  s.label = Label::Nodule;
  s.mask = disc(64, 12.0);
  s.pixels = Image(64, 64, 0.3);
  for (std::size_t i = 0; i < s.mask.size(); ++i)
    if (s.mask.values()[i]) s.pixels.values()[i] = 0.7;
  const ExperimentConfig c;
  for (auto _ : state) {
    RngStream rng(1, "bench");
    benchmark::DoNotOptimize(maskops::generate_perturbations(s, 16, c, rng));
  }
}
BENCHMARK(BM_GeneratePerturbations)->Unit(benchmark::kMillisecond);

}  // namespace
