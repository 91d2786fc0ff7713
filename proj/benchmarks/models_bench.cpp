#include <benchmark/benchmark.h>

#include "alforge/core/config.hpp"
#include "alforge/models/classifier.hpp"

using namespace alforge;

namespace {

void BM_McForward(benchmark::State& state) {
  ExperimentConfig c;
  RngStream init(1, "bench");
  const models::ClassifierModel model(c, init);
  RngStream rng(2, "bench");
  Image im(64, 64);
  for (double& v : im.values()) v = rng.uniform();
  const int t = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(models::mc_forward(model, im, t, rng));
}
BENCHMARK(BM_McForward)->Arg(1)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SigmoidNoiseVariance(benchmark::State& state) {
  double z = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(models::sigmoid_noise_variance(z, 0.5));
    z = z > 3.0 ? -3.0 : z + 0.01;
  }
}
BENCHMARK(BM_SigmoidNoiseVariance);

}  // namespace
