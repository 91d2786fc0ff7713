#include <benchmark/benchmark.h>

#include "alforge/core/rng.hpp"
#include "alforge/nn/ops.hpp"

using namespace alforge;

namespace {

nn::Tensor random_tensor(nn::Shape shape, RngStream& rng, bool grad = false) {
  std::vector<double> v(nn::numel(shape));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return nn::Tensor::from(std::move(shape), std::move(v), grad);
}

void BM_Conv2dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  RngStream rng(1, "bench");
  const nn::Tensor x = random_tensor({4, c, 64, 64}, rng), w = random_tensor({c, c, 3, 3}, rng),
                   b = random_tensor({c}, rng);
  nn::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, w, b, 1, 1));
}
BENCHMARK(BM_Conv2dForward)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  RngStream rng(2, "bench");
  const nn::Tensor x = random_tensor({4, 8, 64, 64}, rng, true), w = random_tensor({8, 8, 3, 3}, rng, true),
                   b = random_tensor({8}, rng, true);
  for (auto _ : state) {
    nn::Tensor l = nn::sum(nn::conv2d(x, w, b, 1, 1));
    l.backward();
  }
}
BENCHMARK(BM_Conv2dBackward)->Unit(benchmark::kMillisecond);

}  // namespace
