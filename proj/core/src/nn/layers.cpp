#include "alforge/nn/layers.hpp"

#include <cmath>

namespace alforge::nn {
namespace {

Tensor he_normal(Shape shape, int fan_in, RngStream& rng, double gain) {
  std::vector<double> values(numel(shape));
  const double sd = gain * std::sqrt(2.0 / fan_in);
  for (double& v : values) v = rng.normal(0.0, sd);
  return Tensor::from(std::move(shape), std::move(values), true);
}

}  // namespace

Conv2d::Conv2d(int in, int out, int kernel, int stride_, int padding_, RngStream& rng)
    : weight(he_normal({out, in, kernel, kernel}, in * kernel * kernel, rng, 1.0)),
      bias(Tensor::zeros({out}, true)),
      stride(stride_),
      padding(padding_) {}

void Conv2d::visit(const std::string& prefix, const ParameterVisitor& v) {
  v.parameter(prefix + ".weight", weight);
  v.parameter(prefix + ".bias", bias);
}

Linear::Linear(int in, int out, RngStream& rng, double gain)
    : weight(he_normal({out, in}, in, rng, gain)), bias(Tensor::zeros({out}, true)) {}

void Linear::visit(const std::string& prefix, const ParameterVisitor& v) {
  v.parameter(prefix + ".weight", weight);
  v.parameter(prefix + ".bias", bias);
}

BatchNorm2d::BatchNorm2d(int channels) {
  state.gamma = Tensor::full({channels}, 1.0, true);
  state.beta = Tensor::zeros({channels}, true);
  state.running_mean.assign(channels, 0.0);
  state.running_var.assign(channels, 1.0);
}

void BatchNorm2d::visit(const std::string& prefix, const ParameterVisitor& v) {
  v.parameter(prefix + ".gamma", state.gamma);
  v.parameter(prefix + ".beta", state.beta);
  v.buffer(prefix + ".running_mean", state.running_mean);
  v.buffer(prefix + ".running_var", state.running_var);
}

}  // namespace alforge::nn
