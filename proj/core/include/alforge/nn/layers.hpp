#pragma once

#include <functional>
#include <string>
#include <vector>

#include "alforge/core/rng.hpp"
#include "alforge/nn/ops.hpp"

namespace alforge::nn {

/// Visits named tensors of a model: trainable parameters and, separately,
/// non-trainable buffers such as batch-norm running statistics.
struct ParameterVisitor {
  std::function<void(const std::string& name, Tensor& tensor)> parameter;
  std::function<void(const std::string& name, std::vector<double>& buffer)> buffer;
};

struct Conv2d {
  Tensor weight;  // [out, in, k, k]
  Tensor bias;    // [out]
  int stride = 1;
  int padding = 1;

  Conv2d() = default;
  /// He-normal weights, zero bias.
  Conv2d(int in, int out, int kernel, int stride, int padding, RngStream& rng);
  Tensor operator()(const Tensor& x) const { return conv2d(x, weight, bias, stride, padding); }
  void visit(const std::string& prefix, const ParameterVisitor& v);
};

struct Linear {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]

  Linear() = default;
  /// `gain` scales the He-normal standard deviation.
  Linear(int in, int out, RngStream& rng, double gain = 1.0);
  Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }
  void visit(const std::string& prefix, const ParameterVisitor& v);
};

struct BatchNorm2d {
  BatchNormState state;

  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels);
  Tensor operator()(const Tensor& x, bool training) { return batch_norm(x, state, training); }
  void visit(const std::string& prefix, const ParameterVisitor& v);
};

/// Collects trainable parameters of anything exposing `visit(prefix, visitor)`.
template <typename Model>
std::vector<Tensor> parameters_of(Model& model) {
  std::vector<Tensor> out;
  ParameterVisitor v{[&](const std::string&, Tensor& t) { out.push_back(t); },
                     [](const std::string&, std::vector<double>&) {}};
  model.visit("", v);
  return out;
}

template <typename Model>
std::size_t parameter_count(Model& model) {
  std::size_t n = 0;
  for (const auto& t : parameters_of(model)) n += t.numel();
  return n;
}

/// Rounds every parameter and buffer value to the nearest float32, so the
/// model is exactly representable in a 32-bit checkpoint.
template <typename Model>
void round_to_float32(Model& model) {
  ParameterVisitor v{[](const std::string&, Tensor& t) {
                       for (double& x : t.data()) x = static_cast<double>(static_cast<float>(x));
                     },
                     [](const std::string&, std::vector<double>& b) {
                       for (double& x : b) x = static_cast<double>(static_cast<float>(x));
                     }};
  model.visit("", v);
}

/// Order-sensitive FNV-1a over every parameter's bytes.
template <typename Model>
std::uint64_t parameter_checksum(Model& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  ParameterVisitor v{[&](const std::string&, Tensor& t) {
                       for (double x : t.data()) {
                         const auto* p = reinterpret_cast<const unsigned char*>(&x);
                         for (std::size_t i = 0; i < sizeof x; ++i) {
                           h ^= p[i];
                           h *= 0x100000001b3ULL;
                         }
                       }
                     },
                     [](const std::string&, std::vector<double>&) {}};
  model.visit("", v);
  return h;
}

}  // namespace alforge::nn
