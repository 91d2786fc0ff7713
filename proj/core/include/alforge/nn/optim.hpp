#pragma once

#include <vector>

#include "alforge/nn/tensor.hpp"

namespace alforge::nn {

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Adaptive-moment gradient descent over a fixed parameter list.
class Adam {
public:
  Adam(std::vector<Tensor> parameters, AdamOptions options);

  /// Applies one update from the accumulated gradients.
  void step();
  void zero_grad();
  long steps() const noexcept { return t_; }

private:
  std::vector<Tensor> params_;
  AdamOptions opt_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

/// Sum of squared gradient entries over the list.
double gradient_norm_squared(std::vector<Tensor>& parameters);

}  // namespace alforge::nn
