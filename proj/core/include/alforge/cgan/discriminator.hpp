#pragma once

#include <vector>

#include "alforge/core/rng.hpp"
#include "alforge/nn/checkpoint.hpp"
#include "alforge/nn/layers.hpp"

namespace alforge::cgan {

struct DiscriminatorShape {
  int rows = 64;
  int cols = 64;
  int base_features = 64;
  /// Even; features double and the resolution halves every second layer.
  int conv_layers = 8;
};

/// D(x, y): the pair is stacked as two channels and passed through
/// alternating stride-1 / stride-2 3x3 convolutions with leaky ReLU, then
/// two dense layers. Returns a probability via a sigmoid.
class Discriminator {
public:
  Discriminator() = default;
  Discriminator(const DiscriminatorShape& shape, RngStream& rng);

  const DiscriminatorShape& shape() const { return shape_; }
  /// [N, 1] pre-sigmoid scores.
  nn::Tensor logits(const nn::Tensor& x, const nn::Tensor& y) const;
  /// [N, 1] probabilities in (0, 1).
  nn::Tensor operator()(const nn::Tensor& x, const nn::Tensor& y) const;

  void visit(const std::string& prefix, const nn::ParameterVisitor& v);

private:
  DiscriminatorShape shape_;
  std::vector<nn::Conv2d> convs_;
  nn::Linear dense1_, dense2_;
};

inline constexpr double kLeakySlope = 0.2;

nn::Checkpoint to_checkpoint(Discriminator& d);
Discriminator discriminator_from_checkpoint(const nn::Checkpoint& checkpoint);

}  // namespace alforge::cgan
