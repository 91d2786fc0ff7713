#pragma once

#include <vector>

#include "alforge/core/rng.hpp"
#include "alforge/nn/checkpoint.hpp"
#include "alforge/nn/layers.hpp"

namespace alforge::cgan {

struct GeneratorShape {
  int rows = 64;
  int cols = 64;
  int code_dim = 32;
  int features = 64;
  int blocks = 6;
};

/// Residual generator. The latent code is projected to an (H/8) x (W/8)
/// map, upsampled to full size and stacked with the conditioning image as
/// a second input channel. Each residual block is conv-BN-ReLU-conv-BN with
/// an identity skip. The output is sigmoid(head + logit(x)), so an untrained
/// network stays close to its input and the range is (0, 1).
class Generator {
public:
  Generator() = default;
  Generator(const GeneratorShape& shape, RngStream& rng);

  const GeneratorShape& shape() const { return shape_; }

  /// x [N, 1, H, W] in [0, 1], z [N, code_dim] -> [N, 1, H, W].
  /// With `track_stats` false, training-mode normalization leaves the
  /// running statistics untouched.
  nn::Tensor forward(const nn::Tensor& x, const nn::Tensor& z, bool training, bool track_stats = true);

  void visit(const std::string& prefix, const nn::ParameterVisitor& v);

private:
  struct Block {
    nn::Conv2d conv1, conv2;
    nn::BatchNorm2d bn1, bn2;
  };
  GeneratorShape shape_;
  nn::Linear z_proj_;
  nn::Conv2d conv_in_;
  std::vector<Block> blocks_;
  nn::Conv2d conv_out_;
};

nn::Checkpoint to_checkpoint(Generator& g);
Generator generator_from_checkpoint(const nn::Checkpoint& checkpoint);

}  // namespace alforge::cgan
