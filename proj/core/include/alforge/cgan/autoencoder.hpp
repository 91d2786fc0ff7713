#pragma once

#include <vector>

#include "alforge/core/config.hpp"
#include "alforge/core/grid.hpp"
#include "alforge/core/rng.hpp"
#include "alforge/nn/checkpoint.hpp"
#include "alforge/nn/layers.hpp"

namespace alforge::cgan {

using LatentCode = std::vector<double>;

inline constexpr double kMinReconstructionAccuracy = 0.95;

/// Convolutional mask autoencoder: three stride-2 convolutions and a dense
/// bottleneck of `code_dim`, mirrored by nearest upsampling in the decoder.
class MaskAutoencoder {
public:
  MaskAutoencoder() = default;
  MaskAutoencoder(int rows, int cols, int code_dim, RngStream& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int code_dim() const { return code_dim_; }
  /// Mean per-pixel accuracy on the held-out masks at the end of training.
  double heldout_accuracy() const { return heldout_accuracy_; }
  void set_heldout_accuracy(double a) { heldout_accuracy_ = a; }

  /// [N, 1, H, W] masks in {0, 1} -> [N, code_dim]
  nn::Tensor encode(const nn::Tensor& masks) const;
  /// [N, code_dim] -> [N, 1, H, W] logits
  nn::Tensor decode(const nn::Tensor& codes) const;

  void visit(const std::string& prefix, const nn::ParameterVisitor& v);

private:
  int rows_ = 0, cols_ = 0, code_dim_ = 0;
  double heldout_accuracy_ = 0.0;
  nn::Conv2d e1_, e2_, e3_;
  nn::Linear to_code_, from_code_;
  nn::Conv2d d1_, d2_, d3_;
};

/// Trains on all but a held-out fifth of the masks (at least one), then
/// checks reconstruction accuracy on the held-out part. Throws a training
/// error carrying the final accuracy when it stays below 0.95.
MaskAutoencoder train_autoencoder(const std::vector<Mask>& masks, const ExperimentConfig& config, RngStream& rng);

LatentCode encode_mask(const MaskAutoencoder& ae, const Mask& mask);
/// Batch of codes as a [N, code_dim] tensor.
nn::Tensor encode_masks(const MaskAutoencoder& ae, const std::vector<const Mask*>& masks);
Mask reconstruct_mask(const MaskAutoencoder& ae, const Mask& mask);
double reconstruction_accuracy(const MaskAutoencoder& ae, const std::vector<Mask>& masks);

nn::Checkpoint to_checkpoint(MaskAutoencoder& ae);
MaskAutoencoder autoencoder_from_checkpoint(const nn::Checkpoint& checkpoint);

}  // namespace alforge::cgan
