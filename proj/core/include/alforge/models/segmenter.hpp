#pragma once

#include <string>
#include <vector>

#include "alforge/core/config.hpp"
#include "alforge/core/rng.hpp"
#include "alforge/core/sample.hpp"
#include "alforge/models/uncertainty.hpp"
#include "alforge/nn/checkpoint.hpp"
#include "alforge/nn/layers.hpp"

namespace alforge::models {

/// Two-level encoder-decoder with skip connections. Dropout follows each
/// decoder stage; the output has two channels per pixel: foreground logit
/// and log variance.
class SegmentationModel {
public:
  SegmentationModel() = default;
  SegmentationModel(int features, double dropout_rate, RngStream& rng);

  double dropout_rate() const { return dropout_rate_; }
  void set_dropout_rate(double rate) { dropout_rate_ = rate; }
  int features() const { return features_; }

  /// [N, 1, H, W] -> [N, 2, H, W]; dropout when `rng` is non-null.
  nn::Tensor forward(const nn::Tensor& x, RngStream* rng) const;

  void visit(const std::string& prefix, const nn::ParameterVisitor& v);

private:
  int features_ = 0;
  double dropout_rate_ = 0.5;
  nn::Conv2d enc1a_, enc1b_, enc2a_, enc2b_, mid_, dec2_, dec1_, out_;
};

/// Trains from scratch. Throws a data error for an empty labeled set.
SegmentationModel train_segmenter(const std::vector<ImageSample>& labeled, const ExperimentConfig& config,
                                  RngStream& rng);
/// Deterministic foreground mask (probability > 0.5).
Mask predict_mask(const SegmentationModel& model, const Image& image);
PixelMCSamples mc_forward(const SegmentationModel& model, const Image& image, int samples, RngStream& rng);
double image_uncertainty(const SegmentationModel& model, const Image& image, const ExperimentConfig& config,
                         RngStream& rng);

nn::Checkpoint to_checkpoint(SegmentationModel& model);
SegmentationModel segmenter_from_checkpoint(const nn::Checkpoint& checkpoint);

}  // namespace alforge::models
