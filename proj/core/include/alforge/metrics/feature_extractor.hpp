#pragma once

#include <string>
#include <vector>

#include "alforge/core/rng.hpp"
#include "alforge/core/sample.hpp"
#include "alforge/nn/layers.hpp"

namespace alforge::metrics {

/// Small frozen convolutional network. The embedding is the rectified output
/// of its last convolution: 2F maps at a quarter of the input resolution.
class FeatureExtractor {
public:
  FeatureExtractor() = default;
  FeatureExtractor(int features, RngStream& rng);

  /// [N, 1, H, W] -> [N, 2F, H/4, W/4]; differentiable in the input.
  nn::Tensor forward(const nn::Tensor& x) const;
  nn::Tensor embed(const Image& image) const;
  int map_count() const { return 2 * features_; }
  int features() const { return features_; }
  bool empty() const { return convs_.empty(); }

  void visit(const std::string& prefix, const nn::ParameterVisitor& v);

private:
  int features_ = 0;
  std::vector<nn::Conv2d> convs_;
};

/// Trains the extractor as the body of a binary classifier (global average
/// pool + linear head, head discarded afterwards).
FeatureExtractor train_feature_extractor(const std::vector<ImageSample>& samples, int features, int steps,
                                         double learning_rate, RngStream& rng);

}  // namespace alforge::metrics
