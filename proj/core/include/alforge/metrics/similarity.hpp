#pragma once

#include "alforge/core/grid.hpp"
#include "alforge/metrics/feature_extractor.hpp"
#include "alforge/nn/tensor.hpp"

namespace alforge::metrics {

inline constexpr int kDefaultNmiBins = 64;

/// 2 I(X;Y) / (H(X) + H(Y)) from the joint histogram with `bins` equal-width
/// bins on [0, 1]. Two constant images score 1.
double nmi(const Image& x, const Image& y, int bins = kDefaultNmiBins);
double mse(const Image& x, const Image& y);
/// Mean squared difference between the two embeddings.
double feature_distance(const Image& x, const Image& y, const FeatureExtractor& feat);

/// Differentiable NMI: the histogram is replaced by a cubic B-spline Parzen
/// window on the same bin centres. [N, 1, H, W] x2 -> [N].
nn::Tensor soft_nmi(const nn::Tensor& x, const nn::Tensor& y, int bins = kDefaultNmiBins);

}  // namespace alforge::metrics
