#pragma once

#include <vector>

namespace alforge::models {

/// T paired draws of a unary output and its predicted variance.
struct MCSampleSet {
  std::vector<double> y;
  std::vector<double> variance;

  int size() const { return static_cast<int>(y.size()); }
};

/// Throws a data error unless T >= 1, the two lists pair up, every value is
/// finite and every variance is non-negative.
void validate(const MCSampleSet& samples);

struct UncertaintyScore {
  double total = 0.0;
  double epistemic = 0.0;
  double aleatoric = 0.0;
};

/// epistemic = mean(y^2) - mean(y)^2, aleatoric = mean(variance),
/// total = epistemic + aleatoric.
UncertaintyScore predictive_uncertainty(const MCSampleSet& samples);

/// Variance of sigmoid(logit + exp(log_var / 2) * eps) for standard normal
/// eps, by 24-point Gauss-Hermite quadrature. Bounded by 1/4.
double sigmoid_noise_variance(double logit, double log_var);

/// T draws of a per-pixel output, sample-major: y[t * pixels + i].
struct PixelMCSamples {
  int samples = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> y;
  std::vector<double> variance;

  std::size_t pixels() const { return static_cast<std::size_t>(rows) * cols; }
  MCSampleSet at(std::size_t pixel) const;
};

/// Mean over all pixels of the per-pixel total.
double mean_pixel_uncertainty(const PixelMCSamples& samples);

}  // namespace alforge::models
