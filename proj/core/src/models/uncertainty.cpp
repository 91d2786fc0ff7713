#include "alforge/models/uncertainty.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "alforge/core/error.hpp"

namespace alforge::models {
namespace {

constexpr int kHermiteNodes = 24;

struct Quadrature {
  std::array<double, kHermiteNodes> node{};    // already scaled by sqrt(2)
  std::array<double, kHermiteNodes> weight{};  // sums to 1
};

// Golub-Welsch on the Jacobi matrix of the physicists' Hermite polynomials.
Quadrature make_quadrature() {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(kHermiteNodes, kHermiteNodes);
  for (int k = 1; k < kHermiteNodes; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(k / 2.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  Quadrature q;
  for (int k = 0; k < kHermiteNodes; ++k) {
    q.node[k] = std::numbers::sqrt2 * es.eigenvalues()(k);
    q.weight[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
  return q;
}

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

double sigmoid_noise_variance(double logit, double log_var) {
  static const Quadrature q = make_quadrature();
  const double sd = std::exp(0.5 * log_var);
  double m1 = 0.0, m2 = 0.0;
  for (int k = 0; k < kHermiteNodes; ++k) {
    const double p = sigmoid(logit + sd * q.node[k]);
    m1 += q.weight[k] * p;
    m2 += q.weight[k] * p * p;
  }
  return std::max(0.0, m2 - m1 * m1);
}

void validate(const MCSampleSet& s) {
  if (s.y.empty()) throw_error(ErrorCategory::Data, "MCSampleSet: needs at least one sample");
  if (s.y.size() != s.variance.size())
    throw_error(ErrorCategory::Data, "MCSampleSet: outputs and variances differ in count");
  for (std::size_t t = 0; t < s.y.size(); ++t) {
    if (!std::isfinite(s.y[t]) || !std::isfinite(s.variance[t]))
      throw_error(ErrorCategory::Data, "MCSampleSet: non-finite sample");
    if (s.variance[t] < 0) throw_error(ErrorCategory::Data, "MCSampleSet: negative variance");
  }
}

UncertaintyScore predictive_uncertainty(const MCSampleSet& s) {
  validate(s);
  const double t = static_cast<double>(s.y.size());
  double sum = 0.0, var = 0.0;
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    sum += s.y[i];
    var += s.variance[i];
  }
  const double mean = sum / t;
  // Centred second pass: E[y^2] - E[y]^2 in closed form cancels badly.
  double spread = 0.0;
  for (const double y : s.y) spread += (y - mean) * (y - mean);
  UncertaintyScore u;
  u.epistemic = spread / t;
  u.aleatoric = var / t;
  u.total = u.epistemic + u.aleatoric;
  return u;
}

MCSampleSet PixelMCSamples::at(std::size_t pixel) const {
  MCSampleSet s;
  const std::size_t p = pixels();
  for (int t = 0; t < samples; ++t) {
    s.y.push_back(y[t * p + pixel]);
    s.variance.push_back(variance[t * p + pixel]);
  }
  return s;
}

double mean_pixel_uncertainty(const PixelMCSamples& samples) {
  const std::size_t p = samples.pixels();
  if (p == 0 || samples.samples < 1) throw_error(ErrorCategory::Data, "PixelMCSamples: empty");
  if (samples.y.size() != p * samples.samples || samples.variance.size() != samples.y.size())
    throw_error(ErrorCategory::Data, "PixelMCSamples: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p; ++i) s += predictive_uncertainty(samples.at(i)).total;
  return s / static_cast<double>(p);
}

}  // namespace alforge::models
