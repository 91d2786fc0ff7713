#include "alforge/metrics/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "alforge/core/error.hpp"
#include "alforge/nn/image_tensor.hpp"
#include "alforge/nn/ops.hpp"

namespace alforge::metrics {
namespace {

void check_pair(const Image& x, const Image& y, const char* what) {
  if (!x.same_shape(y) || x.empty())
    throw_error(ErrorCategory::Data, std::string(what) + ": images must be nonempty and equally sized");
}

int bin_of(double v, int bins) {
  const int b = static_cast<int>(std::clamp(v, 0.0, 1.0) * bins);
  return std::min(b, bins - 1);
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0) h -= (c / n) * std::log(c / n);
  return h;
}

}  // namespace

double nmi(const Image& x, const Image& y, int bins) {
  check_pair(x, y, "nmi");
  if (bins < 2) throw_error(ErrorCategory::Config, "nmi: bins must be at least 2");
  std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0), px(bins, 0.0), py(bins, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int a = bin_of(x.values()[i], bins), b = bin_of(y.values()[i], bins);
    joint[static_cast<std::size_t>(a) * bins + b] += 1;
    px[a] += 1;
    py[b] += 1;
  }
  const double n = static_cast<double>(x.size());
  const double hx = entropy(px, n), hy = entropy(py, n), hxy = entropy(joint, n);
  if (hx + hy == 0.0) return 1.0;
  return std::clamp(2.0 * (hx + hy - hxy) / (hx + hy), 0.0, 1.0);
}

double mse(const Image& x, const Image& y) {
  check_pair(x, y, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.values()[i] - y.values()[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

double feature_distance(const Image& x, const Image& y, const FeatureExtractor& feat) {
  check_pair(x, y, "feature_distance");
  nn::NoGradGuard guard;
  const nn::Tensor fx = feat.embed(x), fy = feat.embed(y);
  double s = 0.0;
  for (std::size_t i = 0; i < fx.numel(); ++i) {
    const double d = fx.data()[i] - fy.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(fx.numel());
}

}  // namespace alforge::metrics
