#include "alforge/metrics/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alforge/core/error.hpp"
#include "alforge/maskops/contour.hpp"

namespace alforge::metrics {
namespace {

using maskops::PixelPoint;

// Directed distance with early break: for each point of `from`, stop
// scanning `to` once a point closer than the running maximum is found.
double directed(const std::vector<PixelPoint>& from, const std::vector<PixelPoint>& to) {
  long best = 0;
  for (const auto& p : from) {
    long nearest = std::numeric_limits<long>::max();
    for (const auto& q : to) {
      const long dr = p.row - q.row, dc = p.col - q.col;
      nearest = std::min(nearest, dr * dr + dc * dc);
      if (nearest < best) break;
    }
    best = std::max(best, nearest);
  }
  return std::sqrt(static_cast<double>(best));
}

}  // namespace

double dice(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw_error(ErrorCategory::Data, "dice: masks differ in shape");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.values()[i] != 0, y = b.values()[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double hausdorff(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw_error(ErrorCategory::Data, "hausdorff: masks differ in shape");
  const auto ba = maskops::boundary_pixels(a), bb = maskops::boundary_pixels(b);
  if (ba.empty() || bb.empty()) throw_error(ErrorCategory::Data, "hausdorff: empty mask");
  return std::max(directed(ba, bb), directed(bb, ba));
}

}  // namespace alforge::metrics
