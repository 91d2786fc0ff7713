#include "alforge/maskops/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace alforge::maskops {
namespace {

double cross(const PointD& o, const PointD& a, const PointD& b) {
  return (a.col - o.col) * (b.row - o.row) - (a.row - o.row) * (b.col - o.col);
}

bool on_segment(const PointD& p, const PointD& q, const PointD& r) {
  return std::min(p.col, r.col) <= q.col && q.col <= std::max(p.col, r.col) && std::min(p.row, r.row) <= q.row &&
         q.row <= std::max(p.row, r.row);
}

bool segments_intersect(const PointD& p1, const PointD& p2, const PointD& p3, const PointD& p4) {
  if (std::max(p1.col, p2.col) < std::min(p3.col, p4.col) || std::max(p3.col, p4.col) < std::min(p1.col, p2.col) ||
      std::max(p1.row, p2.row) < std::min(p3.row, p4.row) || std::max(p3.row, p4.row) < std::min(p1.row, p2.row))
    return false;
  const double d1 = cross(p3, p4, p1), d2 = cross(p3, p4, p2);
  const double d3 = cross(p1, p2, p3), d4 = cross(p1, p2, p4);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(p3, p1, p4)) return true;
  if (d2 == 0 && on_segment(p3, p2, p4)) return true;
  if (d3 == 0 && on_segment(p1, p3, p2)) return true;
  if (d4 == 0 && on_segment(p1, p4, p2)) return true;
  return false;
}

}  // namespace

std::vector<PointD> sample_closed_bspline(const std::vector<PointD>& control, int per_span) {
  const int n = static_cast<int>(control.size());
  std::vector<PointD> out;
  if (n == 0) return out;
  if (n < 3) return control;
  out.reserve(static_cast<std::size_t>(n) * per_span);
  for (int i = 0; i < n; ++i) {
    const PointD& p0 = control[(i - 1 + n) % n];
    const PointD& p1 = control[i];
    const PointD& p2 = control[(i + 1) % n];
    const PointD& p3 = control[(i + 2) % n];
    for (int s = 0; s < per_span; ++s) {
      const double t = static_cast<double>(s) / per_span;
      const double t2 = t * t, t3 = t2 * t;
      const double b0 = (1 - t) * (1 - t) * (1 - t) / 6.0;
      const double b1 = (3 * t3 - 6 * t2 + 4) / 6.0;
      const double b2 = (-3 * t3 + 3 * t2 + 3 * t + 1) / 6.0;
      const double b3 = t3 / 6.0;
      out.push_back({b0 * p0.row + b1 * p1.row + b2 * p2.row + b3 * p3.row,
                     b0 * p0.col + b1 * p1.col + b2 * p2.col + b3 * p3.col});
    }
  }
  return out;
}

bool polygon_self_intersects(const std::vector<PointD>& poly) {
  const std::size_t n = poly.size();
  if (n < 4) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const PointD& a = poly[i];
    const PointD& b = poly[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closure
      if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return true;
    }
  }
  return false;
}

Mask rasterize_closed_curve(const std::vector<PointD>& poly, int rows, int cols) {
  Mask mask(rows, cols);
  const std::size_t n = poly.size();
  if (n == 0) return mask;
  std::vector<double> xs;
  for (int r = 0; r < rows; ++r) {
    xs.clear();
    const double y = r;
    for (std::size_t i = 0; i < n; ++i) {
      const PointD& a = poly[i];
      const PointD& b = poly[(i + 1) % n];
      if ((a.row <= y && b.row > y) || (b.row <= y && a.row > y)) {
        xs.push_back(a.col + (y - a.row) / (b.row - a.row) * (b.col - a.col));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int c1 = std::min(cols - 1, static_cast<int>(std::floor(xs[k + 1])));
      for (int c = c0; c <= c1; ++c) mask(r, c) = 1;
    }
  }
  // The curve's own pixels, walked at sub-pixel spacing.
  for (std::size_t i = 0; i < n; ++i) {
    const PointD& a = poly[i];
    const PointD& b = poly[(i + 1) % n];
    const double len = std::hypot(b.row - a.row, b.col - a.col);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
    for (int s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const int r = static_cast<int>(std::lround(a.row + t * (b.row - a.row)));
      const int c = static_cast<int>(std::lround(a.col + t * (b.col - a.col)));
      if (mask.in_bounds(r, c)) mask(r, c) = 1;
    }
  }
  return mask;
}

}  // namespace alforge::maskops
