#include "alforge/maskops/contour.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "alforge/core/error.hpp"

namespace alforge::maskops {
namespace {

// Clockwise on screen, starting west.
constexpr int kDirRow[8] = {0, -1, -1, -1, 0, 1, 1, 1};
constexpr int kDirCol[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

int direction_of(int dr, int dc) {
  for (int d = 0; d < 8; ++d)
    if (kDirRow[d] == dr && kDirCol[d] == dc) return d;
  return -1;
}

Grid<int> label_components(const Mask& mask, std::vector<std::size_t>& sizes) {
  Grid<int> labels(mask.rows(), mask.cols(), -1);
  sizes.clear();
  std::vector<PixelPoint> stack;
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask(r, c) || labels(r, c) >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      std::size_t size = 0;
      labels(r, c) = id;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const PixelPoint p = stack.back();
        stack.pop_back();
        ++size;
        for (int d = 0; d < 8; ++d) {
          const int nr = p.row + kDirRow[d], nc = p.col + kDirCol[d];
          if (mask.in_bounds(nr, nc) && mask(nr, nc) && labels(nr, nc) < 0) {
            labels(nr, nc) = id;
            stack.push_back({nr, nc});
          }
        }
      }
      sizes.push_back(size);
    }
  }
  return labels;
}

}  // namespace

Mask largest_component(const Mask& mask) {
  std::vector<std::size_t> sizes;
  const Grid<int> labels = label_components(mask, sizes);
  Mask out(mask.rows(), mask.cols());
  if (sizes.empty()) return out;
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) out(r, c) = labels(r, c) == best ? 1 : 0;
  return out;
}

int count_components(const Mask& mask) {
  std::vector<std::size_t> sizes;
  label_components(mask, sizes);
  return static_cast<int>(sizes.size());
}

double signed_area2(const std::vector<PointD>& polygon) {
  double a = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PointD& p = polygon[i];
    const PointD& q = polygon[(i + 1) % n];
    a += p.col * (-q.row) - q.col * (-p.row);
  }
  return a;
}

BoundaryContour extract_boundary(const Mask& input) {
  const Mask mask = largest_component(input);
  PixelPoint start{-1, -1};
  for (int r = 0; r < mask.rows() && start.row < 0; ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (mask(r, c)) {
        start = {r, c};
        break;
      }
  if (start.row < 0) throw_error(ErrorCategory::Data, "extract_boundary: empty mask");

  auto fg = [&](int r, int c) { return mask.in_bounds(r, c) && mask(r, c) != 0; };

  // Moore-neighbour tracing; the pixel west of the raster-first pixel is
  // background by construction.
  std::vector<PixelPoint> raw;
  PixelPoint cur = start;
  int back = 0;
  const int start_back = back;
  const std::size_t limit = 4 * mask.size() + 8;
  while (raw.size() < limit) {
    raw.push_back(cur);
    bool moved = false;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      const int nr = cur.row + kDirRow[d], nc = cur.col + kDirCol[d];
      if (!fg(nr, nc)) continue;
      const int pd = (d + 7) % 8;
      const int br = cur.row + kDirRow[pd], bc = cur.col + kDirCol[pd];
      back = direction_of(br - nr, bc - nc);
      cur = {nr, nc};
      moved = true;
      break;
    }
    if (!moved) break;  // isolated pixel
    if (cur == start && back == start_back) break;
  }

  // Drop excursions that revisit a pixel (one-pixel spurs), keeping the
  // sequence 8-connected and free of repeats.
  std::vector<PixelPoint> pts;
  std::unordered_map<long long, std::size_t> where;
  auto key = [&](const PixelPoint& p) { return static_cast<long long>(p.row) * mask.cols() + p.col; };
  for (const PixelPoint& p : raw) {
    if (auto it = where.find(key(p)); it != where.end()) {
      const std::size_t keep = it->second + 1;
      for (std::size_t i = keep; i < pts.size(); ++i) where.erase(key(pts[i]));
      pts.resize(keep);
      continue;
    }
    where.emplace(key(p), pts.size());
    pts.push_back(p);
  }

  BoundaryContour contour;
  contour.closed = true;
  contour.points = std::move(pts);
  std::vector<PointD> poly;
  poly.reserve(contour.points.size());
  for (const auto& p : contour.points) poly.push_back({static_cast<double>(p.row), static_cast<double>(p.col)});
  if (contour.points.size() > 2 && signed_area2(poly) < 0) {
    std::reverse(contour.points.begin() + 1, contour.points.end());
  }
  return contour;
}

std::vector<PointD> outward_normals(const BoundaryContour& contour) {
  const int n = static_cast<int>(contour.points.size());
  std::vector<PointD> normals(n);
  if (n < 3) return normals;
  for (int i = 0; i < n; ++i) {
    const PixelPoint& a = contour.points[(i - 2 + 2 * n) % n];
    const PixelPoint& b = contour.points[(i + 2) % n];
    const double tr = b.row - a.row, tc = b.col - a.col;
    // Counter-clockwise on screen: outward is the tangent turned by (dc, -dr).
    double nr = tc, nc = -tr;
    const double len = std::hypot(nr, nc);
    if (len > 0) {
      nr /= len;
      nc /= len;
    }
    normals[i] = {nr, nc};
  }
  return normals;
}

std::vector<PixelPoint> boundary_pixels(const Mask& mask) {
  std::vector<PixelPoint> out;
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask(r, c)) continue;
      const bool edge = !mask.in_bounds(r - 1, c) || !mask(r - 1, c) || !mask.in_bounds(r + 1, c) ||
                        !mask(r + 1, c) || !mask.in_bounds(r, c - 1) || !mask(r, c - 1) ||
                        !mask.in_bounds(r, c + 1) || !mask(r, c + 1);
      if (edge) out.push_back({r, c});
    }
  return out;
}

}  // namespace alforge::maskops
