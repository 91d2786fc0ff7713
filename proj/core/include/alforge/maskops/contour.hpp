#pragma once

#include <vector>

#include "alforge/core/grid.hpp"

namespace alforge::maskops {

struct PixelPoint {
  int row = 0;
  int col = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct PointD {
  double row = 0.0;
  double col = 0.0;
};

/// Closed outer contour: consecutive points are 8-neighbours, the last is
/// adjacent to the first, and no point repeats.
struct BoundaryContour {
  std::vector<PixelPoint> points;
  bool closed = true;
};

/// 8-connected components; returns the mask of the largest (ties: first in
/// raster order). Empty input gives an empty mask.
Mask largest_component(const Mask& mask);
int count_components(const Mask& mask);

/// Outer contour of the largest component, counter-clockwise as seen on
/// screen (rows growing downward). Throws a data error for an empty mask.
BoundaryContour extract_boundary(const Mask& mask);

/// Twice the signed area with x = col, y = -row; positive when the polygon
/// runs counter-clockwise on screen.
double signed_area2(const std::vector<PointD>& polygon);

/// Unit outward normal at each contour point, estimated from the chord
/// between the points two steps behind and ahead.
std::vector<PointD> outward_normals(const BoundaryContour& contour);

/// Foreground pixels having at least one 4-neighbour outside the mask (or
/// on the grid border).
std::vector<PixelPoint> boundary_pixels(const Mask& mask);

}  // namespace alforge::maskops
