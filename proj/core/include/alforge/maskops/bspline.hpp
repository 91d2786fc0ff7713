#pragma once

#include <vector>

#include "alforge/core/grid.hpp"
#include "alforge/maskops/contour.hpp"

namespace alforge::maskops {

/// Samples the closed uniform cubic B-spline whose control polygon is
/// `control`, `per_span` points per span.
std::vector<PointD> sample_closed_bspline(const std::vector<PointD>& control, int per_span);

/// True when any two non-adjacent edges of the closed polygon intersect.
bool polygon_self_intersects(const std::vector<PointD>& polygon);

/// Pixels whose centre lies inside the closed polygon (even-odd rule) plus
/// every pixel the polygon passes through.
Mask rasterize_closed_curve(const std::vector<PointD>& polygon, int rows, int cols);

}  // namespace alforge::maskops
