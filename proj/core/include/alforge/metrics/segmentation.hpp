#pragma once

#include "alforge/core/grid.hpp"

namespace alforge::metrics {

/// 2|A n B| / (|A| + |B|); two empty masks score 1.
double dice(const Mask& a, const Mask& b);
/// Symmetric Hausdorff distance in pixels between the boundary pixel sets
/// (4-neighbour erosion difference). Throws a data error for an empty mask.
double hausdorff(const Mask& a, const Mask& b);

}  // namespace alforge::metrics
