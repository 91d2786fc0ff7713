#pragma once

#include <span>
#include <string>
#include <vector>

#include "alforge/core/sample.hpp"

namespace alforge::metrics {

struct PoolEntry {
  std::string id;
  std::size_t pixels = 0;
  Provenance provenance = Provenance::Real;
};

struct Savings {
  double pixel_fraction = 0.0;
  double savings = 0.0;
};

/// Annotated share of the pool's real pixels. Synthetic entries are never
/// annotated and do not count toward either total.
Savings annotation_savings(std::span<const std::string> labeled_ids, std::span<const PoolEntry> pool);
std::vector<PoolEntry> pool_entries(std::span<const ImageSample> samples);

}  // namespace alforge::metrics
