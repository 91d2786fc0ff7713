#pragma once

#include <string>
#include <vector>

#include "alforge/core/config.hpp"
#include "alforge/core/manifest.hpp"
#include "alforge/core/rng.hpp"

namespace alforge {

struct InitialSplit {
  std::vector<std::string> labeled_seed;  // initial_per_class per class
  std::vector<std::string> pool;          // train \ labeled_seed, manifest order
  std::vector<std::string> test;
};

/// Draws the labeled seed set uniformly per class from the train split.
InitialSplit split_initial(const DatasetManifest& manifest, const ExperimentConfig& config, RngStream& rng);

}  // namespace alforge
