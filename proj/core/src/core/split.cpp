#include "alforge/core/split.hpp"

#include <set>

#include "alforge/core/error.hpp"

namespace alforge {

InitialSplit split_initial(const DatasetManifest& manifest, const ExperimentConfig& config, RngStream& rng) {
  std::vector<std::string> per_class[kNumClasses];
  InitialSplit split;
  for (const auto& r : manifest.records) {
    if (r.split == Split::Test) {
      split.test.push_back(r.id());
    } else {
      per_class[class_index(r.label)].push_back(r.id());
    }
  }
  std::set<std::string> chosen;
  for (int k = 0; k < kNumClasses; ++k) {
    auto& ids = per_class[k];
    if (static_cast<int>(ids.size()) < config.initial_per_class) {
      throw_error(ErrorCategory::Data, "split: class '" + std::string(to_string(label_from_index(k))) + "' has " +
                                           std::to_string(ids.size()) + " train samples, need " +
                                           std::to_string(config.initial_per_class));
    }
    std::vector<std::string> shuffled = ids;
    rng.shuffle(shuffled);
    for (int i = 0; i < config.initial_per_class; ++i) {
      split.labeled_seed.push_back(shuffled[i]);
      chosen.insert(shuffled[i]);
    }
  }
  for (const auto& r : manifest.records) {
    if (r.split == Split::Train && !chosen.contains(r.id())) split.pool.push_back(r.id());
  }
  return split;
}

}  // namespace alforge
