#include "alforge/metrics/savings.hpp"

#include <unordered_map>
#include <unordered_set>

#include "alforge/core/error.hpp"

namespace alforge::metrics {

Savings annotation_savings(std::span<const std::string> labeled_ids, std::span<const PoolEntry> pool) {
  if (pool.empty()) throw_error(ErrorCategory::Data, "annotation_savings: empty pool");
  std::unordered_map<std::string, const PoolEntry*> by_id;
  std::size_t total = 0;
  for (const auto& e : pool) {
    if (!by_id.emplace(e.id, &e).second) throw_error(ErrorCategory::Data, "annotation_savings: duplicate id " + e.id);
    if (e.provenance == Provenance::Real) total += e.pixels;
  }
  if (total == 0) throw_error(ErrorCategory::Data, "annotation_savings: pool has no real pixels");

  std::unordered_set<std::string> seen;
  std::size_t labeled = 0;
  for (const auto& id : labeled_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw_error(ErrorCategory::Data, "annotation_savings: labeled id not in pool: " + id);
    if (!seen.insert(id).second) continue;
    if (it->second->provenance == Provenance::Real) labeled += it->second->pixels;
  }
  const double t = static_cast<double>(total);
  return {static_cast<double>(labeled) / t, static_cast<double>(total - labeled) / t};
}

std::vector<PoolEntry> pool_entries(std::span<const ImageSample> samples) {
  std::vector<PoolEntry> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.id, s.pixels.size(), s.provenance});
  return out;
}

}  // namespace alforge::metrics
