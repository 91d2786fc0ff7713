#include "alforge/alloop/selection.hpp"

#include <algorithm>
#include <cmath>

#include "alforge/core/error.hpp"

namespace alforge::alloop {

RankedCandidates rank_candidates(const std::vector<ScoredCandidate>& scored) {
  RankedCandidates out;
  for (const auto& c : scored) {
    if (!std::isfinite(c.score)) throw_error(ErrorCategory::Data, "rank_candidates: non-finite score for " + c.id);
    out.per_class[class_index(c.label)].push_back(c);
  }
  for (auto& list : out.per_class)
    std::stable_sort(list.begin(), list.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.id < b.id;
    });
  return out;
}

SelectionResult select_balanced(const RankedCandidates& ranked, int k_per_class,
                                const std::set<std::string>& labeled) {
  if (k_per_class < 1) throw_error(ErrorCategory::Config, "select_balanced: k must be positive");
  SelectionResult out;
  for (int c = 0; c < kNumClasses; ++c) {
    for (const auto& cand : ranked.per_class[c]) {
      if (static_cast<int>(out.chosen[c].size()) == k_per_class) break;
      if (labeled.contains(cand.id)) continue;
      if (std::find(out.chosen[c].begin(), out.chosen[c].end(), cand.id) != out.chosen[c].end()) continue;
      out.chosen[c].push_back(cand.id);
      out.scores[c].push_back(cand.score);
    }
    if (static_cast<int>(out.chosen[c].size()) < k_per_class) out.shortfall = true;
  }
  if (out.total() == 0) throw_error(ErrorCategory::PoolExhausted, "pool exhausted");
  return out;
}

}  // namespace alforge::alloop
