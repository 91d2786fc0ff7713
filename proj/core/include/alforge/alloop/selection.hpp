#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "alforge/core/sample.hpp"

namespace alforge::alloop {

struct ScoredCandidate {
  std::string id;
  Label label = Label::Normal;
  double score = 0.0;
};

/// Candidates split by class (index: class_index(label)), each ordered by
/// descending score with ties broken by ascending id.
struct RankedCandidates {
  std::array<std::vector<ScoredCandidate>, kNumClasses> per_class;
};

/// Throws a data error on a non-finite score.
RankedCandidates rank_candidates(const std::vector<ScoredCandidate>& scored);

struct SelectionResult {
  std::array<std::vector<std::string>, kNumClasses> chosen;
  std::array<std::vector<double>, kNumClasses> scores;
  /// Some class offered fewer than k eligible candidates.
  bool shortfall = false;
  std::size_t total() const { return chosen[0].size() + chosen[1].size(); }
};

/// Top `k_per_class` of each class, skipping ids in `labeled`. Throws a
/// pool-exhausted error when neither class has an eligible candidate.
SelectionResult select_balanced(const RankedCandidates& ranked, int k_per_class,
                                const std::set<std::string>& labeled = {});

}  // namespace alforge::alloop
