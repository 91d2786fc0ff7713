#include "alforge/metrics/classification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "alforge/core/error.hpp"

namespace alforge::metrics {

double auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw_error(ErrorCategory::Data, "auc: scores and labels differ in length");
  std::size_t pos = 0;
  for (Label l : labels) pos += l == Label::Nodule;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw_error(ErrorCategory::Data, "auc: labels must contain both classes");
  for (double s : scores)
    if (!std::isfinite(s)) throw_error(ErrorCategory::Data, "auc: non-finite score");

  // Mann-Whitney: sum of positive ranks with mid-ranks for ties.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == Label::Nodule) rank_sum += mid;
    i = j;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  return (rank_sum - p * (p + 1) / 2.0) / (p * q);
}

ClassificationMetrics sens_spec_auc(std::span<const double> scores, std::span<const Label> labels) {
  ClassificationMetrics m;
  m.auc = auc(scores, labels);
  std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= kDecisionThreshold;
    if (labels[i] == Label::Nodule) {
      ++pos;
      tp += predicted;
    } else {
      ++neg;
      tn += !predicted;
    }
  }
  m.sensitivity = static_cast<double>(tp) / pos;
  m.specificity = static_cast<double>(tn) / neg;
  return m;
}

}  // namespace alforge::metrics
