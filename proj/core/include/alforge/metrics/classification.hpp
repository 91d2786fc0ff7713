#pragma once

#include <span>

#include "alforge/core/sample.hpp"

namespace alforge::metrics {

struct ClassificationMetrics {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double auc = 0.0;
};

inline constexpr double kDecisionThreshold = 0.5;

/// Scores are positive-class probabilities; a score >= 0.5 predicts
/// nodule. AUC is the rank statistic with ties counted as 1/2. Throws a
/// data error unless both classes are present.
ClassificationMetrics sens_spec_auc(std::span<const double> scores, std::span<const Label> labels);
double auc(std::span<const double> scores, std::span<const Label> labels);

}  // namespace alforge::metrics
