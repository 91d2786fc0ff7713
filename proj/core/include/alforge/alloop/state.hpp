#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alforge/core/config.hpp"
#include "alforge/core/sample.hpp"
#include "alforge/metrics/report.hpp"
#include "alforge/models/classifier.hpp"

namespace alforge::alloop {

enum class StopReason { None, Plateau, PoolExhausted, MaxRounds };
std::string_view to_string(StopReason reason);
StopReason parse_stop_reason(std::string_view text);

struct CandidateRecord {
  std::string id;
  std::string source_id;
  Label label = Label::Normal;
  double score = 0.0;
};

struct ALState {
  int round = 0;
  /// Annotated real images in order of annotation; the seed set comes first.
  std::vector<std::string> labeled_ids;
  /// Selected synthetic samples; they train the model alongside their
  /// annotated parents.
  std::vector<ImageSample> synthetic_labeled;
  /// Every candidate scored in the most recent round.
  std::vector<CandidateRecord> candidate_records;
  std::vector<metrics::ReportRow> history;
  bool stopped = false;
  StopReason reason = StopReason::None;
  ExperimentConfig config;
  /// Engine state of the run's root stream.
  std::string rng_state;
  models::ClassifierModel classifier;
};

inline constexpr std::uint32_t kStateFormat = 1;

/// Versioned single-file archive; written atomically.
void save_state(const std::filesystem::path& path, ALState& state);
ALState load_state(const std::filesystem::path& path);

}  // namespace alforge::alloop
