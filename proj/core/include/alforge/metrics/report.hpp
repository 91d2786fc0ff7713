#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace alforge::metrics {

/// One evaluation on the held-out set. Dice and HD are NaN when the
/// segmentation task is disabled.
struct EvalReport {
  double sens = 0.0;
  double spec = 0.0;
  double auc = 0.0;
  double dice = std::numeric_limits<double>::quiet_NaN();
  double hd = std::numeric_limits<double>::quiet_NaN();
  double labeled_fraction = 0.0;
  double pixel_fraction = 0.0;
};

struct ReportRow {
  int round = 0;
  std::size_t labeled_count = 0;
  EvalReport report;
};

inline constexpr const char* kReportHeader =
    "round,labeled_count,labeled_fraction,pixel_fraction,sens,spec,auc,dice,hd";

/// Comma-separated, full precision, "NA" for missing values. No newline.
std::string format_row(const ReportRow& row);
ReportRow parse_row(const std::string& line);
/// Header plus one line per row.
std::string format_report(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report(const std::string& text);
/// Table-style summary: fractions and rates x100 with one decimal, HD in px.
std::string format_human(const EvalReport& report);

}  // namespace alforge::metrics
