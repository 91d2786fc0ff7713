#include "alforge/metrics/report.hpp"

#include <cstdio>
#include <sstream>

#include "alforge/core/error.hpp"

namespace alforge::metrics {
namespace {

std::string real(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw_error(ErrorCategory::Data, "report: malformed number '" + s + "'");
}

std::string pct(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

}  // namespace

std::string format_row(const ReportRow& row) {
  const auto& r = row.report;
  std::ostringstream out;
  out << row.round << ',' << row.labeled_count << ',' << real(r.labeled_fraction) << ',' << real(r.pixel_fraction)
      << ',' << real(r.sens) << ',' << real(r.spec) << ',' << real(r.auc) << ',' << real(r.dice) << ','
      << real(r.hd);
  return out.str();
}

ReportRow parse_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) f.push_back(cell);
  if (f.size() != 9) throw_error(ErrorCategory::Data, "report: expected 9 fields in '" + line + "'");
  ReportRow row;
  row.round = static_cast<int>(parse_real(f[0]));
  row.labeled_count = static_cast<std::size_t>(parse_real(f[1]));
  row.report = {parse_real(f[4]), parse_real(f[5]), parse_real(f[6]), parse_real(f[7]),
                parse_real(f[8]), parse_real(f[2]), parse_real(f[3])};
  return row;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

std::vector<ReportRow> parse_report(const std::string& text) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader)
    throw_error(ErrorCategory::Data, "report: missing or unexpected header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_row(line));
  return rows;
}

std::string format_human(const EvalReport& r) {
  char hd[32] = "-";
  if (!std::isnan(r.hd)) std::snprintf(hd, sizeof hd, "%.1f", r.hd);
  std::ostringstream out;
  out << "labeled " << pct(r.labeled_fraction) << "%  pixels " << pct(r.pixel_fraction) << "%  Sens "
      << pct(r.sens) << "  Spec " << pct(r.spec) << "  AUC " << pct(r.auc) << "  DM " << pct(r.dice) << "  HD "
      << hd;
  return out.str();
}

}  // namespace alforge::metrics
