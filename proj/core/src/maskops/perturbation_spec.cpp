#include "alforge/maskops/perturbation_spec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "alforge/core/error.hpp"

namespace alforge::maskops {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

const std::string& field(const std::map<std::string, std::string>& fields, const std::string& key) {
  auto it = fields.find("perturbation." + key);
  if (it == fields.end()) throw_error(ErrorCategory::Data, "perturbation block lacks '" + key + "'");
  return it->second;
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = std::stod(text, &used);
  if (used != text.size()) throw_error(ErrorCategory::Data, "bad number '" + text + "'");
  return v;
}

}  // namespace

bool PerturbationSpec::uses(Procedure p) const {
  return std::find(procedures.begin(), procedures.end(), p) != procedures.end();
}

bool on_parameter_grid(double v, double lo, double hi) {
  if (!(v >= lo - 1e-9 && v <= hi + 1e-9)) return false;
  const double steps = (v - lo) / kGridStep;
  return std::abs(steps - std::round(steps)) < 1e-6;
}

void validate(const PerturbationSpec& spec) {
  auto fail = [](const std::string& what) { throw_error(ErrorCategory::Config, "invalid perturbation: " + what); };
  if (spec.points_per_segment < 4) fail("points_per_segment must be >= 4");
  if (spec.uses(Procedure::BoundaryDisplacement)) {
    if (spec.n_segments < 1) fail("n_segments must be >= 1");
    if (static_cast<int>(spec.segment_starts.size()) != spec.n_segments) fail("segment_starts count");
    if (static_cast<int>(spec.displacement_px.size()) != spec.n_segments * spec.points_per_segment)
      fail("displacement count must equal n_segments * points_per_segment");
    for (double d : spec.displacement_px) {
      const double m = std::abs(d);
      if (m < kMinDisplacement || m > kMaxDisplacement) fail("displacement magnitude outside [1, 15]");
    }
  }
  if (spec.uses(Procedure::IntensityRemap)) {
    if (!on_parameter_grid(spec.alpha, kAlphaMin, kAlphaMax)) fail("alpha not on [1, 5] step 0.2 grid");
    if (!on_parameter_grid(spec.beta, kBetaMin, kBetaMax)) fail("beta not on [2, 10] step 0.2 grid");
  }
}

std::string_view to_string(FillMode mode) {
  return mode == FillMode::Interpolate ? "interpolate" : "sample_distribution";
}

std::string_view to_string(Flip flip) {
  switch (flip) {
    case Flip::None: return "none";
    case Flip::Horizontal: return "horizontal";
    case Flip::Vertical: return "vertical";
  }
  return "none";
}

std::string_view to_string(Procedure procedure) {
  switch (procedure) {
    case Procedure::BoundaryDisplacement: return "boundary";
    case Procedure::IntensityRemap: return "remap";
    case Procedure::StandardAugment: return "augment";
  }
  return "";
}

FillMode parse_fill_mode(std::string_view text) {
  if (text == "interpolate") return FillMode::Interpolate;
  if (text == "sample_distribution") return FillMode::SampleDistribution;
  throw_error(ErrorCategory::Data, "unknown fill mode '" + std::string(text) + "'");
}

Flip parse_flip(std::string_view text) {
  if (text == "none") return Flip::None;
  if (text == "horizontal") return Flip::Horizontal;
  if (text == "vertical") return Flip::Vertical;
  throw_error(ErrorCategory::Data, "unknown flip '" + std::string(text) + "'");
}

Procedure parse_procedure(std::string_view text) {
  if (text == "boundary") return Procedure::BoundaryDisplacement;
  if (text == "remap") return Procedure::IntensityRemap;
  if (text == "augment") return Procedure::StandardAugment;
  throw_error(ErrorCategory::Data, "unknown procedure '" + std::string(text) + "'");
}

std::string serialize(const PerturbationSpec& spec) {
  std::ostringstream out;
  out << "perturbation.procedures = "
      << join(spec.procedures, [](Procedure p) { return std::string(to_string(p)); }) << '\n'
      << "perturbation.n_segments = " << spec.n_segments << '\n'
      << "perturbation.points_per_segment = " << spec.points_per_segment << '\n'
      << "perturbation.segment_starts = " << join(spec.segment_starts, [](int v) { return std::to_string(v); }) << '\n'
      << "perturbation.displacement_px = " << join(spec.displacement_px, format_double) << '\n'
      << "perturbation.fill_mode = " << to_string(spec.fill_mode) << '\n'
      << "perturbation.alpha = " << format_double(spec.alpha) << '\n'
      << "perturbation.beta = " << format_double(spec.beta) << '\n'
      << "perturbation.flip = " << to_string(spec.flip) << '\n'
      << "perturbation.rotation_deg = " << format_double(spec.rotation_deg) << '\n'
      << "perturbation.translation_px = " << format_double(spec.translation_dy) << ','
      << format_double(spec.translation_dx) << '\n';
  return out.str();
}

PerturbationSpec deserialize(const std::map<std::string, std::string>& fields) {
  PerturbationSpec spec;
  for (const auto& p : split_csv(field(fields, "procedures"))) spec.procedures.push_back(parse_procedure(p));
  spec.n_segments = std::stoi(field(fields, "n_segments"));
  spec.points_per_segment = std::stoi(field(fields, "points_per_segment"));
  for (const auto& s : split_csv(field(fields, "segment_starts"))) spec.segment_starts.push_back(std::stoi(s));
  for (const auto& s : split_csv(field(fields, "displacement_px"))) spec.displacement_px.push_back(parse_double(s));
  spec.fill_mode = parse_fill_mode(field(fields, "fill_mode"));
  spec.alpha = parse_double(field(fields, "alpha"));
  spec.beta = parse_double(field(fields, "beta"));
  spec.flip = parse_flip(field(fields, "flip"));
  spec.rotation_deg = parse_double(field(fields, "rotation_deg"));
  const auto t = split_csv(field(fields, "translation_px"));
  if (t.size() != 2) throw_error(ErrorCategory::Data, "translation_px needs two components");
  spec.translation_dy = parse_double(t[0]);
  spec.translation_dx = parse_double(t[1]);
  return spec;
}

}  // namespace alforge::maskops
