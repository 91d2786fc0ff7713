#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alforge::maskops {

enum class FillMode { Interpolate, SampleDistribution };
enum class Flip { None, Horizontal, Vertical };
/// The three synthetic-variation procedures.
enum class Procedure { BoundaryDisplacement, IntensityRemap, StandardAugment };

inline constexpr double kMinDisplacement = 1.0;
inline constexpr double kMaxDisplacement = 15.0;
inline constexpr double kAlphaMin = 1.0;
inline constexpr double kAlphaMax = 5.0;
inline constexpr double kBetaMin = 2.0;
inline constexpr double kBetaMax = 10.0;
inline constexpr double kGridStep = 0.2;

/// Full parameterization of one perturbation. Together with the rng stream
/// used to build it, a spec replays to the same output.
struct PerturbationSpec {
  /// Applied in this order.
  std::vector<Procedure> procedures;

  int n_segments = 0;
  int points_per_segment = 25;
  /// Start index (into the traced contour) of each displaced run.
  std::vector<int> segment_starts;
  /// Signed displacement along the outward normal, one per control point,
  /// grouped by segment.
  std::vector<double> displacement_px;
  FillMode fill_mode = FillMode::Interpolate;

  double alpha = 1.0;
  double beta = 2.0;

  Flip flip = Flip::None;
  double rotation_deg = 0.0;
  double translation_dy = 0.0;
  double translation_dx = 0.0;

  bool uses(Procedure p) const;

  friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
};

/// True when v lies on {lo, lo + 0.2, ..., hi}.
bool on_parameter_grid(double v, double lo, double hi);
/// Throws a config error when the spec violates its invariants.
void validate(const PerturbationSpec& spec);

std::string_view to_string(FillMode mode);
std::string_view to_string(Flip flip);
std::string_view to_string(Procedure procedure);
FillMode parse_fill_mode(std::string_view text);
Flip parse_flip(std::string_view text);
Procedure parse_procedure(std::string_view text);

/// `perturbation.<field> = <value>` lines; doubles use round-trip precision.
std::string serialize(const PerturbationSpec& spec);
/// Reads the `perturbation.*` keys of a parsed key-value block.
PerturbationSpec deserialize(const std::map<std::string, std::string>& fields);

}  // namespace alforge::maskops
