#include "alforge/maskops/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>

#include "alforge/core/error.hpp"
#include "alforge/maskops/bspline.hpp"

namespace alforge::maskops {
namespace {

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

double grid_value(RngStream& rng, double lo, double hi) {
  const int steps = static_cast<int>(std::lround((hi - lo) / kGridStep));
  return lo + kGridStep * rng.uniform_int(0, steps);
}

std::uint64_t mask_hash(const Mask& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto v : m.values()) {
    h ^= v;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<PointD> displaced_control_points(const BoundaryContour& contour, const PerturbationSpec& spec) {
  const int n = static_cast<int>(contour.points.size());
  std::vector<PointD> control(n);
  for (int i = 0; i < n; ++i) control[i] = {static_cast<double>(contour.points[i].row), static_cast<double>(contour.points[i].col)};
  if (spec.segment_starts.empty()) return control;
  const auto normals = outward_normals(contour);
  for (int s = 0; s < static_cast<int>(spec.segment_starts.size()); ++s) {
    for (int k = 0; k < spec.points_per_segment; ++k) {
      const int i = (spec.segment_starts[s] + k) % n;
      const double d = spec.displacement_px[static_cast<std::size_t>(s) * spec.points_per_segment + k];
      control[i].row += d * normals[i].row;
      control[i].col += d * normals[i].col;
    }
  }
  return control;
}

std::optional<Mask> apply_displacement(const BoundaryContour& contour, const PerturbationSpec& spec, int rows,
                                       int cols) {
  if (static_cast<int>(spec.segment_starts.size()) * spec.points_per_segment !=
      static_cast<int>(spec.displacement_px.size()))
    throw_error(ErrorCategory::Config, "apply_displacement: displacement count does not match segments");
  if (contour.points.size() < 3) {
    Mask m(rows, cols);
    for (const auto& p : contour.points)
      if (m.in_bounds(p.row, p.col)) m(p.row, p.col) = 1;
    return m;
  }
  const auto control = displaced_control_points(contour, spec);
  const auto curve = sample_closed_bspline(control, kSamplesPerSpan);
  if (polygon_self_intersects(curve)) return std::nullopt;
  Mask mask = rasterize_closed_curve(curve, rows, cols);
  if (count_foreground(mask) == 0 || count_components(mask) != 1) return std::nullopt;
  return mask;
}

Mask displace_boundary(const BoundaryContour& contour, PerturbationSpec& spec, int rows, int cols, RngStream& rng,
                       int retry_budget) {
  const int n = static_cast<int>(contour.points.size());
  if (spec.n_segments < 1 || spec.points_per_segment < 4)
    throw_error(ErrorCategory::Config, "displace_boundary: need n_segments >= 1 and points_per_segment >= 4");
  if (n < spec.n_segments * spec.points_per_segment)
    throw_error(ErrorCategory::Data, "displace_boundary: contour of " + std::to_string(n) + " points is too short for " +
                                         std::to_string(spec.n_segments) + " x " +
                                         std::to_string(spec.points_per_segment) + " points");
  for (int attempt = 0; attempt <= retry_budget; ++attempt) {
    spec.segment_starts.clear();
    spec.displacement_px.clear();
    // Segments tile the ring with random slack between them, so placement
    // succeeds whenever they fit at all.
    const int slack = n - spec.n_segments * spec.points_per_segment;
    std::vector<int> cuts(static_cast<std::size_t>(spec.n_segments));
    for (int& c : cuts) c = rng.uniform_int(0, slack);
    std::sort(cuts.begin(), cuts.end());
    const int offset = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    for (int s = 0; s < spec.n_segments; ++s) {
      spec.segment_starts.push_back((offset + s * spec.points_per_segment + cuts[s]) % n);
      // One peak per run on a raised-cosine profile: the run tapers to the
      // minimum at both ends, so the spline does not fold at the seams.
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      const double peak = rng.uniform(kMinDisplacement, kMaxDisplacement);
      for (int k = 0; k < spec.points_per_segment; ++k) {
        const double w = std::sin(std::numbers::pi * (k + 1) / (spec.points_per_segment + 1));
        spec.displacement_px.push_back(sign * (kMinDisplacement + (peak - kMinDisplacement) * w * w));
      }
    }
    if (auto mask = apply_displacement(contour, spec, rows, cols)) return *mask;
  }
  throw_error(ErrorCategory::Data, "displace_boundary: spline self-intersects after " +
                                       std::to_string(retry_budget + 1) + " attempts");
}

Image fill_exposed_region(const Image& image, const Mask& old_mask, const Mask& new_mask, FillMode mode,
                          RngStream& rng) {
  if (!image.same_shape(old_mask) || !image.same_shape(new_mask))
    throw_error(ErrorCategory::Data, "fill_exposed_region: grids differ in shape");
  Image out = image;
  auto exposed = [&](int r, int c) { return new_mask(r, c) && !old_mask(r, c); };

  if (mode == FillMode::SampleDistribution) {
    std::vector<double> pool;
    for (int r = 0; r < image.rows(); ++r)
      for (int c = 0; c < image.cols(); ++c)
        if (old_mask(r, c)) pool.push_back(image(r, c));
    bool any = false;
    for (int r = 0; r < image.rows() && !any; ++r)
      for (int c = 0; c < image.cols() && !any; ++c) any = exposed(r, c);
    if (!any) return out;
    if (pool.empty()) throw_error(ErrorCategory::Data, "fill_exposed_region: empty source mask for sampling");
    for (int r = 0; r < image.rows(); ++r)
      for (int c = 0; c < image.cols(); ++c)
        if (exposed(r, c)) out(r, c) = pool[rng.uniform_index(pool.size())];
    return out;
  }

  for (int r = 0; r < image.rows(); ++r) {
    int c = 0;
    while (c < image.cols()) {
      if (!exposed(r, c)) {
        ++c;
        continue;
      }
      const int c0 = c;
      while (c < image.cols() && exposed(r, c)) ++c;
      const int c1 = c - 1;
      const bool has_left = c0 > 0, has_right = c1 + 1 < image.cols();
      if (!has_left && !has_right) continue;
      const double left = has_left ? image(r, c0 - 1) : image(r, c1 + 1);
      const double right = has_right ? image(r, c1 + 1) : image(r, c0 - 1);
      const double span = static_cast<double>(c1 - c0 + 2);
      for (int k = c0; k <= c1; ++k) out(r, k) = left + (right - left) * (k - (c0 - 1)) / span;
    }
  }
  return out;
}

Image remap_intensity(const Image& image, const Mask& mask, double alpha, double beta, RngStream& rng) {
  if (!image.same_shape(mask)) throw_error(ErrorCategory::Data, "remap_intensity: grids differ in shape");
  if (!on_parameter_grid(alpha, kAlphaMin, kAlphaMax))
    throw_error(ErrorCategory::Config, "remap_intensity: alpha must lie on {1.0, 1.2, ..., 5.0}");
  if (!on_parameter_grid(beta, kBetaMin, kBetaMax))
    throw_error(ErrorCategory::Config, "remap_intensity: beta must lie on {2.0, 2.2, ..., 10.0}");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < image.size(); ++i)
    if (mask.values()[i]) {
      sum += image.values()[i];
      ++n;
    }
  if (n == 0) throw_error(ErrorCategory::Data, "remap_intensity: empty mask");
  const double mu = sum / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i)
    if (mask.values()[i]) ss += (image.values()[i] - mu) * (image.values()[i] - mu);
  const double sigma = std::sqrt(ss / n);
  const double lo = alpha * mu - beta * sigma, hi = alpha * mu + beta * sigma;

  Image out = image;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask.values()[i]) out.values()[i] = std::clamp(sigma > 0 ? rng.uniform(lo, hi) : alpha * mu, 0.0, 1.0);
  return out;
}

ImageMaskPair standard_augment(const Image& image, const Mask& mask, Flip flip, double rotation_deg,
                               double translation_dy, double translation_dx) {
  if (!image.same_shape(mask)) throw_error(ErrorCategory::Data, "standard_augment: grids differ in shape");
  const int rows = image.rows(), cols = image.cols();
  const double cr = (rows - 1) / 2.0, cc = (cols - 1) / 2.0;
  const double theta = rotation_deg * std::numbers::pi / 180.0;
  double cs = std::cos(theta), sn = std::sin(theta);
  cs = snap(cs);
  sn = snap(sn);

  // Forward map of a source point, used for the centroid precondition.
  auto forward = [&](double r, double c) {
    if (flip == Flip::Horizontal) c = cols - 1 - c;
    if (flip == Flip::Vertical) r = rows - 1 - r;
    const double dr = r - cr, dc = c - cc;
    return PointD{cr + cs * dr - sn * dc + translation_dy, cc + sn * dr + cs * dc + translation_dx};
  };
  const std::size_t fg = count_foreground(mask);
  if (fg > 0) {
    double sr = 0, sc = 0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (mask(r, c)) {
          sr += r;
          sc += c;
        }
    const PointD centroid = forward(sr / fg, sc / fg);
    if (centroid.row < 0 || centroid.col < 0 || centroid.row > rows - 1 || centroid.col > cols - 1)
      throw_error(ErrorCategory::Data, "standard_augment: transform moves the mask centroid out of frame");
  }

  ImageMaskPair out{Image(rows, cols), Mask(rows, cols)};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double qr = r - translation_dy - cr, qc = c - translation_dx - cc;
      double sr = snap(cr + cs * qr + sn * qc);
      double sc = snap(cc - sn * qr + cs * qc);
      if (flip == Flip::Horizontal) sc = cols - 1 - sc;
      if (flip == Flip::Vertical) sr = rows - 1 - sr;

      const int r0 = static_cast<int>(std::floor(sr)), c0 = static_cast<int>(std::floor(sc));
      const double fr = sr - r0, fc = sc - c0;
      double value = 0.0, mvalue = 0.0;
      for (int a = 0; a < 2; ++a) {
        const double wr = a ? fr : 1.0 - fr;
        if (wr == 0.0) continue;
        for (int b = 0; b < 2; ++b) {
          const double wc = b ? fc : 1.0 - fc;
          if (wc == 0.0) continue;
          const int rr = r0 + a, cc2 = c0 + b;
          value += wr * wc * image(std::clamp(rr, 0, rows - 1), std::clamp(cc2, 0, cols - 1));
          if (mask.in_bounds(rr, cc2)) mvalue += wr * wc * mask(rr, cc2);
        }
      }
      out.image(r, c) = std::clamp(value, 0.0, 1.0);
      out.mask(r, c) = mvalue >= 0.5 ? 1 : 0;
    }
  }
  if (fg > 0 && count_foreground(out.mask) == 0)
    throw_error(ErrorCategory::Data, "standard_augment: transform pushes the mask out of frame");
  return out;
}

ImageMaskPair apply_perturbation(const Image& image, const Mask& mask, const PerturbationSpec& spec, RngStream& rng) {
  ImageMaskPair state{image, mask};
  for (Procedure p : spec.procedures) {
    switch (p) {
      case Procedure::BoundaryDisplacement: {
        const BoundaryContour contour = extract_boundary(state.mask);
        auto displaced = apply_displacement(contour, spec, mask.rows(), mask.cols());
        if (!displaced) throw_error(ErrorCategory::Data, "apply_perturbation: recorded displacement self-intersects");
        state.image = fill_exposed_region(state.image, state.mask, *displaced, spec.fill_mode, rng);
        state.mask = std::move(*displaced);
        break;
      }
      case Procedure::IntensityRemap:
        state.image = remap_intensity(state.image, state.mask, spec.alpha, spec.beta, rng);
        break;
      case Procedure::StandardAugment:
        state = standard_augment(state.image, state.mask, spec.flip, spec.rotation_deg, spec.translation_dy,
                                 spec.translation_dx);
        break;
    }
  }
  return state;
}

Perturbation perturb(const ImageSample& sample, const ExperimentConfig& config, RngStream& rng) {
  RngStream spec_rng = rng.child("spec");
  RngStream apply_rng = rng.child("apply");

  PerturbationSpec spec;
  spec.points_per_segment = config.points_per_segment;
  const bool boundary = spec_rng.bernoulli(config.boundary_probability);
  const bool remap = spec_rng.bernoulli(config.remap_probability);
  bool augment = spec_rng.bernoulli(config.augment_probability);
  if (boundary) spec.procedures.push_back(Procedure::BoundaryDisplacement);
  if (remap) spec.procedures.push_back(Procedure::IntensityRemap);
  if (augment) spec.procedures.push_back(Procedure::StandardAugment);
  if (!boundary && !augment) {
    // Every candidate must alter the mask.
    spec.procedures.push_back(spec_rng.bernoulli(0.5) ? Procedure::BoundaryDisplacement : Procedure::StandardAugment);
  }
  spec_rng.shuffle(spec.procedures);

  if (spec.uses(Procedure::IntensityRemap)) {
    spec.alpha = grid_value(spec_rng, kAlphaMin, kAlphaMax);
    spec.beta = grid_value(spec_rng, kBetaMin, kBetaMax);
  }
  if (spec.uses(Procedure::StandardAugment)) {
    const int f = spec_rng.uniform_int(0, 2);
    spec.flip = f == 0 ? Flip::None : (f == 1 ? Flip::Horizontal : Flip::Vertical);
    spec.rotation_deg = spec_rng.uniform(-config.max_rotation_deg, config.max_rotation_deg);
    spec.translation_dy = spec_rng.uniform_int(-config.max_translation_px, config.max_translation_px);
    spec.translation_dx = spec_rng.uniform_int(-config.max_translation_px, config.max_translation_px);
  }
  spec.fill_mode = spec_rng.bernoulli(0.5) ? FillMode::Interpolate : FillMode::SampleDistribution;

  // Walk the composition once: boundary parameters depend on the contour
  // reached at that point, and image-level draws come from apply_rng.
  ImageMaskPair state{sample.pixels, sample.mask};
  for (Procedure p : spec.procedures) {
    switch (p) {
      case Procedure::BoundaryDisplacement: {
        const BoundaryContour contour = extract_boundary(state.mask);
        const int capacity = static_cast<int>(contour.points.size()) / spec.points_per_segment;
        if (capacity < 1) throw_error(ErrorCategory::Data, "perturb: contour of '" + sample.id + "' too short");
        spec.n_segments = spec_rng.uniform_int(1, std::min(config.max_segments, capacity));
        Mask displaced = displace_boundary(contour, spec, state.mask.rows(), state.mask.cols(), spec_rng);
        state.image = fill_exposed_region(state.image, state.mask, displaced, spec.fill_mode, apply_rng);
        state.mask = std::move(displaced);
        break;
      }
      case Procedure::IntensityRemap:
        state.image = remap_intensity(state.image, state.mask, spec.alpha, spec.beta, apply_rng);
        break;
      case Procedure::StandardAugment:
        state = standard_augment(state.image, state.mask, spec.flip, spec.rotation_deg, spec.translation_dy,
                                 spec.translation_dx);
        break;
    }
  }
  validate(spec);
  return Perturbation{std::move(state.image), std::move(state.mask), std::move(spec)};
}

ImageMaskPair replay(const ImageSample& sample, const PerturbationSpec& spec, RngStream& rng) {
  RngStream apply_rng = rng.child("apply");
  return apply_perturbation(sample.pixels, sample.mask, spec, apply_rng);
}

std::vector<Perturbation> generate_perturbations(const ImageSample& sample, int count,
                                                 const ExperimentConfig& config, RngStream& rng) {
  if (count < 0) throw_error(ErrorCategory::Config, "generate_perturbations: negative count");
  if (count > config.synth_per_image)
    throw_error(ErrorCategory::Config, "generate_perturbations: count exceeds synth_per_image");
  std::vector<Perturbation> out;
  out.reserve(count);
  std::set<std::uint64_t> seen{mask_hash(sample.mask)};
  for (int j = 0; j < count; ++j) {
    for (int attempt = 0;; ++attempt) {
      RngStream candidate_rng = rng.child("candidate-" + std::to_string(j) + (attempt ? "-" + std::to_string(attempt) : ""));
      std::optional<Perturbation> p;
      try {
        p = perturb(sample, config, candidate_rng);
      } catch (const Error& e) {
        // A draw whose spline keeps self-intersecting is redrawn whole.
        if (e.category() != ErrorCategory::Data || attempt >= kSplineRetryBudget) throw;
        continue;
      }
      if (seen.insert(mask_hash(p->mask)).second) {
        out.push_back(std::move(*p));
        break;
      }
      if (attempt >= kSplineRetryBudget)
        throw_error(ErrorCategory::Data, "generate_perturbations: cannot find a distinct mask for '" + sample.id + "'");
    }
  }
  return out;
}

}  // namespace alforge::maskops
