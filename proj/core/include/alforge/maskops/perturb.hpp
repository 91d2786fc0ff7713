#pragma once

#include <optional>
#include <vector>

#include "alforge/core/config.hpp"
#include "alforge/core/grid.hpp"
#include "alforge/core/rng.hpp"
#include "alforge/core/sample.hpp"
#include "alforge/maskops/contour.hpp"
#include "alforge/maskops/perturbation_spec.hpp"

namespace alforge::maskops {

inline constexpr int kSplineRetryBudget = 10;
inline constexpr int kSamplesPerSpan = 4;

/// Control polygon after moving each selected contour point along its
/// outward normal by its signed displacement. Uses the spec as given.
std::vector<PointD> displaced_control_points(const BoundaryContour& contour, const PerturbationSpec& spec);

/// Rasterizes the closed cubic B-spline over the displaced control polygon.
/// Returns nullopt when the spline self-intersects. No range checks on the
/// displacements, so this doubles as the replay path and a test hook.
std::optional<Mask> apply_displacement(const BoundaryContour& contour, const PerturbationSpec& spec, int rows,
                                       int cols);

/// Draws `spec.n_segments` disjoint runs of `spec.points_per_segment`
/// contour points and a displacement in [1, 15] px for each point, writing
/// both into `spec`, then rasterizes the refitted spline. Each run has one
/// sign and one peak magnitude; the points follow a raised-cosine profile
/// from 1 px at the run ends up to the peak.
/// A self-intersecting spline is redrawn up to `retry_budget` times.
Mask displace_boundary(const BoundaryContour& contour, PerturbationSpec& spec, int rows, int cols, RngStream& rng,
                       int retry_budget = kSplineRetryBudget);

/// Assigns intensities to pixels in new_mask \ old_mask; everything else is
/// returned untouched.
Image fill_exposed_region(const Image& image, const Mask& old_mask, const Mask& new_mask, FillMode mode,
                          RngStream& rng);

/// Replaces masked pixels with draws from Uniform[alpha*mu - beta*sigma,
/// alpha*mu + beta*sigma] clipped to [0, 1], where mu and sigma are the
/// masked pixels' mean and population standard deviation.
Image remap_intensity(const Image& image, const Mask& mask, double alpha, double beta, RngStream& rng);

struct ImageMaskPair {
  Image image;
  Mask mask;
};

/// Flip, then rotation about the image centre, then translation; bilinear
/// resampling with the mask re-thresholded at 0.5.
ImageMaskPair standard_augment(const Image& image, const Mask& mask, Flip flip, double rotation_deg,
                               double translation_dy, double translation_dx);

struct Perturbation {
  Image image;  // source pixels after the image-level procedures
  Mask mask;
  PerturbationSpec spec;
};

/// Applies `spec.procedures` in order. Boundary displacements are taken from
/// the spec; fill and remap draws come from `rng`.
ImageMaskPair apply_perturbation(const Image& image, const Mask& mask, const PerturbationSpec& spec, RngStream& rng);

/// One random composition. `rng` is split into a "spec" child (parameter
/// draws) and an "apply" child, so `replay` with the same stream reproduces
/// the result.
Perturbation perturb(const ImageSample& sample, const ExperimentConfig& config, RngStream& rng);
ImageMaskPair replay(const ImageSample& sample, const PerturbationSpec& spec, RngStream& rng);

/// `count` perturbations with pairwise distinct masks; candidate j uses the
/// child stream "candidate-j".
std::vector<Perturbation> generate_perturbations(const ImageSample& sample, int count,
                                                 const ExperimentConfig& config, RngStream& rng);

}  // namespace alforge::maskops
