#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "alforge/core/manifest.hpp"
#include "alforge/core/rng.hpp"
#include "alforge/core/sample.hpp"

namespace alforge {

/// Desk-scale stand-in for a chest radiograph collection: one ellipsoidal
/// "lung" blob on a noisy background, with a faint disc inside the lung for
/// the nodule class.
struct ToyDatasetOptions {
  int n_per_class = 16;       // train split
  int n_test_per_class = 0;   // test split
  int rows = 64;
  int cols = 64;
  double noise_sigma = 0.05;
  double nodule_contrast_min = 0.06;
  double nodule_contrast_max = 0.3;
  /// Contrast is min + (max - min) * u^skew; skew < 1 favours obvious nodules.
  double nodule_contrast_skew = 0.35;
  /// Fraction of images (both classes) carrying a bright spot outside the lung.
  double distractor_rate = 0.5;
};

struct NoduleDisc {
  double row = 0.0;
  double col = 0.0;
  double radius = 0.0;
  double contrast = 0.0;
};

struct ToySample {
  ImageSample sample;
  std::optional<NoduleDisc> nodule;
};

struct ToyDataset {
  DatasetManifest manifest;
  std::vector<ToySample> samples;  // manifest order
};

/// One image; deterministic given the stream. Pixels are 16-bit quantized.
ToySample make_toy_sample(const std::string& id, Label label, const ToyDatasetOptions& options, RngStream& rng);

/// Builds every sample in memory. When `output_dir` is given, writes
/// images/, masks/ and manifest.csv there.
ToyDataset make_toy_dataset(const ToyDatasetOptions& options, RngStream& rng,
                            const std::optional<std::filesystem::path>& output_dir = std::nullopt);

}  // namespace alforge
