#include "alforge/core/toy_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "alforge/core/error.hpp"
#include "alforge/core/raster_io.hpp"

namespace alforge {
namespace {

struct Ellipse {
  double cr, cc, ar, ac, angle;
  double wobble_amp, wobble_phase;
  int wobble_freq;

  // < 1 inside.
  double level(double r, double c) const {
    const double dr = r - cr, dc = c - cc;
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double u = (ca * dr + sa * dc) / ar;
    const double v = (-sa * dr + ca * dc) / ac;
    const double theta = std::atan2(v, u);
    const double scale = 1.0 + wobble_amp * std::sin(wobble_freq * theta + wobble_phase);
    return std::sqrt(u * u + v * v) / scale;
  }
};

bool disc_strictly_inside(const Mask& mask, const NoduleDisc& d) {
  const int r0 = static_cast<int>(std::floor(d.row - d.radius)) - 1;
  const int r1 = static_cast<int>(std::ceil(d.row + d.radius)) + 1;
  const int c0 = static_cast<int>(std::floor(d.col - d.radius)) - 1;
  const int c1 = static_cast<int>(std::ceil(d.col + d.radius)) + 1;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (std::hypot(r - d.row, c - d.col) > d.radius + 1.5) continue;
      if (!mask.in_bounds(r, c) || !mask(r, c)) return false;
    }
  }
  return true;
}

}  // namespace

ToySample make_toy_sample(const std::string& id, Label label, const ToyDatasetOptions& o, RngStream& rng) {
  const int rows = o.rows, cols = o.cols;
  const double h = rows, w = cols;

  Ellipse lung{h * 0.5 + rng.uniform(-0.06, 0.06) * h,
               w * 0.5 + rng.uniform(-0.06, 0.06) * w,
               rng.uniform(0.27, 0.36) * h,
               rng.uniform(0.20, 0.28) * w,
               rng.uniform(-0.35, 0.35),
               rng.uniform(0.0, 0.08),
               rng.uniform(0.0, 2.0 * std::numbers::pi),
               rng.uniform_int(2, 4)};

  const double body = rng.uniform(0.5, 0.65);
  const double lung_level = rng.uniform(0.18, 0.32);
  const double grad_r = rng.uniform(-0.08, 0.08), grad_c = rng.uniform(-0.08, 0.08);

  ToySample out;
  ImageSample& s = out.sample;
  s.id = id;
  s.label = label;
  s.provenance = Provenance::Real;
  s.pixels = Image(rows, cols);
  s.mask = Mask(rows, cols);

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double level = lung.level(r, c);
      const bool inside = level < 1.0;
      s.mask(r, c) = inside ? 1 : 0;
      // Soft transition at the lung edge.
      const double t = std::clamp((level - 0.9) / 0.2, 0.0, 1.0);
      const double base = lung_level + (body - lung_level) * t;
      s.pixels(r, c) = base + grad_r * (r / h - 0.5) + grad_c * (c / w - 0.5);
    }
  }

  // Vessel-like bright streaks inside the lung, for both classes.
  const int n_streaks = rng.uniform_int(1, 3);
  for (int k = 0; k < n_streaks; ++k) {
    const double r0 = lung.cr + rng.uniform(-0.5, 0.5) * lung.ar;
    const double c0 = lung.cc + rng.uniform(-0.5, 0.5) * lung.ac;
    const double ang = rng.uniform(0.0, std::numbers::pi);
    const double len = rng.uniform(0.3, 0.7) * lung.ar;
    const double amp = rng.uniform(0.03, 0.08);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (!s.mask(r, c)) continue;
        const double dr = r - r0, dc = c - c0;
        const double along = dr * std::cos(ang) + dc * std::sin(ang);
        const double across = -dr * std::sin(ang) + dc * std::cos(ang);
        if (std::abs(along) > len) continue;
        s.pixels(r, c) += amp * std::exp(-across * across / 1.2);
      }
    }
  }

  if (rng.bernoulli(o.distractor_rate)) {
    // Bright blob outside the lung (bone or marker); not diagnostic.
    for (int attempt = 0; attempt < 50; ++attempt) {
      const double rr = rng.uniform(2.0, h - 3.0), cc = rng.uniform(2.0, w - 3.0);
      if (lung.level(rr, cc) < 1.25) continue;
      const double rad = rng.uniform(4.0, 7.0), amp = rng.uniform(0.05, 0.25);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
          const double d2 = (r - rr) * (r - rr) + (c - cc) * (c - cc);
          s.pixels(r, c) += amp * std::exp(-d2 / (2.0 * rad * rad));
        }
      break;
    }
  }

  if (label == Label::Nodule) {
    const double scale = std::min(h, w) / 64.0;
    NoduleDisc disc;
    disc.radius = rng.uniform(1.5, 3.5) * scale;
    disc.contrast = o.nodule_contrast_min +
                    (o.nodule_contrast_max - o.nodule_contrast_min) * std::pow(rng.uniform(), o.nodule_contrast_skew);
    bool placed = false;
    for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
      disc.row = lung.cr + rng.uniform(-0.8, 0.8) * lung.ar;
      disc.col = lung.cc + rng.uniform(-0.8, 0.8) * lung.ac;
      placed = disc_strictly_inside(s.mask, disc);
    }
    if (!placed) {
      disc.row = lung.cr;
      disc.col = lung.cc;
      disc.radius = 1.0;
    }
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double d = std::hypot(r - disc.row, c - disc.col);
        if (d <= disc.radius) s.pixels(r, c) += disc.contrast * (1.0 - 0.3 * (d / disc.radius) * (d / disc.radius));
      }
    out.nodule = disc;
  }

  for (double& v : s.pixels.values()) v = std::clamp(v + rng.normal(0.0, o.noise_sigma), 0.0, 1.0);
  s.pixels = quantize16(s.pixels);
  return out;
}

ToyDataset make_toy_dataset(const ToyDatasetOptions& options, RngStream& rng,
                            const std::optional<std::filesystem::path>& output_dir) {
  if (options.n_per_class < 1) throw_error(ErrorCategory::Config, "toy dataset: n_per_class must be >= 1");
  if (options.n_test_per_class < 0) throw_error(ErrorCategory::Config, "toy dataset: n_test_per_class must be >= 0");
  if (options.rows < 16 || options.cols < 16) throw_error(ErrorCategory::Config, "toy dataset: image too small");

  namespace fs = std::filesystem;
  if (output_dir) {
    std::error_code ec;
    fs::create_directories(*output_dir / "images", ec);
    fs::create_directories(*output_dir / "masks", ec);
    if (ec || !fs::is_directory(*output_dir / "images"))
      throw_error(ErrorCategory::Data, "cannot create output directory '" + output_dir->string() + "'");
  }

  ToyDataset dataset;
  for (Split split : {Split::Train, Split::Test}) {
    const int n = split == Split::Train ? options.n_per_class : options.n_test_per_class;
    for (Label label : {Label::Normal, Label::Nodule}) {
      for (int i = 0; i < n; ++i) {
        char id[64];
        std::snprintf(id, sizeof id, "toy-%s-%s-%04d", std::string(to_string(split)).c_str(),
                      std::string(to_string(label)).c_str(), i);
        RngStream sample_rng = rng.child(id);
        ToySample toy = make_toy_sample(id, label, options, sample_rng);

        ManifestRecord record;
        record.label = label;
        record.split = split;
        if (output_dir) {
          record.image_path = *output_dir / "images" / (std::string(id) + ".pgm");
          record.mask_path = *output_dir / "masks" / (std::string(id) + "_mask.pgm");
          write_image(record.image_path, toy.sample.pixels, BitDepth::Sixteen);
          write_mask(record.mask_path, toy.sample.mask);
        } else {
          record.image_path = fs::path("images") / (std::string(id) + ".pgm");
          record.mask_path = fs::path("masks") / (std::string(id) + "_mask.pgm");
        }
        dataset.manifest.records.push_back(std::move(record));
        dataset.samples.push_back(std::move(toy));
      }
    }
  }
  if (output_dir) write_manifest(*output_dir / "manifest.csv", dataset.manifest);
  return dataset;
}

}  // namespace alforge
