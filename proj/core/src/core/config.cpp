#include "alforge/core/config.hpp"

#include <cstdio>
#include <functional>
#include <sstream>

#include "alforge/core/error.hpp"

namespace alforge {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw_error(ErrorCategory::Config, "config key '" + key + "': invalid value '" + value + "'");
}

long long parse_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

struct Binding {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define ALFORGE_INT(field)                                                                      \
  Binding{#field, [](ExperimentConfig& c, const std::string& v) {                               \
            c.field = static_cast<decltype(c.field)>(parse_integer(#field, v));                 \
          },                                                                                    \
          [](const ExperimentConfig& c) { return std::to_string(c.field); }}
#define ALFORGE_REAL(field)                                                                     \
  Binding{#field, [](ExperimentConfig& c, const std::string& v) { c.field = parse_real(#field, v); }, \
          [](const ExperimentConfig& c) { return format_double(c.field); }}
#define ALFORGE_BOOL(field)                                                                     \
  Binding{#field, [](ExperimentConfig& c, const std::string& v) { c.field = parse_bool(#field, v); }, \
          [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); }}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = {
      Binding{"seed",
              [](ExperimentConfig& c, const std::string& v) {
                const long long s = parse_integer("seed", v);
                if (s < 0) bad_value("seed", v);
                c.seed = static_cast<std::uint64_t>(s);
              },
              [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      ALFORGE_INT(initial_per_class),
      ALFORGE_INT(top_k_per_class),
      ALFORGE_INT(augment_factor),
      ALFORGE_INT(fsl_augment_factor),
      ALFORGE_INT(synth_per_image),
      ALFORGE_REAL(stop_tolerance),
      ALFORGE_INT(stop_patience),
      ALFORGE_INT(max_rounds),
      Binding{"acquisition",
              [](ExperimentConfig& c, const std::string& v) { c.acquisition = parse_acquisition(v); },
              [](const ExperimentConfig& c) { return std::string(to_string(c.acquisition)); }},
      ALFORGE_BOOL(task_classification),
      ALFORGE_BOOL(task_segmentation),
      ALFORGE_REAL(lambda_l1),
      ALFORGE_REAL(content_weight),
      ALFORGE_INT(nmi_bins),
      ALFORGE_INT(mc_samples),
      ALFORGE_REAL(dropout_rate),
      ALFORGE_INT(image_rows),
      ALFORGE_INT(image_cols),
      ALFORGE_INT(code_dim),
      ALFORGE_INT(ae_steps),
      ALFORGE_REAL(ae_learning_rate),
      ALFORGE_INT(gen_features),
      ALFORGE_INT(gen_blocks),
      ALFORGE_INT(disc_base_features),
      ALFORGE_INT(gan_steps),
      ALFORGE_INT(feature_steps),
      ALFORGE_INT(gan_batch),
      ALFORGE_REAL(gan_learning_rate),
      ALFORGE_REAL(gan_beta1),
      ALFORGE_INT(points_per_segment),
      ALFORGE_INT(max_segments),
      ALFORGE_REAL(boundary_probability),
      ALFORGE_REAL(remap_probability),
      ALFORGE_REAL(augment_probability),
      ALFORGE_REAL(max_rotation_deg),
      ALFORGE_INT(max_translation_px),
      ALFORGE_INT(backbone_features),
      ALFORGE_INT(backbone_pretrain_steps),
      ALFORGE_INT(backbone_pretrain_images),
      ALFORGE_INT(classifier_steps),
      ALFORGE_INT(fsl_classifier_steps),
      ALFORGE_REAL(classifier_learning_rate),
      ALFORGE_INT(batch_size),
      ALFORGE_INT(segmenter_features),
      ALFORGE_INT(segmenter_steps),
      ALFORGE_REAL(segmenter_learning_rate),
      ALFORGE_INT(aleatoric_samples),
  };
  return table;
}

#undef ALFORGE_INT
#undef ALFORGE_REAL
#undef ALFORGE_BOOL

}  // namespace

std::string_view to_string(Acquisition acquisition) {
  return acquisition == Acquisition::Random ? "random" : "uncertainty";
}

Acquisition parse_acquisition(std::string_view text) {
  if (text == "uncertainty") return Acquisition::Uncertainty;
  if (text == "random") return Acquisition::Random;
  throw_error(ErrorCategory::Config, "unknown acquisition '" + std::string(text) + "'");
}

void validate(const ExperimentConfig& c) {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw_error(ErrorCategory::Config, std::string("invalid config: ") + what);
  };
  check(c.initial_per_class >= 1, "initial_per_class must be >= 1");
  check(c.top_k_per_class >= 1, "top_k_per_class must be >= 1");
  check(c.augment_factor >= 1, "augment_factor must be >= 1");
  check(c.fsl_augment_factor >= 1, "fsl_augment_factor must be >= 1");
  check(c.synth_per_image >= 0, "synth_per_image must be >= 0");
  check(c.stop_tolerance >= 0.0, "stop_tolerance must be >= 0");
  check(c.stop_patience >= 1, "stop_patience must be >= 1");
  check(c.max_rounds >= 1, "max_rounds must be >= 1");
  check(c.task_classification || c.task_segmentation, "at least one task required");
  check(c.lambda_l1 > 0.0, "lambda_l1 must be > 0");
  check(c.content_weight >= 0.0, "content_weight must be >= 0");
  check(c.nmi_bins >= 2, "nmi_bins must be >= 2");
  check(c.mc_samples >= 1, "mc_samples must be >= 1");
  check(c.dropout_rate > 0.0 && c.dropout_rate < 1.0, "dropout_rate must lie in (0, 1)");
  check(c.image_rows >= 16 && c.image_cols >= 16, "image size must be at least 16x16");
  check(c.image_rows % 16 == 0 && c.image_cols % 16 == 0, "image size must be a multiple of 16");
  check(c.code_dim >= 1 && c.code_dim < c.image_rows * c.image_cols, "code_dim must be in [1, rows*cols)");
  for (int steps : {c.ae_steps, c.gan_steps, c.feature_steps, c.backbone_pretrain_steps, c.classifier_steps,
                    c.fsl_classifier_steps, c.segmenter_steps})
    check(steps >= 0, "step counts must be >= 0");
  check(c.backbone_pretrain_images >= 1, "backbone_pretrain_images must be >= 1");
  check(c.gen_features >= 1 && c.gen_blocks >= 1 && c.disc_base_features >= 1, "network widths must be >= 1");
  check(c.gan_batch >= 1, "gan_batch must be >= 1");
  check(c.points_per_segment >= 4, "points_per_segment must be >= 4");
  check(c.max_segments >= 1, "max_segments must be >= 1");
  for (double p : {c.boundary_probability, c.remap_probability, c.augment_probability})
    check(p >= 0.0 && p <= 1.0, "procedure probabilities must lie in [0, 1]");
  check(c.max_translation_px >= 0 && c.max_rotation_deg >= 0.0, "augmentation ranges must be >= 0");
  check(c.backbone_features >= 1 && c.segmenter_features >= 1, "feature widths must be >= 1");
  check(c.batch_size >= 0, "batch_size must be >= 0");
  check(c.aleatoric_samples >= 1, "aleatoric_samples must be >= 1");
  check(c.ae_learning_rate > 0 && c.gan_learning_rate > 0 && c.classifier_learning_rate > 0 &&
            c.segmenter_learning_rate > 0,
        "learning rates must be > 0");
}

std::vector<std::string> apply_config_values(ExperimentConfig& config,
                                             const std::map<std::string, std::string>& values) {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : values) {
    bool found = false;
    for (const auto& b : bindings()) {
      if (key == b.key) {
        b.set(config, value);
        found = true;
        break;
      }
    }
    if (!found) unknown.push_back(key);
  }
  return unknown;
}

std::string serialize(const ExperimentConfig& config) {
  std::ostringstream out;
  for (const auto& b : bindings()) out << b.key << " = " << b.get(config) << '\n';
  return out.str();
}

}  // namespace alforge
