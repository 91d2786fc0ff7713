#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace alforge {

enum class Acquisition { Uncertainty, Random };

struct ExperimentConfig {
  std::uint64_t seed = 0;

  // Active-learning schedule.
  int initial_per_class = 16;
  int top_k_per_class = 16;
  int augment_factor = 200;        // per selected image, each round
  int fsl_augment_factor = 500;    // full-data baseline training
  int synth_per_image = 200;
  double stop_tolerance = 0.005;   // absolute AUC
  int stop_patience = 2;
  int max_rounds = 50;
  Acquisition acquisition = Acquisition::Uncertainty;
  bool task_classification = true;
  bool task_segmentation = false;

  // Generator objective.
  double lambda_l1 = 10.0;
  double content_weight = 1.0;
  int nmi_bins = 64;

  // Bayesian sampling.
  int mc_samples = 20;
  double dropout_rate = 0.5;

  int image_rows = 64;
  int image_cols = 64;

  // Mask autoencoder.
  int code_dim = 32;
  int ae_steps = 600;
  double ae_learning_rate = 2e-3;

  // Conditional GAN.
  int gen_features = 64;
  int gen_blocks = 6;
  int disc_base_features = 64;
  int gan_steps = 200;
  int feature_steps = 100;  // content-loss feature network
  int gan_batch = 4;
  double gan_learning_rate = 2e-4;
  double gan_beta1 = 0.5;

  // Perturbation composition.
  int points_per_segment = 25;
  int max_segments = 4;
  double boundary_probability = 0.6;
  double remap_probability = 0.3;
  double augment_probability = 0.6;
  double max_rotation_deg = 10.0;
  int max_translation_px = 4;

  // Classifier / segmenter.
  int backbone_features = 8;
  int backbone_pretrain_steps = 150;  // on the auxiliary corpus
  int backbone_pretrain_images = 100; // auxiliary images per class
  int classifier_steps = 300;
  int fsl_classifier_steps = 900;  // full-data baseline
  double classifier_learning_rate = 5e-3;
  int batch_size = 0;  // 0: 2 * initial_per_class
  int segmenter_features = 8;
  int segmenter_steps = 300;
  double segmenter_learning_rate = 2e-3;
  int aleatoric_samples = 8;

  int effective_batch_size() const { return batch_size > 0 ? batch_size : 2 * initial_per_class; }
};

/// Throws a config error naming the first violated constraint.
void validate(const ExperimentConfig& config);

/// Applies recognized keys; returns the keys it did not recognize.
std::vector<std::string> apply_config_values(ExperimentConfig& config,
                                             const std::map<std::string, std::string>& values);
/// Every field as `key = value` lines, in a fixed order.
std::string serialize(const ExperimentConfig& config);

std::string_view to_string(Acquisition acquisition);
Acquisition parse_acquisition(std::string_view text);

}  // namespace alforge
