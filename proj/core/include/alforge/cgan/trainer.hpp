#pragma once

#include <string>
#include <vector>

#include "alforge/cgan/autoencoder.hpp"
#include "alforge/cgan/discriminator.hpp"
#include "alforge/cgan/generator.hpp"
#include "alforge/cgan/losses.hpp"
#include "alforge/core/config.hpp"
#include "alforge/core/sample.hpp"
#include "alforge/metrics/feature_extractor.hpp"

namespace alforge::cgan {

struct GanLogEntry {
  int step = 0;  // 1-based generator step
  double d_loss = 0.0;
  double d_real = 0.0;  // mean D output on real pairs
  double d_fake = 0.0;
  double g_total = 0.0;
  double g_adversarial = 0.0;
  double g_l1 = 0.0;
  double g_content = 0.0;
  /// Generator objective on a fixed monitoring batch before this step.
  double monitor = 0.0;
};

inline constexpr const char* kLossHistoryHeader =
    "step,d_loss,d_real,d_fake,g_total,g_adversarial,g_l1,g_content,monitor";
std::string format_history(const std::vector<GanLogEntry>& history);

struct GanModels {
  Generator generator;
  Discriminator discriminator;
  std::vector<GanLogEntry> history;
  /// Monitoring-batch objective after the last step.
  double final_monitor = 0.0;
};

GeneratorShape generator_shape(const ExperimentConfig& config);
DiscriminatorShape discriminator_shape(const ExperimentConfig& config);

/// Alternates one discriminator step and one generator step, gan_steps
/// times. Each training pair conditions on a randomly perturbed copy of a
/// real image and targets the unperturbed image, with z encoding the real
/// mask. Deterministic given `rng`.
GanModels train_cgan(const std::vector<ImageSample>& dataset, const MaskAutoencoder& ae,
                     const metrics::FeatureExtractor& feat, const ExperimentConfig& config, RngStream& rng);
/// Lower-level entry used by tests: caller-supplied initial models.
GanModels train_cgan(const std::vector<ImageSample>& dataset, const MaskAutoencoder& ae,
                     const metrics::FeatureExtractor& feat, const ExperimentConfig& config, RngStream& rng,
                     Generator generator, Discriminator discriminator);

}  // namespace alforge::cgan
