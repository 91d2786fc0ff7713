#pragma once

#include <functional>
#include <string>

#include "alforge/cgan/discriminator.hpp"
#include "alforge/cgan/generator.hpp"
#include "alforge/core/config.hpp"
#include "alforge/metrics/feature_extractor.hpp"
#include "alforge/nn/tensor.hpp"

namespace alforge::cgan {

inline constexpr double kProbabilityEps = 1e-7;

struct GanLossConfig {
  double lambda_l1 = 10.0;
  double content_weight = 1.0;
  int nmi_bins = 64;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  int steps = 200;
  int batch = 4;

  static GanLossConfig from(const ExperimentConfig& config);
};
void validate(const GanLossConfig& config);

/// Any conditional critic returning probabilities [N, 1] for (x, y).
using Critic = std::function<nn::Tensor(const nn::Tensor& x, const nn::Tensor& y)>;
Critic critic_of(const Discriminator& d);

/// mean_n [log D(x, y_real) + log(1 - D(x, y_fake))], probabilities
/// clamped to [eps, 1 - eps]. The discriminator maximizes it.
nn::Tensor adversarial_loss(const Critic& d, const nn::Tensor& x, const nn::Tensor& y_real, const nn::Tensor& y_fake);
/// Same expression from precomputed probabilities.
nn::Tensor adversarial_loss(const nn::Tensor& d_real, const nn::Tensor& d_fake);
/// Non-saturating generator side: -mean log D(x, y_fake).
nn::Tensor generator_adversarial_loss(const nn::Tensor& d_fake);

/// Mean absolute difference.
nn::Tensor l1_loss(const nn::Tensor& y_target, const nn::Tensor& y_gen);

/// NMI(x, y) - FeatDist(x, y) - MSE(x, y) on images, via the metrics module.
double content_loss(const Image& x, const Image& y, const metrics::FeatureExtractor& feat, int bins = 64);
/// Differentiable per-sample counterpart on [N, 1, H, W] batches; the NMI
/// term uses the Parzen-window histogram. -> [N]
nn::Tensor content_loss(const nn::Tensor& x, const nn::Tensor& y, const metrics::FeatureExtractor& feat,
                        int bins = 64);

struct GanBatch {
  nn::Tensor x;       // conditioning images [N, 1, H, W]
  nn::Tensor z;       // latent codes [N, code_dim]
  nn::Tensor target;  // ground-truth images [N, 1, H, W]
};

struct ObjectiveTerms {
  nn::Tensor total;
  double adversarial = 0.0;
  double l1 = 0.0;
  double content = 0.0;
  /// Mean D output on the generated batch.
  double d_fake = 0.0;
  std::string breakdown() const;
};

/// Generator-side adversarial term + lambda * L1 + content_weight * content,
/// averaged over the batch. Throws a divergence error with the breakdown if
/// any term is non-finite.
ObjectiveTerms generator_objective(Generator& g, const Discriminator& d, const metrics::FeatureExtractor& feat,
                                   const GanBatch& batch, const GanLossConfig& config, bool training = true,
                                   bool track_stats = true);
/// Same terms for an already generated batch.
ObjectiveTerms generator_objective(const nn::Tensor& fake, const Critic& d, const metrics::FeatureExtractor& feat,
                                   const GanBatch& batch, const GanLossConfig& config);

}  // namespace alforge::cgan
