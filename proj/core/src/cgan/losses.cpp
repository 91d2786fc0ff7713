#include "alforge/cgan/losses.hpp"

#include <cmath>
#include <cstdio>

#include "alforge/core/error.hpp"
#include "alforge/metrics/similarity.hpp"
#include "alforge/nn/ops.hpp"

namespace alforge::cgan {

GanLossConfig GanLossConfig::from(const ExperimentConfig& c) {
  return {c.lambda_l1, c.content_weight, c.nmi_bins, c.gan_learning_rate, c.gan_beta1, c.gan_steps, c.gan_batch};
}

void validate(const GanLossConfig& c) {
  require(c.lambda_l1 > 0, ErrorCategory::Config, "lambda_l1 must be positive");
  require(c.content_weight >= 0, ErrorCategory::Config, "content_weight must be non-negative");
  require(c.nmi_bins >= 2, ErrorCategory::Config, "nmi_bins must be at least 2");
  require(c.learning_rate > 0, ErrorCategory::Config, "gan learning rate must be positive");
  require(c.steps >= 0 && c.batch >= 1, ErrorCategory::Config, "gan steps/batch out of range");
}

Critic critic_of(const Discriminator& d) {
  return [&d](const nn::Tensor& x, const nn::Tensor& y) { return d(x, y); };
}

nn::Tensor adversarial_loss(const nn::Tensor& d_real, const nn::Tensor& d_fake) {
  const nn::Tensor real = nn::log(nn::clamp(d_real, kProbabilityEps, 1.0 - kProbabilityEps));
  const nn::Tensor fake =
      nn::log(nn::add_scalar(nn::neg(nn::clamp(d_fake, kProbabilityEps, 1.0 - kProbabilityEps)), 1.0));
  return nn::add(nn::mean(real), nn::mean(fake));
}

nn::Tensor adversarial_loss(const Critic& d, const nn::Tensor& x, const nn::Tensor& y_real, const nn::Tensor& y_fake) {
  return adversarial_loss(d(x, y_real), d(x, y_fake));
}

nn::Tensor generator_adversarial_loss(const nn::Tensor& d_fake) {
  return nn::neg(nn::mean(nn::log(nn::clamp(d_fake, kProbabilityEps, 1.0 - kProbabilityEps))));
}

nn::Tensor l1_loss(const nn::Tensor& y_target, const nn::Tensor& y_gen) {
  if (y_target.shape() != y_gen.shape())
    throw_error(ErrorCategory::Data, "l1_loss: shape " + nn::to_string(y_target.shape()) + " vs " +
                                         nn::to_string(y_gen.shape()));
  return nn::mean(nn::abs(nn::sub(y_target, y_gen)));
}

double content_loss(const Image& x, const Image& y, const metrics::FeatureExtractor& feat, int bins) {
  return metrics::nmi(x, y, bins) - metrics::feature_distance(x, y, feat) - metrics::mse(x, y);
}

nn::Tensor content_loss(const nn::Tensor& x, const nn::Tensor& y, const metrics::FeatureExtractor& feat, int bins) {
  if (x.shape() != y.shape()) throw_error(ErrorCategory::Data, "content_loss: shape mismatch");
  const nn::Tensor nmi = metrics::soft_nmi(x, y, bins);
  const nn::Tensor fd = nn::mean_per_sample(nn::square(nn::sub(feat.forward(x), feat.forward(y))));
  const nn::Tensor mse = nn::mean_per_sample(nn::square(nn::sub(x, y)));
  return nn::sub(nn::sub(nmi, fd), mse);
}

std::string ObjectiveTerms::breakdown() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "total=%.6g adversarial=%.6g l1=%.6g content=%.6g",
                total.defined() ? total.item() : NAN, adversarial, l1, content);
  return buf;
}

ObjectiveTerms generator_objective(const nn::Tensor& fake, const Critic& d, const metrics::FeatureExtractor& feat,
                                   const GanBatch& batch, const GanLossConfig& config) {
  if (batch.x.numel() == 0) throw_error(ErrorCategory::Data, "generator_objective: empty batch");
  const nn::Tensor d_fake = d(batch.x, fake);
  const nn::Tensor adv = generator_adversarial_loss(d_fake);
  const nn::Tensor l1 = l1_loss(batch.target, fake);
  nn::Tensor total = nn::add(adv, nn::scale(l1, config.lambda_l1));
  ObjectiveTerms t;
  if (config.content_weight != 0.0) {
    const nn::Tensor content = nn::mean(content_loss(batch.x, fake, feat, config.nmi_bins));
    total = nn::add(total, nn::scale(content, config.content_weight));
    t.content = content.item();
  }
  t.total = total;
  t.adversarial = adv.item();
  t.l1 = l1.item();
  double s = 0.0;
  for (double v : d_fake.data()) s += v;
  t.d_fake = s / static_cast<double>(d_fake.numel());
  if (!std::isfinite(total.item()) || !std::isfinite(t.adversarial) || !std::isfinite(t.l1) ||
      !std::isfinite(t.content))
    throw_error(ErrorCategory::Diverge, "generator objective is not finite: " + t.breakdown());
  return t;
}

ObjectiveTerms generator_objective(Generator& g, const Discriminator& d, const metrics::FeatureExtractor& feat,
                                   const GanBatch& batch, const GanLossConfig& config, bool training,
                                   bool track_stats) {
  const nn::Tensor fake = g.forward(batch.x, batch.z, training, track_stats);
  return generator_objective(fake, critic_of(d), feat, batch, config);
}

}  // namespace alforge::cgan
