#include "alforge/cgan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "alforge/core/error.hpp"
#include "alforge/maskops/perturb.hpp"
#include "alforge/nn/image_tensor.hpp"
#include "alforge/nn/optim.hpp"

namespace alforge::cgan {
namespace {

struct PairSource {
  const std::vector<ImageSample>& dataset;
  const nn::Tensor& codes;  // [N, code_dim], dataset order
  const ExperimentConfig& config;

  // Conditioning image: a perturbed copy of the sample; falls back to the
  // sample itself when its mask admits no perturbation.
  Image condition(const ImageSample& s, RngStream& rng) const {
    try {
      return maskops::perturb(s, config, rng).image;
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::Data) throw;
      return s.pixels;
    }
  }

  GanBatch make(const std::vector<std::size_t>& indices, const std::string& tag, const RngStream& rng) const {
    std::vector<Image> cond;
    std::vector<const Image*> targets;
    std::vector<double> z;
    const int dim = codes.dim(1);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const ImageSample& s = dataset[indices[k]];
      RngStream r = rng.child(tag + "-" + std::to_string(k));
      cond.push_back(condition(s, r));
      targets.push_back(&s.pixels);
      const auto row = codes.data().subspan(indices[k] * dim, dim);
      z.insert(z.end(), row.begin(), row.end());
    }
    std::vector<const Image*> cond_ptrs;
    for (const auto& c : cond) cond_ptrs.push_back(&c);
    return {nn::image_batch(cond_ptrs), nn::Tensor::from({static_cast<int>(indices.size()), dim}, std::move(z)),
            nn::image_batch(targets)};
  }
};

double mean_of(const nn::Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v;
  return s / static_cast<double>(t.numel());
}

std::string history_tail(const std::vector<GanLogEntry>& history) {
  const std::size_t from = history.size() > 3 ? history.size() - 3 : 0;
  return format_history(std::vector<GanLogEntry>(history.begin() + static_cast<std::ptrdiff_t>(from), history.end()));
}

}  // namespace

std::string format_history(const std::vector<GanLogEntry>& history) {
  std::string out = std::string(kLossHistoryHeader) + "\n";
  char buf[320];
  for (const auto& e : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.step, e.d_loss, e.d_real,
                  e.d_fake, e.g_total, e.g_adversarial, e.g_l1, e.g_content, e.monitor);
    out += buf;
  }
  return out;
}

GeneratorShape generator_shape(const ExperimentConfig& c) {
  return {c.image_rows, c.image_cols, c.code_dim, c.gen_features, c.gen_blocks};
}

DiscriminatorShape discriminator_shape(const ExperimentConfig& c) {
  return {c.image_rows, c.image_cols, c.disc_base_features, 8};
}

GanModels train_cgan(const std::vector<ImageSample>& dataset, const MaskAutoencoder& ae,
                     const metrics::FeatureExtractor& feat, const ExperimentConfig& config, RngStream& rng) {
  RngStream init = rng.child("init");
  Generator g(generator_shape(config), init);
  Discriminator d(discriminator_shape(config), init);
  return train_cgan(dataset, ae, feat, config, rng, std::move(g), std::move(d));
}

GanModels train_cgan(const std::vector<ImageSample>& dataset, const MaskAutoencoder& ae,
                     const metrics::FeatureExtractor& feat, const ExperimentConfig& config, RngStream& rng,
                     Generator generator, Discriminator discriminator) {
  if (dataset.empty()) throw_error(ErrorCategory::Data, "train_cgan: empty dataset");
  const GanLossConfig lc = GanLossConfig::from(config);
  validate(lc);

  GanModels out{std::move(generator), std::move(discriminator), {}, 0.0};
  Generator& g = out.generator;
  Discriminator& d = out.discriminator;

  std::vector<const Mask*> masks;
  for (const auto& s : dataset) masks.push_back(&s.mask);
  const nn::Tensor codes = encode_masks(ae, masks);
  const PairSource pairs{dataset, codes, config};

  std::vector<std::size_t> monitor_idx;
  for (std::size_t i = 0; i < std::min<std::size_t>(dataset.size(), static_cast<std::size_t>(lc.batch)); ++i)
    monitor_idx.push_back(i);
  const GanBatch monitor = pairs.make(monitor_idx, "monitor", rng);
  auto monitor_value = [&] {
    nn::NoGradGuard guard;
    return generator_objective(g, d, feat, monitor, lc, true, false).total.item();
  };

  auto g_params = nn::parameters_of(g);
  auto d_params = nn::parameters_of(d);
  nn::Adam g_opt(g_params, {lc.learning_rate, lc.beta1, 0.999, 1e-8, 0.0});
  nn::Adam d_opt(d_params, {lc.learning_rate, lc.beta1, 0.999, 1e-8, 0.0});
  RngStream batches = rng.child("batches");

  for (int step = 1; step <= lc.steps; ++step) {
    GanLogEntry e;
    e.step = step;
    e.monitor = monitor_value();

    std::vector<std::size_t> idx(static_cast<std::size_t>(lc.batch));
    for (auto& i : idx) i = batches.uniform_index(dataset.size());
    const GanBatch batch = pairs.make(idx, "pair-" + std::to_string(step), rng);

    // Discriminator ascends the adversarial objective.
    nn::Tensor fake;
    {
      nn::NoGradGuard guard;
      fake = g.forward(batch.x, batch.z, true, false).detach();
    }
    d_opt.zero_grad();
    const nn::Tensor d_real = d(batch.x, batch.target);
    const nn::Tensor d_fake = d(batch.x, fake);
    nn::Tensor d_loss = nn::neg(adversarial_loss(d_real, d_fake));
    e.d_loss = d_loss.item();
    e.d_real = mean_of(d_real);
    e.d_fake = mean_of(d_fake);
    if (!std::isfinite(e.d_loss)) {
      out.history.push_back(e);
      throw_error(ErrorCategory::Diverge, "train_cgan: discriminator loss not finite at step " +
                                              std::to_string(step) + "\n" + history_tail(out.history));
    }
    d_loss.backward();
    d_opt.step();

    g_opt.zero_grad();
    ObjectiveTerms t;
    try {
      t = generator_objective(g, d, feat, batch, lc, true, true);
    } catch (const Error& err) {
      out.history.push_back(e);
      throw_error(err.category(), std::string(err.what()) + " at step " + std::to_string(step) + "\n" +
                                      history_tail(out.history));
    }
    t.total.backward();
    g_opt.step();
    e.g_total = t.total.item();
    e.g_adversarial = t.adversarial;
    e.g_l1 = t.l1;
    e.g_content = t.content;
    out.history.push_back(e);
  }
  if (lc.steps > 0) {
    nn::round_to_float32(g);
    nn::round_to_float32(d);
  }
  out.final_monitor = monitor_value();
  return out;
}

}  // namespace alforge::cgan
