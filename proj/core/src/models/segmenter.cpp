#include "alforge/models/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "alforge/core/error.hpp"
#include "alforge/nn/image_tensor.hpp"
#include "alforge/nn/optim.hpp"

namespace alforge::models {
namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

SegmentationModel::SegmentationModel(int features, double dropout_rate, RngStream& rng)
    : features_(features), dropout_rate_(dropout_rate) {
  if (features < 1) throw_error(ErrorCategory::Config, "segmenter: features must be positive");
  const int f = features;
  enc1a_ = nn::Conv2d(1, f, 3, 1, 1, rng);
  enc1b_ = nn::Conv2d(f, f, 3, 1, 1, rng);
  enc2a_ = nn::Conv2d(f, 2 * f, 3, 1, 1, rng);
  enc2b_ = nn::Conv2d(2 * f, 2 * f, 3, 1, 1, rng);
  mid_ = nn::Conv2d(2 * f, 4 * f, 3, 1, 1, rng);
  dec2_ = nn::Conv2d(6 * f, 2 * f, 3, 1, 1, rng);
  dec1_ = nn::Conv2d(3 * f, f, 3, 1, 1, rng);
  out_ = nn::Conv2d(f, 2, 1, 1, 0, rng);
}

nn::Tensor SegmentationModel::forward(const nn::Tensor& x, RngStream* rng) const {
  if (x.dim(2) % 4 != 0 || x.dim(3) % 4 != 0)
    throw_error(ErrorCategory::Data, "segmenter: image sides must be multiples of 4");
  auto drop = [&](const nn::Tensor& t) { return rng ? nn::dropout(t, dropout_rate_, *rng) : t; };
  const nn::Tensor e1 = nn::relu(enc1b_(nn::relu(enc1a_(x))));
  const nn::Tensor e2 = nn::relu(enc2b_(nn::relu(enc2a_(nn::max_pool2d(e1, 2)))));
  const nn::Tensor m = nn::relu(mid_(nn::max_pool2d(e2, 2)));
  nn::Tensor d2 = nn::relu(dec2_(nn::concat_channels(nn::upsample_nearest(m, 2), e2)));
  d2 = drop(d2);
  nn::Tensor d1 = nn::relu(dec1_(nn::concat_channels(nn::upsample_nearest(d2, 2), e1)));
  d1 = drop(d1);
  return out_(d1);
}

void SegmentationModel::visit(const std::string& prefix, const nn::ParameterVisitor& v) {
  enc1a_.visit(prefix + "enc1a", v);
  enc1b_.visit(prefix + "enc1b", v);
  enc2a_.visit(prefix + "enc2a", v);
  enc2b_.visit(prefix + "enc2b", v);
  mid_.visit(prefix + "mid", v);
  dec2_.visit(prefix + "dec2", v);
  dec1_.visit(prefix + "dec1", v);
  out_.visit(prefix + "out", v);
}

SegmentationModel train_segmenter(const std::vector<ImageSample>& labeled, const ExperimentConfig& config,
                                  RngStream& rng) {
  if (labeled.empty()) throw_error(ErrorCategory::Data, "train_segmenter: empty labeled set");
  RngStream init = rng.child("init");
  SegmentationModel model(config.segmenter_features, config.dropout_rate, init);
  if (config.segmenter_steps <= 0) return model;

  nn::Adam opt(nn::parameters_of(model), {config.segmenter_learning_rate, 0.9, 0.999, 1e-8, 0.0});
  RngStream order_rng = rng.child("order");
  RngStream drop_rng = rng.child("dropout");
  RngStream noise_rng = rng.child("noise");
  const std::size_t n = labeled.size();
  const std::size_t batch = std::min<std::size_t>(n, static_cast<std::size_t>(config.effective_batch_size()));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;
  const int s = config.aleatoric_samples;

  for (int step = 0; step < config.segmenter_steps; ++step) {
    std::vector<const Image*> images;
    std::vector<double> targets;
    while (images.size() < batch) {
      if (cursor == n) {
        order_rng.shuffle(order);
        cursor = 0;
      }
      const ImageSample& sample = labeled[order[cursor++]];
      images.push_back(&sample.pixels);
      for (auto v : sample.mask.values()) targets.push_back(v ? 1.0 : 0.0);
    }
    std::vector<double> noise(targets.size() * s);
    for (double& e : noise) e = noise_rng.normal();
    opt.zero_grad();
    const nn::Tensor o = model.forward(nn::image_batch(images), &drop_rng);
    nn::Tensor loss = nn::heteroscedastic_bce(nn::select_channel(o, 0), nn::select_channel(o, 1), targets, noise, s);
    if (!std::isfinite(loss.item())) throw_error(ErrorCategory::Diverge, "train_segmenter: non-finite loss");
    loss.backward();
    opt.step();
  }
  nn::round_to_float32(model);
  return model;
}

Mask predict_mask(const SegmentationModel& model, const Image& image) {
  nn::NoGradGuard guard;
  const nn::Tensor o = model.forward(nn::image_batch(image), nullptr);
  Mask m(image.rows(), image.cols());
  for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = o.data()[i] > 0.0 ? 1 : 0;
  return m;
}

PixelMCSamples mc_forward(const SegmentationModel& model, const Image& image, int samples, RngStream& rng) {
  if (samples < 1) throw_error(ErrorCategory::Config, "mc_forward: T must be at least 1");
  nn::NoGradGuard guard;
  PixelMCSamples out{samples, image.rows(), image.cols(), {}, {}};
  const std::size_t p = out.pixels();
  out.y.reserve(p * samples);
  out.variance.reserve(p * samples);
  std::vector<const Image*> copies(static_cast<std::size_t>(samples), &image);
  const nn::Tensor o = model.forward(nn::image_batch(copies), &rng);
  for (int t = 0; t < samples; ++t) {
    const double* base = o.data().data() + static_cast<std::size_t>(t) * 2 * p;
    for (std::size_t i = 0; i < p; ++i) {
      out.y.push_back(sigmoid(base[i]));
      out.variance.push_back(sigmoid_noise_variance(base[i], base[p + i]));
    }
  }
  return out;
}

double image_uncertainty(const SegmentationModel& model, const Image& image, const ExperimentConfig& config,
                         RngStream& rng) {
  return mean_pixel_uncertainty(mc_forward(model, image, config.mc_samples, rng));
}

nn::Checkpoint to_checkpoint(SegmentationModel& model) {
  nn::Checkpoint cp;
  char rate[40];
  std::snprintf(rate, sizeof rate, "%.17g", model.dropout_rate());
  cp.descriptor = {{"kind", "segmenter"}, {"features", std::to_string(model.features())}, {"dropout_rate", rate}};
  nn::capture(model, "", cp);
  return cp;
}

SegmentationModel segmenter_from_checkpoint(const nn::Checkpoint& cp) {
  if (cp.get("kind") != "segmenter")
    throw_error(ErrorCategory::Data, "checkpoint holds a " + cp.get("kind") + ", not a segmenter");
  RngStream scratch(0, "restore");
  SegmentationModel m(std::stoi(cp.get("features")), std::stod(cp.get("dropout_rate")), scratch);
  nn::restore(m, "", cp);
  return m;
}

}  // namespace alforge::models
