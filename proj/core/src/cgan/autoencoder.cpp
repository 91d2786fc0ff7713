#include "alforge/cgan/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "alforge/core/error.hpp"
#include "alforge/nn/optim.hpp"

namespace alforge::cgan {
namespace {

constexpr int kChannels = 16;

nn::Tensor mask_batch(const std::vector<const Mask*>& masks) {
  const int rows = masks.front()->rows(), cols = masks.front()->cols();
  std::vector<double> v;
  v.reserve(masks.size() * masks.front()->size());
  for (const Mask* m : masks)
    for (auto p : m->values()) v.push_back(p ? 1.0 : 0.0);
  return nn::Tensor::from({static_cast<int>(masks.size()), 1, rows, cols}, std::move(v));
}

void check_shape(const MaskAutoencoder& ae, const Mask& m) {
  if (m.rows() != ae.rows() || m.cols() != ae.cols())
    throw_error(ErrorCategory::Data, "autoencoder: mask is " + std::to_string(m.rows()) + "x" +
                                         std::to_string(m.cols()) + ", expected " + std::to_string(ae.rows()) + "x" +
                                         std::to_string(ae.cols()));
}

}  // namespace

MaskAutoencoder::MaskAutoencoder(int rows, int cols, int code_dim, RngStream& rng)
    : rows_(rows), cols_(cols), code_dim_(code_dim) {
  if (rows % 8 != 0 || cols % 8 != 0 || rows <= 0 || cols <= 0)
    throw_error(ErrorCategory::Config, "autoencoder: mask sides must be positive multiples of 8");
  if (code_dim < 1 || code_dim >= rows * cols)
    throw_error(ErrorCategory::Config, "autoencoder: code_dim must be in [1, rows*cols) to compress");
  const int flat = kChannels * (rows / 8) * (cols / 8);
  e1_ = nn::Conv2d(1, 8, 3, 2, 1, rng);
  e2_ = nn::Conv2d(8, kChannels, 3, 2, 1, rng);
  e3_ = nn::Conv2d(kChannels, kChannels, 3, 2, 1, rng);
  to_code_ = nn::Linear(flat, code_dim, rng);
  from_code_ = nn::Linear(code_dim, flat, rng);
  d1_ = nn::Conv2d(kChannels, kChannels, 3, 1, 1, rng);
  d2_ = nn::Conv2d(kChannels, 8, 3, 1, 1, rng);
  d3_ = nn::Conv2d(8, 1, 3, 1, 1, rng);
}

nn::Tensor MaskAutoencoder::encode(const nn::Tensor& masks) const {
  nn::Tensor h = nn::relu(e1_(masks));
  h = nn::relu(e2_(h));
  h = nn::relu(e3_(h));
  h = nn::reshape(h, {masks.dim(0), kChannels * (rows_ / 8) * (cols_ / 8)});
  return to_code_(h);
}

nn::Tensor MaskAutoencoder::decode(const nn::Tensor& codes) const {
  nn::Tensor h = nn::relu(from_code_(codes));
  h = nn::reshape(h, {codes.dim(0), kChannels, rows_ / 8, cols_ / 8});
  h = nn::relu(d1_(nn::upsample_nearest(h, 2)));
  h = nn::relu(d2_(nn::upsample_nearest(h, 2)));
  return d3_(nn::upsample_nearest(h, 2));
}

void MaskAutoencoder::visit(const std::string& prefix, const nn::ParameterVisitor& v) {
  e1_.visit(prefix + "enc1", v);
  e2_.visit(prefix + "enc2", v);
  e3_.visit(prefix + "enc3", v);
  to_code_.visit(prefix + "to_code", v);
  from_code_.visit(prefix + "from_code", v);
  d1_.visit(prefix + "dec1", v);
  d2_.visit(prefix + "dec2", v);
  d3_.visit(prefix + "dec3", v);
}

LatentCode encode_mask(const MaskAutoencoder& ae, const Mask& mask) {
  check_shape(ae, mask);
  nn::NoGradGuard guard;
  const nn::Tensor code = ae.encode(mask_batch({&mask}));
  return LatentCode(code.data().begin(), code.data().end());
}

nn::Tensor encode_masks(const MaskAutoencoder& ae, const std::vector<const Mask*>& masks) {
  for (const Mask* m : masks) check_shape(ae, *m);
  nn::NoGradGuard guard;
  return ae.encode(mask_batch(masks)).detach();
}

Mask reconstruct_mask(const MaskAutoencoder& ae, const Mask& mask) {
  check_shape(ae, mask);
  nn::NoGradGuard guard;
  const nn::Tensor logits = ae.decode(ae.encode(mask_batch({&mask})));
  Mask out(ae.rows(), ae.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = logits.data()[i] > 0.0 ? 1 : 0;
  return out;
}

double reconstruction_accuracy(const MaskAutoencoder& ae, const std::vector<Mask>& masks) {
  if (masks.empty()) return 1.0;
  std::size_t hit = 0, total = 0;
  for (const auto& m : masks) {
    const Mask r = reconstruct_mask(ae, m);
    for (std::size_t i = 0; i < m.size(); ++i) hit += (m.values()[i] != 0) == (r.values()[i] != 0);
    total += m.size();
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

MaskAutoencoder train_autoencoder(const std::vector<Mask>& masks, const ExperimentConfig& config, RngStream& rng) {
  if (masks.size() < 2) throw_error(ErrorCategory::Data, "train_autoencoder: need at least two masks");
  const int rows = masks.front().rows(), cols = masks.front().cols();
  RngStream init = rng.child("init");
  MaskAutoencoder ae(rows, cols, config.code_dim, init);
  for (const auto& m : masks) check_shape(ae, m);

  std::vector<std::size_t> order(masks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RngStream split = rng.child("split");
  split.shuffle(order);
  const std::size_t n_held = std::max<std::size_t>(1, masks.size() / 5);
  std::vector<Mask> held;
  std::vector<const Mask*> train;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_held) held.push_back(masks[order[i]]);
    else train.push_back(&masks[order[i]]);
  }

  nn::Adam opt(nn::parameters_of(ae), {config.ae_learning_rate, 0.9, 0.999, 1e-8, 0.0});
  RngStream batches = rng.child("batches");
  const std::size_t batch = std::min<std::size_t>(train.size(), 16);
  for (int step = 0; step < config.ae_steps; ++step) {
    std::vector<const Mask*> chosen;
    std::vector<double> targets;
    for (std::size_t i = 0; i < batch; ++i) {
      const Mask* m = train[batches.uniform_index(train.size())];
      chosen.push_back(m);
      for (auto p : m->values()) targets.push_back(p ? 1.0 : 0.0);
    }
    opt.zero_grad();
    nn::Tensor loss = nn::bce_with_logits(ae.decode(ae.encode(mask_batch(chosen))), targets);
    if (!std::isfinite(loss.item())) throw_error(ErrorCategory::Diverge, "train_autoencoder: non-finite loss");
    loss.backward();
    opt.step();
  }
  nn::round_to_float32(ae);
  ae.set_heldout_accuracy(reconstruction_accuracy(ae, held));
  if (ae.heldout_accuracy() < kMinReconstructionAccuracy) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "train_autoencoder: held-out accuracy %.4f below %.2f after %d steps",
                  ae.heldout_accuracy(), kMinReconstructionAccuracy, config.ae_steps);
    throw_error(ErrorCategory::Train, buf);
  }
  return ae;
}

nn::Checkpoint to_checkpoint(MaskAutoencoder& ae) {
  nn::Checkpoint cp;
  cp.descriptor = {{"kind", "mask_autoencoder"},
                   {"rows", std::to_string(ae.rows())},
                   {"cols", std::to_string(ae.cols())},
                   {"code_dim", std::to_string(ae.code_dim())},
                   {"heldout_accuracy", std::to_string(ae.heldout_accuracy())}};
  nn::capture(ae, "", cp);
  return cp;
}

MaskAutoencoder autoencoder_from_checkpoint(const nn::Checkpoint& cp) {
  if (cp.get("kind") != "mask_autoencoder")
    throw_error(ErrorCategory::Data, "checkpoint holds a " + cp.get("kind") + ", not a mask_autoencoder");
  RngStream scratch(0, "restore");
  MaskAutoencoder ae(std::stoi(cp.get("rows")), std::stoi(cp.get("cols")), std::stoi(cp.get("code_dim")), scratch);
  nn::restore(ae, "", cp);
  ae.set_heldout_accuracy(std::stod(cp.get("heldout_accuracy")));
  return ae;
}

}  // namespace alforge::cgan
