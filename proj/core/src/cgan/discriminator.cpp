#include "alforge/cgan/discriminator.hpp"

#include "alforge/core/error.hpp"

namespace alforge::cgan {

Discriminator::Discriminator(const DiscriminatorShape& shape, RngStream& rng) : shape_(shape) {
  if (shape.conv_layers < 2 || shape.conv_layers % 2 != 0)
    throw_error(ErrorCategory::Config, "discriminator: conv_layers must be even and at least 2");
  const int halvings = shape.conv_layers / 2;
  if (shape.rows % (1 << halvings) != 0 || shape.cols % (1 << halvings) != 0)
    throw_error(ErrorCategory::Config, "discriminator: image sides must be divisible by 2^(conv_layers/2)");
  if (shape.base_features < 1) throw_error(ErrorCategory::Config, "discriminator: base_features must be positive");
  int in = 2, f = shape.base_features;
  for (int i = 0; i < shape.conv_layers; ++i) {
    const bool strided = i % 2 == 1;
    convs_.emplace_back(in, f, 3, strided ? 2 : 1, 1, rng);
    in = f;
    if (strided && i + 1 < shape.conv_layers) f *= 2;
  }
  const int flat = in * (shape.rows >> halvings) * (shape.cols >> halvings);
  dense1_ = nn::Linear(flat, 2 * in, rng);
  dense2_ = nn::Linear(2 * in, 1, rng);
}

nn::Tensor Discriminator::logits(const nn::Tensor& x, const nn::Tensor& y) const {
  if (x.shape() != y.shape() || x.rank() != 4 || x.dim(2) != shape_.rows || x.dim(3) != shape_.cols)
    throw_error(ErrorCategory::Data, "discriminator: mismatched pair " + nn::to_string(x.shape()) + " / " +
                                         nn::to_string(y.shape()));
  nn::Tensor h = nn::concat_channels(x, y);
  for (const auto& c : convs_) h = nn::leaky_relu(c(h), kLeakySlope);
  h = nn::reshape(h, {x.dim(0), static_cast<int>(h.numel()) / x.dim(0)});
  h = nn::leaky_relu(dense1_(h), kLeakySlope);
  return dense2_(h);
}

nn::Tensor Discriminator::operator()(const nn::Tensor& x, const nn::Tensor& y) const {
  return nn::sigmoid(logits(x, y));
}

void Discriminator::visit(const std::string& prefix, const nn::ParameterVisitor& v) {
  for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].visit(prefix + "conv" + std::to_string(i), v);
  dense1_.visit(prefix + "dense1", v);
  dense2_.visit(prefix + "dense2", v);
}

nn::Checkpoint to_checkpoint(Discriminator& d) {
  nn::Checkpoint cp;
  const auto& s = d.shape();
  cp.descriptor = {{"kind", "discriminator"},
                   {"rows", std::to_string(s.rows)},
                   {"cols", std::to_string(s.cols)},
                   {"base_features", std::to_string(s.base_features)},
                   {"conv_layers", std::to_string(s.conv_layers)}};
  nn::capture(d, "", cp);
  return cp;
}

Discriminator discriminator_from_checkpoint(const nn::Checkpoint& cp) {
  if (cp.get("kind") != "discriminator")
    throw_error(ErrorCategory::Data, "checkpoint holds a " + cp.get("kind") + ", not a discriminator");
  DiscriminatorShape s{std::stoi(cp.get("rows")), std::stoi(cp.get("cols")), std::stoi(cp.get("base_features")),
                       std::stoi(cp.get("conv_layers"))};
  RngStream scratch(0, "restore");
  Discriminator d(s, scratch);
  nn::restore(d, "", cp);
  return d;
}

}  // namespace alforge::cgan
