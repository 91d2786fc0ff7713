#include "alforge/cgan/generator.hpp"

#include <algorithm>
#include <cmath>

#include "alforge/core/error.hpp"

namespace alforge::cgan {
namespace {

constexpr double kOutputGain = 0.1;
constexpr double kLogitClamp = 1e-4;

}  // namespace

Generator::Generator(const GeneratorShape& shape, RngStream& rng) : shape_(shape) {
  if (shape.rows % 8 != 0 || shape.cols % 8 != 0 || shape.rows <= 0 || shape.cols <= 0)
    throw_error(ErrorCategory::Config, "generator: image sides must be positive multiples of 8");
  if (shape.features < 1 || shape.blocks < 0 || shape.code_dim < 1)
    throw_error(ErrorCategory::Config, "generator: invalid architecture");
  const int f = shape.features;
  z_proj_ = nn::Linear(shape.code_dim, (shape.rows / 8) * (shape.cols / 8), rng);
  conv_in_ = nn::Conv2d(2, f, 3, 1, 1, rng);
  for (int b = 0; b < shape.blocks; ++b)
    blocks_.push_back({nn::Conv2d(f, f, 3, 1, 1, rng), nn::Conv2d(f, f, 3, 1, 1, rng), nn::BatchNorm2d(f),
                       nn::BatchNorm2d(f)});
  conv_out_ = nn::Conv2d(f, 1, 3, 1, 1, rng);
  for (double& w : conv_out_.weight.data()) w *= kOutputGain;
}

nn::Tensor Generator::forward(const nn::Tensor& x, const nn::Tensor& z, bool training, bool track_stats) {
  const int n = x.dim(0);
  if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != shape_.rows || x.dim(3) != shape_.cols)
    throw_error(ErrorCategory::Data, "generator: expected input [N, 1, " + std::to_string(shape_.rows) + ", " +
                                         std::to_string(shape_.cols) + "], got " + nn::to_string(x.shape()));
  if (z.rank() != 2 || z.dim(0) != n || z.dim(1) != shape_.code_dim)
    throw_error(ErrorCategory::Data, "generator: latent batch has shape " + nn::to_string(z.shape()));

  nn::Tensor zmap = nn::reshape(z_proj_(z), {n, 1, shape_.rows / 8, shape_.cols / 8});
  zmap = nn::upsample_nearest(zmap, 8);
  nn::Tensor h = nn::relu(conv_in_(nn::concat_channels(x, zmap)));
  auto norm = [&](nn::BatchNorm2d& bn, const nn::Tensor& t) {
    if (training && !track_stats) {
      nn::BatchNormState scratch = bn.state;
      return nn::batch_norm(t, scratch, true);
    }
    return bn(t, training);
  };
  for (auto& b : blocks_) {
    nn::Tensor r = nn::relu(norm(b.bn1, b.conv1(h)));
    r = norm(b.bn2, b.conv2(r));
    h = nn::add(h, r);
  }
  std::vector<double> base(x.numel());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double p = std::clamp(x.data()[i], kLogitClamp, 1.0 - kLogitClamp);
    base[i] = std::log(p / (1.0 - p));
  }
  return nn::sigmoid(nn::add(conv_out_(h), nn::Tensor::from(x.shape(), std::move(base))));
}

void Generator::visit(const std::string& prefix, const nn::ParameterVisitor& v) {
  z_proj_.visit(prefix + "z_proj", v);
  conv_in_.visit(prefix + "conv_in", v);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = prefix + "block" + std::to_string(i) + ".";
    blocks_[i].conv1.visit(p + "conv1", v);
    blocks_[i].bn1.visit(p + "bn1", v);
    blocks_[i].conv2.visit(p + "conv2", v);
    blocks_[i].bn2.visit(p + "bn2", v);
  }
  conv_out_.visit(prefix + "conv_out", v);
}

nn::Checkpoint to_checkpoint(Generator& g) {
  nn::Checkpoint cp;
  const auto& s = g.shape();
  cp.descriptor = {{"kind", "generator"},
                   {"rows", std::to_string(s.rows)},
                   {"cols", std::to_string(s.cols)},
                   {"code_dim", std::to_string(s.code_dim)},
                   {"features", std::to_string(s.features)},
                   {"blocks", std::to_string(s.blocks)}};
  nn::capture(g, "", cp);
  return cp;
}

Generator generator_from_checkpoint(const nn::Checkpoint& cp) {
  if (cp.get("kind") != "generator")
    throw_error(ErrorCategory::Data, "checkpoint holds a " + cp.get("kind") + ", not a generator");
  GeneratorShape s{std::stoi(cp.get("rows")), std::stoi(cp.get("cols")), std::stoi(cp.get("code_dim")),
                   std::stoi(cp.get("features")), std::stoi(cp.get("blocks"))};
  RngStream scratch(0, "restore");
  Generator g(s, scratch);
  nn::restore(g, "", cp);
  return g;
}

}  // namespace alforge::cgan
