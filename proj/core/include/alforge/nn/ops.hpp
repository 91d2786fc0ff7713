#pragma once

#include <span>
#include <vector>

#include "alforge/core/rng.hpp"
#include "alforge/nn/tensor.hpp"

// Differentiable tensor operations. Image tensors are laid out NCHW; dense
// activations are [N, F].
namespace alforge::nn {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
/// Natural log of max(x, floor).
Tensor log(const Tensor& x, double floor = 0.0);
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);
/// Values clamped to [lo, hi]; gradient passes only where unclamped.
Tensor clamp(const Tensor& x, double lo, double hi);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// [N, ...] -> [N]
Tensor mean_per_sample(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
/// Concatenates along dimension 1.
Tensor concat_channels(const Tensor& a, const Tensor& b);
/// [N, C, H, W] -> [N, 1, H, W]; [N, F] -> [N, 1].
Tensor select_channel(const Tensor& x, int channel);

/// y = x W^T + b with x [N, in], W [out, in], b [out] (b may be undefined).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
/// Square kernels; W [O, C, k, k], b [O] (may be undefined).
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding);

struct BatchNormState {
  Tensor gamma;
  Tensor beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};
/// Per-channel normalization over N, H, W. Training mode uses batch
/// statistics and updates the running estimates.
Tensor batch_norm(const Tensor& x, BatchNormState& state, bool training);

Tensor max_pool2d(const Tensor& x, int size);
Tensor avg_pool2d(const Tensor& x, int size);
Tensor upsample_nearest(const Tensor& x, int factor);
/// [N, C, H, W] -> [N, C]
Tensor global_avg_pool(const Tensor& x);
Tensor global_max_pool(const Tensor& x);

/// Inverted dropout; the keep mask is drawn from `rng`. rate 0 is identity.
Tensor dropout(const Tensor& x, double rate, RngStream& rng);

/// Mean over elements of -log((1/S) sum_s p(target | logit + exp(log_var/2) eps_s)),
/// the Bernoulli likelihood integrated over Gaussian logit noise.
/// `noise` holds S * numel(logit) standard normals, sample-major.
Tensor heteroscedastic_bce(const Tensor& logit, const Tensor& log_var, std::span<const double> targets,
                           std::span<const double> noise, int samples);
/// Mean binary cross-entropy of sigmoid(logit) against targets, optionally
/// weighted per element (the mean still divides by the element count).
Tensor bce_with_logits(const Tensor& logit, std::span<const double> targets, std::span<const double> weights = {});

}  // namespace alforge::nn
