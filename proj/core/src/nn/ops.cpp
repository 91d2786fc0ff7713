#include "alforge/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alforge::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                                to_string(b.shape()));
}

void check_rank(const Tensor& x, int rank, const char* op) {
  if (x.rank() != rank)
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                                to_string(x.shape()));
}

template <typename F, typename G>
Tensor unary(const Tensor& x, F&& forward, G&& derivative) {
  std::vector<double> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(in[i]);
  Node* xn = x.node();
  return make_result(x.shape(), std::move(out), {x}, [xn, derivative](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * derivative(xn->value[i], self.value[i]);
  });
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid_scalar(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  Node *an = a.node(), *bn = b.node();
  return make_result(a.shape(), std::move(out), {a, b}, [an, bn](Node& self) {
    for (Node* p : {an, bn}) {
      if (!p->requires_grad) continue;
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  Node *an = a.node(), *bn = b.node();
  return make_result(a.shape(), std::move(out), {a, b}, [an, bn](Node& self) {
    if (an->requires_grad) {
      auto& g = an->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (bn->requires_grad) {
      auto& g = bn->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  Node *an = a.node(), *bn = b.node();
  return make_result(a.shape(), std::move(out), {a, b}, [an, bn](Node& self) {
    if (an->requires_grad) {
      auto& g = an->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bn->value[i];
    }
    if (bn->requires_grad) {
      auto& g = bn->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * an->value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  return unary(a, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0 ? v : slope * v; },
      [slope](double v, double) { return v > 0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, sigmoid_scalar, [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x, double floor) {
  return unary(
      x, [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](double v, double) { return v > floor ? 1.0 / v : 0.0; });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
  return unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  return unary(
      x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Node* xn = x.node();
  return make_result({1}, {s}, {x}, [xn](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  return scale(sum(x), 1.0 / n);
}

Tensor mean_per_sample(const Tensor& x) {
  const int n = x.dim(0);
  const std::size_t per = x.numel() / n;
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < per; ++j) s += x.data()[i * per + j];
    out[i] = s / per;
  }
  Node* xn = x.node();
  return make_result({n}, std::move(out), {x}, [xn, n, per](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (int i = 0; i < n; ++i)
      for (std::size_t j = 0; j < per; ++j) g[i * per + j] += self.grad[i] / per;
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel())
    throw std::invalid_argument("reshape: " + to_string(x.shape()) + " -> " + to_string(shape));
  std::vector<double> out(x.data().begin(), x.data().end());
  Node* xn = x.node();
  return make_result(std::move(shape), std::move(out), {x}, [xn](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.rank() != b.rank() || a.rank() < 2 || a.dim(0) != b.dim(0))
    throw std::invalid_argument("concat_channels: incompatible shapes");
  for (int d = 2; d < a.rank(); ++d)
    if (a.dim(d) != b.dim(d)) throw std::invalid_argument("concat_channels: spatial mismatch");
  const int n = a.dim(0);
  const std::size_t pa = a.numel() / n, pb = b.numel() / n;
  Shape shape = a.shape();
  shape[1] += b.dim(1);
  std::vector<double> out(a.numel() + b.numel());
  for (int i = 0; i < n; ++i) {
    std::copy_n(a.data().begin() + i * pa, pa, out.begin() + i * (pa + pb));
    std::copy_n(b.data().begin() + i * pb, pb, out.begin() + i * (pa + pb) + pa);
  }
  Node *an = a.node(), *bn = b.node();
  return make_result(std::move(shape), std::move(out), {a, b}, [an, bn, n, pa, pb](Node& self) {
    if (an->requires_grad) {
      auto& g = an->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (std::size_t j = 0; j < pa; ++j) g[i * pa + j] += self.grad[i * (pa + pb) + j];
    }
    if (bn->requires_grad) {
      auto& g = bn->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (std::size_t j = 0; j < pb; ++j) g[i * pb + j] += self.grad[i * (pa + pb) + pa + j];
    }
  });
}

Tensor select_channel(const Tensor& x, int channel) {
  if (x.rank() < 2 || channel < 0 || channel >= x.dim(1)) throw std::invalid_argument("select_channel");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t plane = x.numel() / (static_cast<std::size_t>(n) * c);
  Shape shape = x.shape();
  shape[1] = 1;
  std::vector<double> out(static_cast<std::size_t>(n) * plane);
  for (int i = 0; i < n; ++i)
    std::copy_n(x.data().begin() + (static_cast<std::size_t>(i) * c + channel) * plane, plane,
                out.begin() + i * plane);
  Node* xn = x.node();
  return make_result(std::move(shape), std::move(out), {x}, [xn, n, c, channel, plane](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (int i = 0; i < n; ++i)
      for (std::size_t j = 0; j < plane; ++j)
        g[(static_cast<std::size_t>(i) * c + channel) * plane + j] += self.grad[i * plane + j];
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  check_rank(x, 2, "linear");
  check_rank(weight, 2, "linear weight");
  const int n = x.dim(0), in = x.dim(1), out_f = weight.dim(0);
  if (weight.dim(1) != in) throw std::invalid_argument("linear: weight expects " + std::to_string(weight.dim(1)) +
                                                       " inputs, got " + std::to_string(in));
  std::vector<double> out(static_cast<std::size_t>(n) * out_f);
  ConstMapMat X(x.data().data(), n, in);
  ConstMapMat W(weight.data().data(), out_f, in);
  MapMat Y(out.data(), n, out_f);
  Y.noalias() = X * W.transpose();
  if (bias.defined()) {
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out_f; ++o) Y(i, o) += bias.data()[o];
  }
  Node *xn = x.node(), *wn = weight.node(), *bn = bias.defined() ? bias.node() : nullptr;
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result({n, out_f}, std::move(out), inputs, [xn, wn, bn, n, in, out_f](Node& self) {
    ConstMapMat G(self.grad.data(), n, out_f);
    if (xn->requires_grad) {
      MapMat GX(xn->ensure_grad().data(), n, in);
      GX.noalias() += G * ConstMapMat(wn->value.data(), out_f, in);
    }
    if (wn->requires_grad) {
      MapMat GW(wn->ensure_grad().data(), out_f, in);
      GW.noalias() += G.transpose() * ConstMapMat(xn->value.data(), n, in);
    }
    if (bn && bn->requires_grad) {
      auto& gb = bn->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int o = 0; o < out_f; ++o) gb[o] += G(i, o);
    }
  });
}

namespace {

struct ConvGeometry {
  int n, c, h, w, o, k, stride, pad, ho, wo;
  int patch() const { return c * k * k; }
  int out_plane() const { return ho * wo; }
};

void im2col(const double* x, const ConvGeometry& g, double* cols) {
  const int plane = g.out_plane();
  for (int ci = 0; ci < g.c; ++ci) {
    const double* xc = x + static_cast<std::size_t>(ci) * g.h * g.w;
    for (int ki = 0; ki < g.k; ++ki) {
      for (int kj = 0; kj < g.k; ++kj) {
        double* row = cols + static_cast<std::size_t>((ci * g.k + ki) * g.k + kj) * plane;
        for (int oh = 0; oh < g.ho; ++oh) {
          const int ih = oh * g.stride - g.pad + ki;
          double* dst = row + oh * g.wo;
          if (ih < 0 || ih >= g.h) {
            std::fill_n(dst, g.wo, 0.0);
            continue;
          }
          const double* src = xc + static_cast<std::size_t>(ih) * g.w;
          for (int ow = 0; ow < g.wo; ++ow) {
            const int iw = ow * g.stride - g.pad + kj;
            dst[ow] = (iw >= 0 && iw < g.w) ? src[iw] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, const ConvGeometry& g, double* dx) {
  const int plane = g.out_plane();
  for (int ci = 0; ci < g.c; ++ci) {
    double* xc = dx + static_cast<std::size_t>(ci) * g.h * g.w;
    for (int ki = 0; ki < g.k; ++ki) {
      for (int kj = 0; kj < g.k; ++kj) {
        const double* row = cols + static_cast<std::size_t>((ci * g.k + ki) * g.k + kj) * plane;
        for (int oh = 0; oh < g.ho; ++oh) {
          const int ih = oh * g.stride - g.pad + ki;
          if (ih < 0 || ih >= g.h) continue;
          double* dst = xc + static_cast<std::size_t>(ih) * g.w;
          const double* src = row + oh * g.wo;
          for (int ow = 0; ow < g.wo; ++ow) {
            const int iw = ow * g.stride - g.pad + kj;
            if (iw >= 0 && iw < g.w) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding) {
  check_rank(x, 4, "conv2d");
  check_rank(weight, 4, "conv2d weight");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight.dim(0), weight.dim(2), stride, padding, 0, 0};
  if (weight.dim(1) != g.c || weight.dim(3) != g.k)
    throw std::invalid_argument("conv2d: weight " + to_string(weight.shape()) + " incompatible with input " +
                                to_string(x.shape()));
  g.ho = (g.h + 2 * padding - g.k) / stride + 1;
  g.wo = (g.w + 2 * padding - g.k) / stride + 1;
  if (g.ho <= 0 || g.wo <= 0) throw std::invalid_argument("conv2d: output would be empty");

  const std::size_t in_per = static_cast<std::size_t>(g.c) * g.h * g.w;
  const std::size_t out_per = static_cast<std::size_t>(g.o) * g.out_plane();
  std::vector<double> out(g.n * out_per);
  std::vector<double> cols(static_cast<std::size_t>(g.patch()) * g.out_plane());
  ConstMapMat W(weight.data().data(), g.o, g.patch());
  for (int i = 0; i < g.n; ++i) {
    im2col(x.data().data() + i * in_per, g, cols.data());
    MapMat Y(out.data() + i * out_per, g.o, g.out_plane());
    Y.noalias() = W * ConstMapMat(cols.data(), g.patch(), g.out_plane());
    if (bias.defined()) {
      for (int o = 0; o < g.o; ++o) Y.row(o).array() += bias.data()[o];
    }
  }

  Node *xn = x.node(), *wn = weight.node(), *bn = bias.defined() ? bias.node() : nullptr;
  std::vector<Tensor> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result({g.n, g.o, g.ho, g.wo}, std::move(out), inputs, [xn, wn, bn, g, in_per, out_per](Node& self) {
    std::vector<double> cols(static_cast<std::size_t>(g.patch()) * g.out_plane());
    std::vector<double> dcols;
    ConstMapMat W(wn->value.data(), g.o, g.patch());
    double* gw = wn->requires_grad ? wn->ensure_grad().data() : nullptr;
    double* gx = xn->requires_grad ? xn->ensure_grad().data() : nullptr;
    if (gx) dcols.resize(cols.size());
    for (int i = 0; i < g.n; ++i) {
      ConstMapMat G(self.grad.data() + i * out_per, g.o, g.out_plane());
      if (gw) {
        im2col(xn->value.data() + i * in_per, g, cols.data());
        MapMat(gw, g.o, g.patch()).noalias() += G * ConstMapMat(cols.data(), g.patch(), g.out_plane()).transpose();
      }
      if (gx) {
        MapMat D(dcols.data(), g.patch(), g.out_plane());
        D.noalias() = W.transpose() * G;
        col2im(dcols.data(), g, gx + i * in_per);
      }
      if (bn && bn->requires_grad) {
        auto& gb = bn->ensure_grad();
        for (int o = 0; o < g.o; ++o) gb[o] += G.row(o).sum();
      }
    }
  });
}

Tensor batch_norm(const Tensor& x, BatchNormState& st, bool training) {
  if (x.rank() != 4 && x.rank() != 2) throw std::invalid_argument("batch_norm: rank must be 2 or 4");
  const int n = x.dim(0), c = x.dim(1);
  const int plane = x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
  const double m = static_cast<double>(n) * plane;
  auto at = [c, plane](int i, int ch, int p) { return (static_cast<std::size_t>(i) * c + ch) * plane + p; };

  std::vector<double> mu(c), invstd(c);
  auto xv = x.data();
  if (training) {
    for (int ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int p = 0; p < plane; ++p) s += xv[at(i, ch, p)];
      const double mean_c = s / m;
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        for (int p = 0; p < plane; ++p) {
          const double d = xv[at(i, ch, p)] - mean_c;
          v += d * d;
        }
      v /= m;
      mu[ch] = mean_c;
      invstd[ch] = 1.0 / std::sqrt(v + st.eps);
      st.running_mean[ch] = (1.0 - st.momentum) * st.running_mean[ch] + st.momentum * mean_c;
      const double unbiased = m > 1 ? v * m / (m - 1.0) : v;
      st.running_var[ch] = (1.0 - st.momentum) * st.running_var[ch] + st.momentum * unbiased;
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      mu[ch] = st.running_mean[ch];
      invstd[ch] = 1.0 / std::sqrt(st.running_var[ch] + st.eps);
    }
  }

  std::vector<double> xhat(x.numel()), out(x.numel());
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch)
      for (int p = 0; p < plane; ++p) {
        const std::size_t k = at(i, ch, p);
        xhat[k] = (xv[k] - mu[ch]) * invstd[ch];
        out[k] = st.gamma.data()[ch] * xhat[k] + st.beta.data()[ch];
      }

  Node *xn = x.node(), *gn = st.gamma.node(), *bn = st.beta.node();
  return make_result(
      x.shape(), std::move(out), {x, st.gamma, st.beta},
      [xn, gn, bn, xhat = std::move(xhat), invstd, n, c, plane, m, training, at](Node& self) {
        const auto& gy = self.grad;
        std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
        for (int i = 0; i < n; ++i)
          for (int ch = 0; ch < c; ++ch)
            for (int p = 0; p < plane; ++p) {
              const std::size_t k = at(i, ch, p);
              sum_dy[ch] += gy[k];
              sum_dy_xhat[ch] += gy[k] * xhat[k];
            }
        if (gn->requires_grad) {
          auto& g = gn->ensure_grad();
          for (int ch = 0; ch < c; ++ch) g[ch] += sum_dy_xhat[ch];
        }
        if (bn->requires_grad) {
          auto& g = bn->ensure_grad();
          for (int ch = 0; ch < c; ++ch) g[ch] += sum_dy[ch];
        }
        if (!xn->requires_grad) return;
        auto& gx = xn->ensure_grad();
        for (int i = 0; i < n; ++i)
          for (int ch = 0; ch < c; ++ch) {
            const double gamma = gn->value[ch];
            for (int p = 0; p < plane; ++p) {
              const std::size_t k = at(i, ch, p);
              if (training) {
                gx[k] += gamma * invstd[ch] / m * (m * gy[k] - sum_dy[ch] - xhat[k] * sum_dy_xhat[ch]);
              } else {
                gx[k] += gamma * invstd[ch] * gy[k];
              }
            }
          }
      });
}

Tensor max_pool2d(const Tensor& x, int size) {
  check_rank(x, 4, "max_pool2d");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int ho = h / size, wo = w / size;
  std::vector<double> out(static_cast<std::size_t>(n) * c * ho * wo);
  std::vector<std::size_t> argmax(out.size());
  auto xv = x.data();
  std::size_t k = 0;
  for (int nc = 0; nc < n * c; ++nc)
    for (int oh = 0; oh < ho; ++oh)
      for (int ow = 0; ow < wo; ++ow, ++k) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (int a = 0; a < size; ++a)
          for (int b = 0; b < size; ++b) {
            const std::size_t idx = (static_cast<std::size_t>(nc) * h + oh * size + a) * w + ow * size + b;
            if (xv[idx] > best) {
              best = xv[idx];
              best_i = idx;
            }
          }
        out[k] = best;
        argmax[k] = best_i;
      }
  Node* xn = x.node();
  return make_result({n, c, ho, wo}, std::move(out), {x}, [xn, argmax = std::move(argmax)](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += self.grad[i];
  });
}

Tensor avg_pool2d(const Tensor& x, int size) {
  check_rank(x, 4, "avg_pool2d");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int ho = h / size, wo = w / size;
  const double inv = 1.0 / (size * size);
  std::vector<double> out(static_cast<std::size_t>(n) * c * ho * wo, 0.0);
  auto xv = x.data();
  for (int nc = 0; nc < n * c; ++nc)
    for (int oh = 0; oh < ho; ++oh)
      for (int ow = 0; ow < wo; ++ow) {
        double s = 0.0;
        for (int a = 0; a < size; ++a)
          for (int b = 0; b < size; ++b) s += xv[(static_cast<std::size_t>(nc) * h + oh * size + a) * w + ow * size + b];
        out[(static_cast<std::size_t>(nc) * ho + oh) * wo + ow] = s * inv;
      }
  Node* xn = x.node();
  return make_result({n, c, ho, wo}, std::move(out), {x}, [xn, n, c, h, w, ho, wo, size, inv](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (int nc = 0; nc < n * c; ++nc)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          const double d = self.grad[(static_cast<std::size_t>(nc) * ho + oh) * wo + ow] * inv;
          for (int a = 0; a < size; ++a)
            for (int b = 0; b < size; ++b) g[(static_cast<std::size_t>(nc) * h + oh * size + a) * w + ow * size + b] += d;
        }
  });
}

Tensor upsample_nearest(const Tensor& x, int factor) {
  check_rank(x, 4, "upsample_nearest");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int ho = h * factor, wo = w * factor;
  std::vector<double> out(static_cast<std::size_t>(n) * c * ho * wo);
  auto xv = x.data();
  for (int nc = 0; nc < n * c; ++nc)
    for (int r = 0; r < ho; ++r)
      for (int q = 0; q < wo; ++q)
        out[(static_cast<std::size_t>(nc) * ho + r) * wo + q] = xv[(static_cast<std::size_t>(nc) * h + r / factor) * w + q / factor];
  Node* xn = x.node();
  return make_result({n, c, ho, wo}, std::move(out), {x}, [xn, n, c, h, w, ho, wo, factor](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (int nc = 0; nc < n * c; ++nc)
      for (int r = 0; r < ho; ++r)
        for (int q = 0; q < wo; ++q)
          g[(static_cast<std::size_t>(nc) * h + r / factor) * w + q / factor] += self.grad[(static_cast<std::size_t>(nc) * ho + r) * wo + q];
  });
}

Tensor global_avg_pool(const Tensor& x) {
  check_rank(x, 4, "global_avg_pool");
  const int n = x.dim(0), c = x.dim(1);
  return reshape(mean_per_sample(reshape(x, {n * c, x.dim(2) * x.dim(3)})), {n, c});
}

Tensor global_max_pool(const Tensor& x) {
  check_rank(x, 4, "global_max_pool");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  std::vector<double> out(static_cast<std::size_t>(n) * c);
  std::vector<std::size_t> argmax(out.size());
  auto xv = x.data();
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto first = xv.begin() + k * plane;
    const auto it = std::max_element(first, first + plane);
    out[k] = *it;
    argmax[k] = static_cast<std::size_t>(it - xv.begin());
  }
  Node* xn = x.node();
  return make_result({n, c}, std::move(out), {x}, [xn, argmax = std::move(argmax)](Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->ensure_grad();
    for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += self.grad[i];
  });
}

Tensor dropout(const Tensor& x, double rate, RngStream& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.numel());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mul(x, Tensor::from(x.shape(), std::move(mask)));
}

Tensor heteroscedastic_bce(const Tensor& logit, const Tensor& log_var, std::span<const double> targets,
                           std::span<const double> noise, int samples) {
  check_same_shape(logit, log_var, "heteroscedastic_bce");
  const std::size_t m = logit.numel();
  if (targets.size() != m || noise.size() != m * static_cast<std::size_t>(samples) || samples < 1)
    throw std::invalid_argument("heteroscedastic_bce: targets/noise size mismatch");
  std::vector<double> dlogit(m), dlogvar(m);
  std::vector<double> ell(samples);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = targets[i];
    const double sd = std::exp(0.5 * log_var.data()[i]);
    double mx = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
      const double z = logit.data()[i] + sd * noise[s * m + i];
      ell[s] = t > 0.5 ? -softplus(-z) : -softplus(z);
      mx = std::max(mx, ell[s]);
    }
    double se = 0.0;
    for (int s = 0; s < samples; ++s) se += std::exp(ell[s] - mx);
    total += -(mx + std::log(se) - std::log(static_cast<double>(samples)));
    double gl = 0.0, gv = 0.0;
    for (int s = 0; s < samples; ++s) {
      const double weight = std::exp(ell[s] - mx) / se;
      const double z = logit.data()[i] + sd * noise[s * m + i];
      const double dz = -weight * ((t > 0.5 ? 1.0 : 0.0) - sigmoid_scalar(z));
      gl += dz;
      gv += dz * 0.5 * sd * noise[s * m + i];
    }
    dlogit[i] = gl / m;
    dlogvar[i] = gv / m;
  }
  Node *ln = logit.node(), *vn = log_var.node();
  return make_result({1}, {total / m}, {logit, log_var},
                     [ln, vn, dlogit = std::move(dlogit), dlogvar = std::move(dlogvar)](Node& self) {
                       if (ln->requires_grad) {
                         auto& g = ln->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * dlogit[i];
                       }
                       if (vn->requires_grad) {
                         auto& g = vn->ensure_grad();
                         for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * dlogvar[i];
                       }
                     });
}

Tensor bce_with_logits(const Tensor& logit, std::span<const double> targets, std::span<const double> weights) {
  const std::size_t m = logit.numel();
  if (targets.size() != m) throw std::invalid_argument("bce_with_logits: target size mismatch");
  if (!weights.empty() && weights.size() != m) throw std::invalid_argument("bce_with_logits: weight size mismatch");
  double total = 0.0;
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double z = logit.data()[i], t = targets[i];
    const double w = weights.empty() ? 1.0 : weights[i];
    total += w * (t * softplus(-z) + (1.0 - t) * softplus(z));
    d[i] = w * (sigmoid_scalar(z) - t) / m;
  }
  Node* ln = logit.node();
  return make_result({1}, {total / m}, {logit}, [ln, d = std::move(d)](Node& self) {
    if (!ln->requires_grad) return;
    auto& g = ln->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * d[i];
  });
}

}  // namespace alforge::nn
