#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "alforge/core/error.hpp"
#include "alforge/metrics/similarity.hpp"

namespace alforge::metrics {
namespace {

double bspline3(double t) {
  t = std::abs(t);
  if (t < 1.0) return 2.0 / 3.0 - t * t + 0.5 * t * t * t;
  if (t < 2.0) return (2.0 - t) * (2.0 - t) * (2.0 - t) / 6.0;
  return 0.0;
}

double bspline3_deriv(double t) {
  const double a = std::abs(t);
  const double s = t < 0 ? -1.0 : 1.0;
  if (a < 1.0) return -2.0 * t + 1.5 * t * a;
  if (a < 2.0) return -s * 0.5 * (2.0 - a) * (2.0 - a);
  return 0.0;
}

// Parzen weights of one value over the (at most four) bins it touches.
struct Support {
  int first = 0;
  int count = 0;
  std::array<double, 4> w{};
  std::array<double, 4> dw{};
};

Support support(double v, int bins) {
  const double u = v * bins - 0.5;
  const int lo = std::max(0, static_cast<int>(std::floor(u)) - 1);
  const int hi = std::min(bins - 1, static_cast<int>(std::floor(u)) + 2);
  Support s;
  s.first = lo;
  for (int k = lo; k <= hi; ++k) {
    s.w[s.count] = bspline3(u - k);
    s.dw[s.count] = bspline3_deriv(u - k) * bins;
    ++s.count;
  }
  return s;
}

struct SampleState {
  std::vector<Support> sx, sy;
  std::vector<double> p, px, py;  // normalized
  double z = 0.0, hx = 0.0, hy = 0.0, hxy = 0.0;
};

double plogp_sum(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0) h -= v * std::log(v);
  return h;
}

}  // namespace

nn::Tensor soft_nmi(const nn::Tensor& x, const nn::Tensor& y, int bins) {
  if (x.shape() != y.shape() || x.rank() != 4)
    throw_error(ErrorCategory::Data, "soft_nmi: expects two equally shaped [N, 1, H, W] tensors");
  if (bins < 2) throw_error(ErrorCategory::Config, "soft_nmi: bins must be at least 2");
  const int n = x.dim(0);
  const std::size_t per = x.numel() / n;
  const std::size_t nb = static_cast<std::size_t>(bins);

  auto states = std::make_shared<std::vector<SampleState>>(n);
  std::vector<double> out(n);
  for (int s = 0; s < n; ++s) {
    SampleState& st = (*states)[s];
    st.sx.resize(per);
    st.sy.resize(per);
    std::vector<double> joint(nb * nb, 0.0);
    for (std::size_t i = 0; i < per; ++i) {
      st.sx[i] = support(x.data()[s * per + i], bins);
      st.sy[i] = support(y.data()[s * per + i], bins);
      const Support &a = st.sx[i], &b = st.sy[i];
      for (int u = 0; u < a.count; ++u)
        for (int v = 0; v < b.count; ++v) joint[(a.first + u) * nb + b.first + v] += a.w[u] * b.w[v];
    }
    for (double v : joint) st.z += v;
    if (!(st.z > 0)) throw_error(ErrorCategory::Data, "soft_nmi: intensities outside the histogram range");
    st.p.resize(nb * nb);
    st.px.assign(nb, 0.0);
    st.py.assign(nb, 0.0);
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        const double p = joint[a * nb + b] / st.z;
        st.p[a * nb + b] = p;
        st.px[a] += p;
        st.py[b] += p;
      }
    st.hx = plogp_sum(st.px);
    st.hy = plogp_sum(st.py);
    st.hxy = plogp_sum(st.p);
    out[s] = 2.0 * (st.hx + st.hy - st.hxy) / (st.hx + st.hy);
  }

  nn::Node *xn = x.node(), *yn = y.node();
  return nn::make_result({n}, std::move(out), {x, y}, [xn, yn, states, n, per, nb](nn::Node& self) {
    for (int s = 0; s < n; ++s) {
      const SampleState& st = (*states)[s];
      const double g = self.grad[s];
      if (g == 0.0) continue;
      const double sum_h = st.hx + st.hy;
      // dNMI/dP, then through the normalization P = J / Z.
      std::vector<double> gj(nb * nb, 0.0);
      double mean_g = 0.0;
      for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
          const double p = st.p[a * nb + b];
          if (p <= 0) continue;
          const double d = 2.0 * (std::log(p) + 1.0) / sum_h -
                           2.0 * st.hxy * (std::log(st.px[a]) + std::log(st.py[b]) + 2.0) / (sum_h * sum_h);
          gj[a * nb + b] = d;
          mean_g += d * p;
        }
      for (std::size_t k = 0; k < gj.size(); ++k)
        if (st.p[k] > 0) gj[k] = g * (gj[k] - mean_g) / st.z;

      for (std::size_t i = 0; i < per; ++i) {
        const auto &a = st.sx[i], &b = st.sy[i];
        double gx = 0.0, gy = 0.0;
        for (int u = 0; u < a.count; ++u)
          for (int v = 0; v < b.count; ++v) {
            const double c = gj[(a.first + u) * nb + b.first + v];
            gx += c * a.dw[u] * b.w[v];
            gy += c * a.w[u] * b.dw[v];
          }
        if (xn->requires_grad) xn->ensure_grad()[s * per + i] += gx;
        if (yn->requires_grad) yn->ensure_grad()[s * per + i] += gy;
      }
    }
  });
}

}  // namespace alforge::metrics
