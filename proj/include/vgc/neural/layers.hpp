#pragma once

// Layer kernels with hand-derived gradients. Every *_backward accumulates
// (+=) into its gradient outputs so per-sample gradients can be summed.
// Grid tensors use layout ((c * Z + z) * Y + y) * X + x.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "vgc/error.hpp"
#include "vgc/volume.hpp"

namespace vgc::nn {

enum class Activation : std::uint8_t { None, Relu, Elu };

template <class T>
inline T activate(Activation a, T x) {
  switch (a) {
    case Activation::Relu: return x > T(0) ? x : T(0);
    case Activation::Elu: return x > T(0) ? x : std::expm1(x);
    case Activation::None: break;
  }
  return x;
}

/// d activate / dx, written in terms of the input x and output y.
template <class T>
inline T activate_grad(Activation a, T x, T y) {
  switch (a) {
    case Activation::Relu: return x > T(0) ? T(1) : T(0);
    case Activation::Elu: return x > T(0) ? T(1) : y + T(1);
    case Activation::None: break;
  }
  return T(1);
}

/// Applies the activation elementwise.
template <class T>
void activate_inplace(Activation a, T* y, std::size_t n) {
  if (a == Activation::Relu) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] > T(0) ? y[i] : T(0);
  } else if (a == Activation::Elu) {
    for (std::size_t i = 0; i < n; ++i) y[i] = activate(a, y[i]);
  }
}

/// g *= activation'(x), using that y > 0 exactly when x > 0 for ReLU and ELU.
template <class T>
void activate_backward(Activation a, const T* y, T* g, std::size_t n) {
  if (a == Activation::Relu) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) g[i] = y[i] > T(0) ? g[i] : T(0);
  } else if (a == Activation::Elu) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) g[i] *= y[i] > T(0) ? T(1) : y[i] + T(1);
  }
}

template <class T>
bool all_finite(const T* y, std::size_t n) {
  T probe = T(0);
#pragma omp simd reduction(+ : probe)
  for (std::size_t i = 0; i < n; ++i) probe += y[i] * T(0);
  return probe == T(0);
}

template <class T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T s = T(0);
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <class T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// ---------------------------------------------------------------- dense

/// y = W x + b with W stored out x in, row-major.
template <class T>
void dense_forward(std::size_t in, std::size_t out, const T* w, const T* b,
                   const T* x, T* y) {
  for (std::size_t o = 0; o < out; ++o) y[o] = b[o] + dot(w + o * in, x, in);
}

template <class T>
void dense_backward(std::size_t in, std::size_t out, const T* w, const T* x,
                    const T* dy, T* dw, T* db, T* dx) {
  for (std::size_t o = 0; o < out; ++o) {
    db[o] += dy[o];
    axpy(dy[o], x, dw + o * in, in);
    if (dx) axpy(dy[o], w + o * in, dx, in);
  }
}

// ---------------------------------------------------------------- conv

/// Valid cross-correlation, stride 1. 2D convolutions use kernel z = 1 on
/// grids with z = 1. Weights are cout x cin x kz x ky x kx, then cout biases.
struct ConvShape {
  std::uint32_t cin = 1;
  std::uint32_t cout = 1;
  std::array<std::uint32_t, 3> kernel{1, 1, 1};  // x, y, z
  std::array<std::uint32_t, 3> in{1, 1, 1};

  [[nodiscard]] std::array<std::uint32_t, 3> out() const {
    std::array<std::uint32_t, 3> o{};
    for (int a = 0; a < 3; ++a) {
      if (kernel[a] > in[a] || kernel[a] == 0) {
        throw SpecError("conv: kernel larger than input");
      }
      o[a] = in[a] - kernel[a] + 1;
    }
    return o;
  }
  [[nodiscard]] std::size_t kernel_volume() const {
    return std::size_t{kernel[0]} * kernel[1] * kernel[2];
  }
  [[nodiscard]] std::size_t weight_count() const {
    return std::size_t{cin} * cout * kernel_volume();
  }
};

namespace detail {

// Outputs are computed in the input's memory layout: output (ox, oy, oz) lives
// at (oz * Y + oy) * X + ox, so every kernel tap is one contiguous axpy over
// `span` elements. Border positions are computed and discarded.
inline std::size_t conv_span(const ConvShape& s) {
  const auto o = s.out();
  return ((std::size_t{o[2]} - 1) * s.in[1] + (o[1] - 1)) * s.in[0] + o[0];
}

}  // namespace detail

template <class T>
void conv_forward(const ConvShape& s, const T* w, const T* b, const T* x, T* y) {
  constexpr std::size_t B = 4;  // output channels per pass over the input
  const auto o = s.out();
  const std::size_t X = s.in[0], Y = s.in[1], Z = s.in[2];
  const std::size_t OX = o[0], OY = o[1], OZ = o[2];
  const std::size_t in_plane = X * Y * Z, out_plane = OX * OY * OZ;
  const std::size_t kx = s.kernel[0], ky = s.kernel[1], kz = s.kernel[2];
  const std::size_t kv = s.kernel_volume();
  const std::size_t span = detail::conv_span(s);
  std::vector<T> buf(B * span);
  for (std::size_t c0 = 0; c0 < s.cout; c0 += B) {
    const std::size_t nb = std::min(B, std::size_t{s.cout} - c0);
    std::fill(buf.begin(), buf.end(), T(0));
    T* b0 = buf.data();
    T* b1 = b0 + span;
    T* b2 = b1 + span;
    T* b3 = b2 + span;
    for (std::size_t ci = 0; ci < s.cin; ++ci) {
      const T* xi = x + ci * in_plane;
      std::size_t k = 0;
      for (std::size_t dz = 0; dz < kz; ++dz)
        for (std::size_t dy = 0; dy < ky; ++dy)
          for (std::size_t dx = 0; dx < kx; ++dx, ++k) {
            const T* xs = xi + (dz * Y + dy) * X + dx;
            T wv[B] = {};
            for (std::size_t j = 0; j < nb; ++j) wv[j] = w[((c0 + j) * s.cin + ci) * kv + k];
#pragma omp simd
            for (std::size_t i = 0; i < span; ++i) {
              const T xv = xs[i];
              b0[i] += wv[0] * xv;
              b1[i] += wv[1] * xv;
              b2[i] += wv[2] * xv;
              b3[i] += wv[3] * xv;
            }
          }
    }
    for (std::size_t j = 0; j < nb; ++j) {
      T* yo = y + (c0 + j) * out_plane;
      const T* bj = buf.data() + j * span;
      for (std::size_t oz = 0; oz < OZ; ++oz)
        for (std::size_t oy = 0; oy < OY; ++oy) {
          const T* src = bj + (oz * Y + oy) * X;
          T* dst = yo + (oz * OY + oy) * OX;
          for (std::size_t ox = 0; ox < OX; ++ox) dst[ox] = src[ox] + b[c0 + j];
        }
    }
  }
}

template <class T>
void conv_backward(const ConvShape& s, const T* w, const T* x, const T* dy,
                   T* dw, T* db, T* dx) {
  constexpr std::size_t B = 4;
  const auto o = s.out();
  const std::size_t X = s.in[0], Y = s.in[1], Z = s.in[2];
  const std::size_t OX = o[0], OY = o[1], OZ = o[2];
  const std::size_t in_plane = X * Y * Z, out_plane = OX * OY * OZ;
  const std::size_t kx = s.kernel[0], ky = s.kernel[1], kz = s.kernel[2];
  const std::size_t kv = s.kernel_volume();
  const std::size_t span = detail::conv_span(s);
  std::vector<T> g(B * span);
  for (std::size_t c0 = 0; c0 < s.cout; c0 += B) {
    const std::size_t nb = std::min(B, std::size_t{s.cout} - c0);
    std::fill(g.begin(), g.end(), T(0));
    for (std::size_t j = 0; j < nb; ++j) {
      const T* go = dy + (c0 + j) * out_plane;
      T* gj = g.data() + j * span;
      T gs = T(0);
      for (std::size_t oz = 0; oz < OZ; ++oz)
        for (std::size_t oy = 0; oy < OY; ++oy) {
          const T* src = go + (oz * OY + oy) * OX;
          T* dst = gj + (oz * Y + oy) * X;
          for (std::size_t ox = 0; ox < OX; ++ox) {
            dst[ox] = src[ox];
            gs += src[ox];
          }
        }
      db[c0 + j] += gs;
    }
    const T* g0 = g.data();
    const T* g1 = g0 + span;
    const T* g2 = g1 + span;
    const T* g3 = g2 + span;
    for (std::size_t ci = 0; ci < s.cin; ++ci) {
      const T* xi = x + ci * in_plane;
      T* dxi = dx ? dx + ci * in_plane : nullptr;
      std::size_t k = 0;
      for (std::size_t dz = 0; dz < kz; ++dz)
        for (std::size_t dyy = 0; dyy < ky; ++dyy)
          for (std::size_t dxx = 0; dxx < kx; ++dxx, ++k) {
            const std::size_t off = (dz * Y + dyy) * X + dxx;
            const T* xs = xi + off;
            T a0 = T(0), a1 = T(0), a2 = T(0), a3 = T(0);
#pragma omp simd reduction(+ : a0, a1, a2, a3)
            for (std::size_t i = 0; i < span; ++i) {
              const T xv = xs[i];
              a0 += g0[i] * xv;
              a1 += g1[i] * xv;
              a2 += g2[i] * xv;
              a3 += g3[i] * xv;
            }
            const T acc[B] = {a0, a1, a2, a3};
            T wv[B] = {};
            for (std::size_t j = 0; j < nb; ++j) {
              const std::size_t widx = ((c0 + j) * s.cin + ci) * kv + k;
              dw[widx] += acc[j];
              wv[j] = w[widx];
            }
            if (dxi) {
              T* d = dxi + off;
#pragma omp simd
              for (std::size_t i = 0; i < span; ++i) {
                d[i] += wv[0] * g0[i] + wv[1] * g1[i] + wv[2] * g2[i] + wv[3] * g3[i];
              }
            }
          }
    }
  }
}

// ---------------------------------------------------------------- pooling

struct PoolShape {
  std::uint32_t channels = 1;
  std::array<std::uint32_t, 3> window{2, 2, 1};
  std::array<std::uint32_t, 3> in{1, 1, 1};

  [[nodiscard]] std::array<std::uint32_t, 3> out() const {
    std::array<std::uint32_t, 3> o{};
    for (int a = 0; a < 3; ++a) {
      if (window[a] == 0 || in[a] < window[a]) {
        throw SpecError("maxpool: window larger than input");
      }
      o[a] = in[a] / window[a];
    }
    return o;
  }
};

/// Non-overlapping max pooling (floor). argmax receives the flat input index
/// of every output's maximum (first maximum on ties).
template <class T>
void maxpool_forward(const PoolShape& s, const T* x, T* y, std::uint32_t* argmax) {
  const auto o = s.out();
  const std::size_t X = s.in[0], Y = s.in[1], Z = s.in[2];
  const std::size_t wx = s.window[0], wy = s.window[1], wz = s.window[2];
  std::vector<std::size_t> offs;
  for (std::size_t dz = 0; dz < wz; ++dz)
    for (std::size_t dy = 0; dy < wy; ++dy)
      for (std::size_t dx = 0; dx < wx; ++dx) offs.push_back((dz * Y + dy) * X + dx);
  std::size_t k = 0;
  for (std::size_t c = 0; c < s.channels; ++c) {
    const std::size_t base = c * X * Y * Z;
    for (std::size_t oz = 0; oz < o[2]; ++oz)
      for (std::size_t oy = 0; oy < o[1]; ++oy) {
        const std::size_t row = base + (oz * wz * Y + oy * wy) * X;
        for (std::size_t ox = 0; ox < o[0]; ++ox, ++k) {
          const std::size_t corner = row + ox * wx;
          std::size_t arg = corner + offs[0];
          T best = x[arg];
          for (std::size_t j = 1; j < offs.size(); ++j) {
            const std::size_t i = corner + offs[j];
            if (x[i] > best) {
              best = x[i];
              arg = i;
            }
          }
          y[k] = best;
          argmax[k] = static_cast<std::uint32_t>(arg);
        }
      }
  }
}

template <class T>
void maxpool_backward(std::size_t out_count, const std::uint32_t* argmax,
                      const T* dy, T* dx) {
  for (std::size_t k = 0; k < out_count; ++k) dx[argmax[k]] += dy[k];
}

// ---------------------------------------------------------------- splines

inline constexpr int kMaxPseudoDim = 3;

/// Open degree-1 B-spline basis over a kernel grid: up to 2^d (index, weight)
/// pairs whose weights sum to 1. Kernel index flattening is dim-0 fastest.
template <class T>
struct SplineBasis {
  std::array<std::uint32_t, 1 << kMaxPseudoDim> index{};
  std::array<T, 1 << kMaxPseudoDim> weight{};
  int count = 0;
  bool clamped = false;
};

template <class T, class U>
SplineBasis<T> bspline_basis(std::span<const U> u, std::span<const std::uint32_t> kernel) {
  const int d = static_cast<int>(u.size());
  if (d < 1 || d > kMaxPseudoDim || kernel.size() != u.size()) {
    throw ParameterError("bspline_basis: pseudo dim must be 1..3 and match kernel");
  }
  SplineBasis<T> out;
  std::array<std::uint32_t, kMaxPseudoDim> lo{}, hi{};
  std::array<T, kMaxPseudoDim> frac{};
  std::array<std::uint32_t, kMaxPseudoDim> stride{};
  std::uint32_t st = 1;
  for (int a = 0; a < d; ++a) {
    T v = static_cast<T>(u[a]);
    if (!(v >= T(0) && v <= T(1))) {
      out.clamped = true;
      v = v > T(1) ? T(1) : T(0);  // NaN lands on 0
    }
    const std::uint32_t k = kernel[a];
    const T p = v * T(k - 1);
    auto f = static_cast<std::uint32_t>(std::floor(p));
    if (f > k - 1) f = k - 1;
    lo[a] = f;
    hi[a] = std::min(f + 1, k - 1);
    frac[a] = p - T(f);
    stride[a] = st;
    st *= k;
  }
  out.count = 1 << d;
  for (int bits = 0; bits < out.count; ++bits) {
    T w = T(1);
    std::uint32_t idx = 0;
    for (int a = 0; a < d; ++a) {
      const bool up = (bits >> a) & 1;
      w *= up ? frac[a] : T(1) - frac[a];
      idx += (up ? hi[a] : lo[a]) * stride[a];
    }
    out.index[bits] = idx;
    out.weight[bits] = w;
  }
  return out;
}

/// Edge basis and mean-aggregation weights for one kernel configuration.
template <class T>
struct SplineTopology {
  std::uint32_t nodes = 0;
  int per_edge = 0;
  std::vector<std::uint32_t> src, dst;
  std::vector<std::uint32_t> kindex;  // edges x per_edge
  std::vector<T> kweight;             // basis weight / in-degree(dst)
  std::size_t clamped = 0;
};

template <class T>
SplineTopology<T> make_spline_topology(std::uint32_t nodes,
                                       std::span<const std::uint32_t> src,
                                       std::span<const std::uint32_t> dst,
                                       std::span<const float> pseudo, int pseudo_dim,
                                       std::span<const std::uint32_t> kernel) {
  SplineTopology<T> t;
  t.nodes = nodes;
  t.per_edge = 1 << pseudo_dim;
  t.src.assign(src.begin(), src.end());
  t.dst.assign(dst.begin(), dst.end());
  std::vector<std::uint32_t> deg(nodes, 0);
  for (std::size_t e = 0; e < src.size(); ++e) {
    if (src[e] >= nodes || dst[e] >= nodes) {
      throw StructuralError("spline conv: edge " + std::to_string(e) +
                            " index out of range");
    }
    ++deg[dst[e]];
  }
  t.kindex.resize(src.size() * t.per_edge);
  t.kweight.resize(src.size() * t.per_edge);
  for (std::size_t e = 0; e < src.size(); ++e) {
    const auto b = bspline_basis<T, float>(pseudo.subspan(e * pseudo_dim, pseudo_dim),
                                           kernel);
    t.clamped += b.clamped;
    const T inv = T(1) / T(deg[dst[e]]);
    for (int k = 0; k < t.per_edge; ++k) {
      t.kindex[e * t.per_edge + k] = b.index[k];
      t.kweight[e * t.per_edge + k] = b.weight[k] * inv;
    }
  }
  return t;
}

/// Spline convolution over node features x (nodes x cin):
///   y_i = bias + root^T x_i + 1/deg(i) * sum_{j->i} sum_k B_k(u_ji) W_k^T x_j
/// Parameters: W (K x cin x cout), root (cin x cout), bias (cout).
/// agg receives the per-node, per-kernel aggregated inputs (nodes x K x cin).
template <class T>
void spline_conv_forward(std::size_t cin, std::size_t cout, std::size_t kernels,
                         const T* w, const T* root, const T* bias,
                         const SplineTopology<T>& topo, const T* x, T* y,
                         std::vector<T>& agg, std::vector<std::uint8_t>& touched) {
  const std::size_t n = topo.nodes;
  agg.assign(n * kernels * cin, T(0));
  touched.assign(n * kernels, 0);
  for (std::size_t e = 0; e < topo.src.size(); ++e) {
    const std::size_t i = topo.dst[e], j = topo.src[e];
    for (int b = 0; b < topo.per_edge; ++b) {
      const T wb = topo.kweight[e * topo.per_edge + b];
      if (wb == T(0)) continue;
      const std::size_t k = topo.kindex[e * topo.per_edge + b];
      touched[i * kernels + k] = 1;
      axpy(wb, x + j * cin, agg.data() + (i * kernels + k) * cin, cin);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    T* yi = y + i * cout;
    std::copy(bias, bias + cout, yi);
    const T* xi = x + i * cin;
    for (std::size_t c = 0; c < cin; ++c) axpy(xi[c], root + c * cout, yi, cout);
    for (std::size_t k = 0; k < kernels; ++k) {
      if (!touched[i * kernels + k]) continue;
      const T* a = agg.data() + (i * kernels + k) * cin;
      const T* wk = w + k * cin * cout;
      for (std::size_t c = 0; c < cin; ++c) axpy(a[c], wk + c * cout, yi, cout);
    }
  }
}

template <class T>
void spline_conv_backward(std::size_t cin, std::size_t cout, std::size_t kernels,
                          const T* w, const T* root, const SplineTopology<T>& topo,
                          const T* x, const std::vector<T>& agg,
                          const std::vector<std::uint8_t>& touched, const T* dy,
                          T* dw, T* droot, T* dbias, T* dx) {
  const std::size_t n = topo.nodes;
  std::vector<T> dagg(dx ? n * kernels * cin : 0, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    const T* gi = dy + i * cout;
    axpy(T(1), gi, dbias, cout);
    const T* xi = x + i * cin;
    for (std::size_t c = 0; c < cin; ++c) {
      axpy(xi[c], gi, droot + c * cout, cout);
      if (dx) dx[i * cin + c] += dot(root + c * cout, gi, cout);
    }
    for (std::size_t k = 0; k < kernels; ++k) {
      if (!touched[i * kernels + k]) continue;
      const T* a = agg.data() + (i * kernels + k) * cin;
      const T* wk = w + k * cin * cout;
      T* dwk = dw + k * cin * cout;
      for (std::size_t c = 0; c < cin; ++c) {
        axpy(a[c], gi, dwk + c * cout, cout);
        if (dx) dagg[(i * kernels + k) * cin + c] = dot(wk + c * cout, gi, cout);
      }
    }
  }
  if (!dx) return;
  for (std::size_t e = 0; e < topo.src.size(); ++e) {
    const std::size_t i = topo.dst[e], j = topo.src[e];
    for (int b = 0; b < topo.per_edge; ++b) {
      const T wb = topo.kweight[e * topo.per_edge + b];
      if (wb == T(0)) continue;
      const std::size_t k = topo.kindex[e * topo.per_edge + b];
      axpy(wb, dagg.data() + (i * kernels + k) * cin, dx + j * cin, cin);
    }
  }
}

// ---------------------------------------------------------------- pooling over nodes

template <class T>
void global_mean_pool_forward(std::size_t nodes, std::size_t channels, const T* x, T* y) {
  if (nodes == 0) throw StructuralError("global_mean_pool: empty graph");
  std::fill(y, y + channels, T(0));
  for (std::size_t i = 0; i < nodes; ++i) axpy(T(1), x + i * channels, y, channels);
  const T inv = T(1) / T(nodes);
  for (std::size_t c = 0; c < channels; ++c) y[c] *= inv;
}

template <class T>
void global_mean_pool_backward(std::size_t nodes, std::size_t channels, const T* dy,
                               T* dx) {
  const T inv = T(1) / T(nodes);
  for (std::size_t i = 0; i < nodes; ++i) axpy(inv, dy, dx + i * channels, channels);
}

// ---------------------------------------------------------------- loss

template <class T>
struct LossResult {
  T loss = T(0);
  std::vector<T> grad;  // dLoss/dlogits = softmax - onehot
};

/// Max-shifted softmax followed by negative log-likelihood of `label`.
template <class T>
LossResult<T> softmax_cross_entropy(std::span<const T> logits, std::size_t label) {
  if (label >= logits.size()) throw ParameterError("softmax_cross_entropy: bad label");
  const auto top = static_cast<std::size_t>(
      std::max_element(logits.begin(), logits.end()) - logits.begin());
  const T m = logits[top];
  LossResult<T> r;
  r.grad.resize(logits.size());
  T rest = T(0);
  for (std::size_t j = 0; j < logits.size(); ++j) {
    r.grad[j] = std::exp(logits[j] - m);
    if (j != top) rest += r.grad[j];
  }
  const T total = T(1) + rest;
  for (auto& g : r.grad) g /= total;
  r.grad[label] -= T(1);
  r.loss = std::log1p(rest) + (m - logits[label]);
  return r;
}

}  // namespace vgc::nn
