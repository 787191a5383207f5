#pragma once

// Differentiable tensor operations. Every op allocates a fresh output and,
// when a GradGraph is active and any input requires gradients, records one
// backward closure onto it. Closures add into input gradients; they never
// overwrite, which is what makes gradient accumulation additive.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "fgssl/errors.hpp"
#include "fgssl/tensor.hpp"

namespace fgssl {
namespace ops {

namespace detail {

template <class S>
inline bool recording(std::initializer_list<const Tensor<S>*> ins) {
  auto* g = GradGraph<S>::active();
  if (!g) return false;
  for (const Tensor<S>* t : ins) {
    if (t && t->defined() && t->requires_grad()) return true;
  }
  return false;
}

template <class S>
inline void record(Tensor<S>& out, std::function<void()> fn) {
  out.set_requires_grad(true);
  GradGraph<S>::active()->record(out.impl(), std::move(fn));
}

struct AxisSplit {
  int64_t outer, k, inner;
};

inline AxisSplit split_axis(const Shape& s, int64_t axis) {
  FGSSL_CHECK(axis >= 0 && axis < static_cast<int64_t>(s.size()),
              "axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
  AxisSplit a{1, s[static_cast<size_t>(axis)], 1};
  for (int64_t i = 0; i < axis; ++i) a.outer *= s[static_cast<size_t>(i)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < s.size(); ++i) a.inner *= s[i];
  return a;
}

inline Shape drop_axis(const Shape& s, int64_t axis) {
  Shape r;
  for (size_t i = 0; i < s.size(); ++i) {
    if (static_cast<int64_t>(i) != axis) r.push_back(s[i]);
  }
  return r;
}

}  // namespace detail

template <class S>
inline void ensure_finite(const Tensor<S>& t, const char* context) {
  for (const S v : t.vec()) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw NumericError(std::string("non-finite value in ") + context);
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise arithmetic. Shapes must match exactly, except that either side
// may be a one-element tensor, which broadcasts against the other.

namespace detail {

enum class BinKind { add, sub, mul };

template <class S>
Tensor<S> binary_op(const Tensor<S>& a, const Tensor<S>& b, BinKind kind, const char* name) {
  const bool a1 = a.numel() == 1, b1 = b.numel() == 1;
  FGSSL_CHECK(a.shape() == b.shape() || a1 || b1,
              std::string(name) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const Shape& out_shape = b1 ? a.shape() : b.shape();
  Tensor<S> out(out_shape);
  const int64_t n = out.numel();
  const S* pa = a.data();
  const S* pb = b.data();
  S* po = out.data();
  const int64_t sa = a1 ? 0 : 1, sb = b1 ? 0 : 1;
  switch (kind) {
    case BinKind::add:
      for (int64_t i = 0; i < n; ++i) po[i] = pa[i * sa] + pb[i * sb];
      break;
    case BinKind::sub:
      for (int64_t i = 0; i < n; ++i) po[i] = pa[i * sa] - pb[i * sb];
      break;
    case BinKind::mul:
      for (int64_t i = 0; i < n; ++i) po[i] = pa[i * sa] * pb[i * sb];
      break;
  }
  if (recording<S>({&a, &b})) {
    auto ai = a.impl(), bi = b.impl(), oi = out.impl();
    record(out, [ai, bi, oi, n, sa, sb, kind]() {
      const std::vector<S>& g = oi->grad;
      if (ai->requires_grad) {
        std::vector<S>& ga = accum_grad(*ai);
        const S* pb2 = bi->value.data();
        for (int64_t i = 0; i < n; ++i) {
          const S gi = kind == BinKind::mul ? g[static_cast<size_t>(i)] * pb2[i * sb]
                                            : g[static_cast<size_t>(i)];
          ga[static_cast<size_t>(i * sa)] += gi;
        }
      }
      if (bi->requires_grad) {
        std::vector<S>& gb = accum_grad(*bi);
        const S* pa2 = ai->value.data();
        for (int64_t i = 0; i < n; ++i) {
          S gi = g[static_cast<size_t>(i)];
          if (kind == BinKind::mul) gi *= pa2[i * sa];
          if (kind == BinKind::sub) gi = -gi;
          gb[static_cast<size_t>(i * sb)] += gi;
        }
      }
    });
  }
  return out;
}

template <class S, class Fwd, class Bwd>
Tensor<S> unary_op(const Tensor<S>& x, Fwd fwd, Bwd bwd) {
  Tensor<S> out(x.shape());
  const int64_t n = x.numel();
  const S* px = x.data();
  S* po = out.data();
  for (int64_t i = 0; i < n; ++i) po[i] = fwd(px[i]);
  if (recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    record(out, [xi, oi, n, bwd]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* px2 = xi->value.data();
      const S* py = oi->value.data();
      const S* g = oi->grad.data();
      for (int64_t i = 0; i < n; ++i) gx[static_cast<size_t>(i)] += g[i] * bwd(px2[i], py[i]);
    });
  }
  return out;
}

}  // namespace detail

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  return detail::binary_op(a, b, detail::BinKind::add, "add");
}

template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  return detail::binary_op(a, b, detail::BinKind::sub, "sub");
}

template <class S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  return detail::binary_op(a, b, detail::BinKind::mul, "mul");
}

template <class S>
Tensor<S> scale(const Tensor<S>& x, S c) {
  return detail::unary_op(
      x, [c](S v) { return c * v; }, [c](S, S) { return c; });
}

template <class S>
Tensor<S> neg(const Tensor<S>& x) {
  return scale(x, S(-1));
}

template <class S>
Tensor<S> relu(const Tensor<S>& x) {
  return detail::unary_op(
      x, [](S v) { return v > S(0) ? v : S(0); },
      [](S v, S) { return v > S(0) ? S(1) : S(0); });
}

template <class S>
Tensor<S> abs(const Tensor<S>& x) {
  return detail::unary_op(
      x, [](S v) { return v < S(0) ? -v : v; },
      [](S v, S) { return v > S(0) ? S(1) : (v < S(0) ? S(-1) : S(0)); });
}

template <class S>
Tensor<S> tanh(const Tensor<S>& x) {
  return detail::unary_op(
      x, [](S v) { return std::tanh(v); }, [](S, S y) { return S(1) - y * y; });
}

template <class S>
Tensor<S> exp(const Tensor<S>& x) {
  Tensor<S> out = detail::unary_op(
      x, [](S v) { return std::exp(v); }, [](S, S y) { return y; });
  ensure_finite(out, "exp");
  return out;
}

template <class S>
Tensor<S> log(const Tensor<S>& x) {
  for (const S v : x.vec()) {
    if (!(v > S(0))) throw NumericError("log: non-positive input");
  }
  return detail::unary_op(
      x, [](S v) { return std::log(v); }, [](S v, S) { return S(1) / v; });
}

// ---------------------------------------------------------------------------
// Matrix multiply: [m,k] x [k,n] -> [m,n].

template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  FGSSL_CHECK(a.rank() == 2 && b.rank() == 2, "matmul: both inputs must be rank 2");
  const int64_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  FGSSL_CHECK(k == k2, "matmul: inner dims differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<S> out(Shape{m, n});
  {
    const S* pa = a.data();
    const S* pb = b.data();
    S* po = out.data();
    for (int64_t i = 0; i < m; ++i) {
      S* orow = po + i * n;
      for (int64_t kk = 0; kk < k; ++kk) {
        const S av = pa[i * k + kk];
        const S* brow = pb + kk * n;
        for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
    }
  }
  if (detail::recording<S>({&a, &b})) {
    auto ai = a.impl(), bi = b.impl(), oi = out.impl();
    detail::record(out, [ai, bi, oi, m, k, n]() {
      const S* g = oi->grad.data();
      if (ai->requires_grad) {
        std::vector<S>& ga = accum_grad(*ai);
        const S* pb = bi->value.data();
        for (int64_t i = 0; i < m; ++i) {
          for (int64_t kk = 0; kk < k; ++kk) {
            const S* grow = g + i * n;
            const S* brow = pb + kk * n;
            S acc = S(0);
            for (int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            ga[static_cast<size_t>(i * k + kk)] += acc;
          }
        }
      }
      if (bi->requires_grad) {
        std::vector<S>& gb = accum_grad(*bi);
        const S* pa = ai->value.data();
        for (int64_t i = 0; i < m; ++i) {
          const S* grow = g + i * n;
          for (int64_t kk = 0; kk < k; ++kk) {
            const S av = pa[i * k + kk];
            S* gbrow = gb.data() + kk * n;
            for (int64_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2-D convolution, NCHW, dense kernels. Output spatial dims must come out
// integral: (H + 2*padding - kh) and (W + 2*padding - kw) have to be
// non-negative multiples of the stride.

namespace detail {

template <class S>
struct ConvDims {
  int64_t n, ci, h, w, co, kh, kw, ho, wo;
  int64_t stride, padding;
  bool rank3;
};

template <class S>
ConvDims<S> conv_dims(const Tensor<S>& x, const Tensor<S>& w, int64_t stride, int64_t padding) {
  FGSSL_CHECK(x.rank() == 3 || x.rank() == 4, "conv2d: input must be rank 3 or 4");
  FGSSL_CHECK(w.rank() == 4, "conv2d: weight must be rank 4 [out,in,kh,kw]");
  FGSSL_CHECK(stride >= 1, "conv2d: stride must be >= 1");
  FGSSL_CHECK(padding >= 0, "conv2d: padding must be >= 0");
  ConvDims<S> d{};
  d.rank3 = x.rank() == 3;
  d.n = d.rank3 ? 1 : x.dim(0);
  d.ci = d.rank3 ? x.dim(0) : x.dim(1);
  d.h = d.rank3 ? x.dim(1) : x.dim(2);
  d.w = d.rank3 ? x.dim(2) : x.dim(3);
  d.co = w.dim(0);
  d.kh = w.dim(2);
  d.kw = w.dim(3);
  d.stride = stride;
  d.padding = padding;
  FGSSL_CHECK(w.dim(1) == d.ci, "conv2d: weight expects " + std::to_string(w.dim(1)) +
                                    " input channels, got " + std::to_string(d.ci));
  const int64_t eh = d.h + 2 * padding - d.kh;
  const int64_t ew = d.w + 2 * padding - d.kw;
  FGSSL_CHECK(eh >= 0 && ew >= 0, "conv2d: kernel larger than padded input");
  FGSSL_CHECK(eh % stride == 0 && ew % stride == 0,
              "conv2d: non-integral output size for input " + shape_str(x.shape()));
  d.ho = eh / stride + 1;
  d.wo = ew / stride + 1;
  return d;
}

// True when the window gather is the identity, so the input plane already is
// the [ci, ho*wo] column matrix and no copy is needed.
template <class S>
bool unit_window(const ConvDims<S>& d) {
  return d.kh == 1 && d.kw == 1 && d.stride == 1 && d.padding == 0;
}

// Gathers one image's kh*kw windows into col[K, M] with K = ci*kh*kw and
// M = ho*wo. Row order (ci, ky, kx) matches the weight layout, so the GEMM
// reduction visits taps in the same order a direct loop nest would.
template <class S>
void im2col_plane(const S* img, const ConvDims<S>& d, S* col) {
  const int64_t M = d.ho * d.wo;
  int64_t r = 0;
  for (int64_t ci = 0; ci < d.ci; ++ci) {
    const S* plane = img + ci * d.h * d.w;
    for (int64_t ky = 0; ky < d.kh; ++ky) {
      for (int64_t kx = 0; kx < d.kw; ++kx, ++r) {
        S* dst = col + r * M;
        for (int64_t oy = 0; oy < d.ho; ++oy) {
          const int64_t iy = oy * d.stride + ky - d.padding;
          S* drow = dst + oy * d.wo;
          if (iy < 0 || iy >= d.h) {
            std::fill(drow, drow + d.wo, S(0));
            continue;
          }
          const S* irow = plane + iy * d.w;
          if (d.stride == 1) {
            const int64_t shift = kx - d.padding;
            const int64_t x0 = std::max<int64_t>(0, -shift);
            const int64_t x1 = std::min<int64_t>(d.wo, d.w - shift);
            for (int64_t ox = 0; ox < x0; ++ox) drow[ox] = S(0);
            for (int64_t ox = x0; ox < x1; ++ox) drow[ox] = irow[ox + shift];
            for (int64_t ox = x1; ox < d.wo; ++ox) drow[ox] = S(0);
          } else {
            for (int64_t ox = 0; ox < d.wo; ++ox) {
              const int64_t ix = ox * d.stride + kx - d.padding;
              drow[ox] = (ix < 0 || ix >= d.w) ? S(0) : irow[ix];
            }
          }
        }
      }
    }
  }
}

// Scatters col[K, M] back onto the image plane, accumulating overlaps in the
// same (ci, ky, kx, oy, ox) order im2col_plane reads them.
template <class S>
void col2im_plane(const S* col, const ConvDims<S>& d, S* img) {
  const int64_t M = d.ho * d.wo;
  int64_t r = 0;
  for (int64_t ci = 0; ci < d.ci; ++ci) {
    S* plane = img + ci * d.h * d.w;
    for (int64_t ky = 0; ky < d.kh; ++ky) {
      for (int64_t kx = 0; kx < d.kw; ++kx, ++r) {
        const S* src = col + r * M;
        for (int64_t oy = 0; oy < d.ho; ++oy) {
          const int64_t iy = oy * d.stride + ky - d.padding;
          if (iy < 0 || iy >= d.h) continue;
          S* irow = plane + iy * d.w;
          const S* srow = src + oy * d.wo;
          if (d.stride == 1) {
            const int64_t shift = kx - d.padding;
            const int64_t x0 = std::max<int64_t>(0, -shift);
            const int64_t x1 = std::min<int64_t>(d.wo, d.w - shift);
            for (int64_t ox = x0; ox < x1; ++ox) irow[ox + shift] += srow[ox];
          } else {
            for (int64_t ox = 0; ox < d.wo; ++ox) {
              const int64_t ix = ox * d.stride + kx - d.padding;
              if (ix >= 0 && ix < d.w) irow[ix] += srow[ox];
            }
          }
        }
      }
    }
  }
}

// C[i, :] += sum_j A(i, j) * B[j, :] for i in [0, rows). A(i, j) is read at
// a[i*ars + j*acs], so the same kernel serves both the weight matrix and its
// transpose. Four output rows share each pass over B; per-element sums run
// in j order, independent across m, so the inner loop vectorizes without
// reassociation.
template <class S>
void gemm_rows(const S* a, int64_t ars, int64_t acs, const S* b, S* c, int64_t rows, int64_t jn,
               int64_t M) {
  int64_t i = 0;
  for (; i + 4 <= rows; i += 4) {
    S* __restrict c0 = c + (i + 0) * M;
    S* __restrict c1 = c + (i + 1) * M;
    S* __restrict c2 = c + (i + 2) * M;
    S* __restrict c3 = c + (i + 3) * M;
    for (int64_t j = 0; j < jn; ++j) {
      const S a0 = a[(i + 0) * ars + j * acs];
      const S a1 = a[(i + 1) * ars + j * acs];
      const S a2 = a[(i + 2) * ars + j * acs];
      const S a3 = a[(i + 3) * ars + j * acs];
      const S* __restrict br = b + j * M;
      for (int64_t m = 0; m < M; ++m) {
        c0[m] += a0 * br[m];
        c1[m] += a1 * br[m];
        c2[m] += a2 * br[m];
        c3[m] += a3 * br[m];
      }
    }
  }
  for (; i < rows; ++i) {
    S* __restrict ci = c + i * M;
    for (int64_t j = 0; j < jn; ++j) {
      const S av = a[i * ars + j * acs];
      const S* __restrict br = b + j * M;
      for (int64_t m = 0; m < M; ++m) ci[m] += av * br[m];
    }
  }
}

// Dot product over eight independent lanes combined in a fixed order, so the
// result is deterministic while the lane loop still vectorizes.
template <class S>
S dot_lanes(const S* __restrict x, const S* __restrict y, int64_t n) {
  S acc[8] = {S(0), S(0), S(0), S(0), S(0), S(0), S(0), S(0)};
  int64_t m = 0;
  for (; m + 8 <= n; m += 8) {
    for (int l = 0; l < 8; ++l) acc[l] += x[m + l] * y[m + l];
  }
  S tail = S(0);
  for (; m < n; ++m) tail += x[m] * y[m];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

// C[i, k] += sum_m G[i, m] * B[k, m], tiled two G rows by four B rows so the
// eight lane accumulators live in registers across the m sweep. Lane layout
// and combine order match dot_lanes, so every element gets the same sum the
// plain kernel would produce.
template <class S>
void gemm_acc(const S* g, const S* b, S* c, int64_t rows, int64_t K, int64_t M) {
  int64_t i = 0;
  for (; i + 2 <= rows; i += 2) {
    const S* __restrict g0 = g + (i + 0) * M;
    const S* __restrict g1 = g + (i + 1) * M;
    int64_t k = 0;
    for (; k + 4 <= K; k += 4) {
      const S* __restrict b0 = b + (k + 0) * M;
      const S* __restrict b1 = b + (k + 1) * M;
      const S* __restrict b2 = b + (k + 2) * M;
      const S* __restrict b3 = b + (k + 3) * M;
      S acc[8][8] = {};
      int64_t m = 0;
      for (; m + 8 <= M; m += 8) {
        for (int l = 0; l < 8; ++l) {
          const S gv0 = g0[m + l], gv1 = g1[m + l];
          acc[0][l] += gv0 * b0[m + l];
          acc[1][l] += gv0 * b1[m + l];
          acc[2][l] += gv0 * b2[m + l];
          acc[3][l] += gv0 * b3[m + l];
          acc[4][l] += gv1 * b0[m + l];
          acc[5][l] += gv1 * b1[m + l];
          acc[6][l] += gv1 * b2[m + l];
          acc[7][l] += gv1 * b3[m + l];
        }
      }
      S tail[8] = {S(0), S(0), S(0), S(0), S(0), S(0), S(0), S(0)};
      for (; m < M; ++m) {
        const S gv0 = g0[m], gv1 = g1[m];
        tail[0] += gv0 * b0[m];
        tail[1] += gv0 * b1[m];
        tail[2] += gv0 * b2[m];
        tail[3] += gv0 * b3[m];
        tail[4] += gv1 * b0[m];
        tail[5] += gv1 * b1[m];
        tail[6] += gv1 * b2[m];
        tail[7] += gv1 * b3[m];
      }
      for (int t = 0; t < 8; ++t) {
        const S* a = acc[t];
        c[(i + t / 4) * K + k + t % 4] +=
            ((a[0] + a[1]) + (a[2] + a[3])) + ((a[4] + a[5]) + (a[6] + a[7])) + tail[t];
      }
    }
    for (; k < K; ++k) {
      c[(i + 0) * K + k] += dot_lanes(g0, b + k * M, M);
      c[(i + 1) * K + k] += dot_lanes(g1, b + k * M, M);
    }
  }
  for (; i < rows; ++i) {
    const S* gi = g + i * M;
    for (int64_t k = 0; k < K; ++k) c[i * K + k] += dot_lanes(gi, b + k * M, M);
  }
}

}  // namespace detail

template <class S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& bias,
                 int64_t stride = 1, int64_t padding = 0) {
  const auto d = detail::conv_dims(x, w, stride, padding);
  if (bias.defined()) {
    FGSSL_CHECK(bias.rank() == 1 && bias.dim(0) == d.co,
                "conv2d: bias must be rank 1 with one entry per output channel");
  }
  Shape out_shape = d.rank3 ? Shape{d.co, d.ho, d.wo} : Shape{d.n, d.co, d.ho, d.wo};
  Tensor<S> out(std::move(out_shape));

  const S* px = x.data();
  const S* pw = w.data();
  S* po = out.data();
  const int64_t in_plane = d.h * d.w, out_plane = d.ho * d.wo;
  const int64_t K = d.ci * d.kh * d.kw;
  const bool direct = detail::unit_window(d);
  std::vector<S> col(direct ? 0 : K * out_plane);
  for (int64_t n = 0; n < d.n; ++n) {
    const S* image = px + n * d.ci * in_plane;
    const S* colp = image;
    if (!direct) {
      detail::im2col_plane(image, d, col.data());
      colp = col.data();
    }
    S* oimage = po + n * d.co * out_plane;
    if (bias.defined()) {
      for (int64_t co = 0; co < d.co; ++co) {
        const S bv = bias.data()[co];
        S* oplane = oimage + co * out_plane;
        for (int64_t i = 0; i < out_plane; ++i) oplane[i] = bv;
      }
    }
    detail::gemm_rows(pw, K, int64_t{1}, colp, oimage, d.co, K, out_plane);
  }

  if (detail::recording<S>({&x, &w, &bias})) {
    auto xi = x.impl(), wi = w.impl(), oi = out.impl();
    auto bi = bias.defined() ? bias.impl() : nullptr;
    detail::record(out, [xi, wi, bi, oi, d]() {
      const S* g = oi->grad.data();
      const int64_t in_plane = d.h * d.w, out_plane = d.ho * d.wo;
      const int64_t K = d.ci * d.kh * d.kw;
      const bool direct = detail::unit_window(d);
      const bool need_x = xi->requires_grad, need_w = wi->requires_grad;
      std::vector<S> col(need_w && !direct ? K * out_plane : 0);
      std::vector<S> gcol(need_x && !direct ? K * out_plane : 0);
      const S* pw = wi->value.data();
      const S* px = xi->value.data();
      S* gx = need_x ? accum_grad(*xi).data() : nullptr;
      S* gw = need_w ? accum_grad(*wi).data() : nullptr;
      for (int64_t n = 0; n < d.n; ++n) {
        const S* gimage = g + n * d.co * out_plane;
        if (need_x) {
          S* gximage = gx + n * d.ci * in_plane;
          if (direct) {
            detail::gemm_rows(pw, int64_t{1}, K, gimage, gximage, K, d.co, out_plane);
          } else {
            std::fill(gcol.begin(), gcol.end(), S(0));
            detail::gemm_rows(pw, int64_t{1}, K, gimage, gcol.data(), K, d.co, out_plane);
            detail::col2im_plane(gcol.data(), d, gximage);
          }
        }
        if (need_w) {
          const S* image = px + n * d.ci * in_plane;
          const S* colp = image;
          if (!direct) {
            detail::im2col_plane(image, d, col.data());
            colp = col.data();
          }
          detail::gemm_acc(gimage, colp, gw, d.co, K, out_plane);
        }
      }
      if (bi && bi->requires_grad) {
        std::vector<S>& gb = accum_grad(*bi);
        for (int64_t n = 0; n < d.n; ++n) {
          for (int64_t co = 0; co < d.co; ++co) {
            const S* gplane = g + (n * d.co + co) * out_plane;
            S acc = S(0);
            for (int64_t i = 0; i < out_plane; ++i) acc += gplane[i];
            gb[static_cast<size_t>(co)] += acc;
          }
        }
      }
    });
  }
  return out;
}

template <class S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, int64_t stride = 1, int64_t padding = 0) {
  return conv2d(x, w, Tensor<S>(), stride, padding);
}

// ---------------------------------------------------------------------------
// Pooling.

// 2x2 max pooling with stride 2; H and W must be even. Ties resolve to the
// first element in top-left-to-bottom-right scan order.
template <class S>
Tensor<S> max_pool2(const Tensor<S>& x) {
  FGSSL_CHECK(x.rank() == 3 || x.rank() == 4, "max_pool2: input must be rank 3 or 4");
  const bool rank3 = x.rank() == 3;
  const int64_t n = rank3 ? 1 : x.dim(0);
  const int64_t c = rank3 ? x.dim(0) : x.dim(1);
  const int64_t h = rank3 ? x.dim(1) : x.dim(2);
  const int64_t w = rank3 ? x.dim(2) : x.dim(3);
  FGSSL_CHECK(h % 2 == 0 && w % 2 == 0, "max_pool2: spatial dims must be even, got " + shape_str(x.shape()));
  const int64_t ho = h / 2, wo = w / 2;
  Tensor<S> out(rank3 ? Shape{c, ho, wo} : Shape{n, c, ho, wo});
  std::vector<int64_t> argmax(static_cast<size_t>(out.numel()));
  const S* px = x.data();
  S* po = out.data();
  for (int64_t p = 0; p < n * c; ++p) {
    const S* iplane = px + p * h * w;
    S* oplane = po + p * ho * wo;
    int64_t* aplane = argmax.data() + p * ho * wo;
    for (int64_t oy = 0; oy < ho; ++oy) {
      for (int64_t ox = 0; ox < wo; ++ox) {
        int64_t best = (2 * oy) * w + 2 * ox;
        S bv = iplane[best];
        const int64_t cand[3] = {(2 * oy) * w + 2 * ox + 1, (2 * oy + 1) * w + 2 * ox,
                                 (2 * oy + 1) * w + 2 * ox + 1};
        for (int64_t idx : cand) {
          if (iplane[idx] > bv) {
            bv = iplane[idx];
            best = idx;
          }
        }
        oplane[oy * wo + ox] = bv;
        aplane[oy * wo + ox] = p * h * w + best;
      }
    }
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, argmax = std::move(argmax)]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      for (size_t i = 0; i < argmax.size(); ++i) gx[static_cast<size_t>(argmax[i])] += g[i];
    });
  }
  return out;
}

// Mean over the spatial dims: [C,H,W] -> [C] or [N,C,H,W] -> [N,C].
template <class S>
Tensor<S> global_avg_pool(const Tensor<S>& x) {
  FGSSL_CHECK(x.rank() == 3 || x.rank() == 4, "global_avg_pool: input must be rank 3 or 4");
  const bool rank3 = x.rank() == 3;
  const int64_t n = rank3 ? 1 : x.dim(0);
  const int64_t c = rank3 ? x.dim(0) : x.dim(1);
  const int64_t h = rank3 ? x.dim(1) : x.dim(2);
  const int64_t w = rank3 ? x.dim(2) : x.dim(3);
  const int64_t plane = h * w;
  FGSSL_CHECK(plane > 0, "global_avg_pool: empty spatial dims");
  Tensor<S> out(rank3 ? Shape{c} : Shape{n, c});
  const S* px = x.data();
  S* po = out.data();
  for (int64_t p = 0; p < n * c; ++p) {
    S acc = S(0);
    const S* iplane = px + p * plane;
    for (int64_t i = 0; i < plane; ++i) acc += iplane[i];
    po[p] = acc / static_cast<S>(plane);
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, n, c, plane]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      for (int64_t p = 0; p < n * c; ++p) {
        const S gv = g[p] / static_cast<S>(plane);
        S* gplane = gx.data() + p * plane;
        for (int64_t i = 0; i < plane; ++i) gplane[i] += gv;
      }
    });
  }
  return out;
}

// Average pooling onto an oh x ow grid; cell (i,j) averages the input block
// rows [floor(i*H/oh), floor((i+1)*H/oh)) x cols [floor(j*W/ow), floor((j+1)*W/ow)).
template <class S>
Tensor<S> adaptive_avg_pool(const Tensor<S>& x, int64_t oh, int64_t ow) {
  FGSSL_CHECK(x.rank() == 3 || x.rank() == 4, "adaptive_avg_pool: input must be rank 3 or 4");
  const bool rank3 = x.rank() == 3;
  const int64_t n = rank3 ? 1 : x.dim(0);
  const int64_t c = rank3 ? x.dim(0) : x.dim(1);
  const int64_t h = rank3 ? x.dim(1) : x.dim(2);
  const int64_t w = rank3 ? x.dim(2) : x.dim(3);
  FGSSL_CHECK(oh >= 1 && oh <= h && ow >= 1 && ow <= w,
              "adaptive_avg_pool: output grid must be within input dims");
  Tensor<S> out(rank3 ? Shape{c, oh, ow} : Shape{n, c, oh, ow});
  const S* px = x.data();
  S* po = out.data();
  for (int64_t p = 0; p < n * c; ++p) {
    const S* iplane = px + p * h * w;
    S* oplane = po + p * oh * ow;
    for (int64_t i = 0; i < oh; ++i) {
      const int64_t y0 = i * h / oh, y1 = (i + 1) * h / oh;
      for (int64_t j = 0; j < ow; ++j) {
        const int64_t x0 = j * w / ow, x1 = (j + 1) * w / ow;
        S acc = S(0);
        for (int64_t y = y0; y < y1; ++y) {
          for (int64_t xx = x0; xx < x1; ++xx) acc += iplane[y * w + xx];
        }
        oplane[i * ow + j] = acc / static_cast<S>((y1 - y0) * (x1 - x0));
      }
    }
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, n, c, h, w, oh, ow]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      for (int64_t p = 0; p < n * c; ++p) {
        S* gplane = gx.data() + p * h * w;
        const S* goplane = g + p * oh * ow;
        for (int64_t i = 0; i < oh; ++i) {
          const int64_t y0 = i * h / oh, y1 = (i + 1) * h / oh;
          for (int64_t j = 0; j < ow; ++j) {
            const int64_t x0 = j * w / ow, x1 = (j + 1) * w / ow;
            const S gv = goplane[i * ow + j] / static_cast<S>((y1 - y0) * (x1 - x0));
            for (int64_t y = y0; y < y1; ++y) {
              for (int64_t xx = x0; xx < x1; ++xx) gplane[y * w + xx] += gv;
            }
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reductions.

template <class S>
Tensor<S> sum(const Tensor<S>& x) {
  Tensor<S> out(Shape{});
  S acc = S(0);
  for (const S v : x.vec()) acc += v;
  out.data()[0] = acc;
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S g = oi->grad[0];
      for (auto& v : gx) v += g;
    });
  }
  return out;
}

template <class S>
Tensor<S> mean(const Tensor<S>& x) {
  FGSSL_CHECK(x.numel() > 0, "mean: empty tensor");
  const S inv = S(1) / static_cast<S>(x.numel());
  return scale(sum(x), inv);
}

template <class S>
Tensor<S> sum(const Tensor<S>& x, int64_t axis) {
  const auto a = detail::split_axis(x.shape(), axis);
  Tensor<S> out(detail::drop_axis(x.shape(), axis));
  const S* px = x.data();
  S* po = out.data();
  for (int64_t o = 0; o < a.outer; ++o) {
    for (int64_t kk = 0; kk < a.k; ++kk) {
      const S* base = px + (o * a.k + kk) * a.inner;
      S* obase = po + o * a.inner;
      for (int64_t i = 0; i < a.inner; ++i) obase[i] += base[i];
    }
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, a]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      for (int64_t o = 0; o < a.outer; ++o) {
        for (int64_t kk = 0; kk < a.k; ++kk) {
          S* base = gx.data() + (o * a.k + kk) * a.inner;
          const S* gbase = g + o * a.inner;
          for (int64_t i = 0; i < a.inner; ++i) base[i] += gbase[i];
        }
      }
    });
  }
  return out;
}

template <class S>
Tensor<S> mean(const Tensor<S>& x, int64_t axis) {
  const auto a = detail::split_axis(x.shape(), axis);
  FGSSL_CHECK(a.k > 0, "mean: empty axis");
  return scale(sum(x, axis), S(1) / static_cast<S>(a.k));
}

// Max over all elements (ties resolve to the lowest linear index).
template <class S>
Tensor<S> max(const Tensor<S>& x) {
  FGSSL_CHECK(x.numel() > 0, "max: empty tensor");
  const S* px = x.data();
  int64_t best = 0;
  for (int64_t i = 1; i < x.numel(); ++i) {
    if (px[i] > px[best]) best = i;
  }
  Tensor<S> out = Tensor<S>::scalar(px[best]);
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, best]() {
      if (!xi->requires_grad) return;
      accum_grad(*xi)[static_cast<size_t>(best)] += oi->grad[0];
    });
  }
  return out;
}

template <class S>
Tensor<S> max(const Tensor<S>& x, int64_t axis) {
  const auto a = detail::split_axis(x.shape(), axis);
  FGSSL_CHECK(a.k > 0, "max: empty axis");
  Tensor<S> out(detail::drop_axis(x.shape(), axis));
  std::vector<int64_t> argmax(static_cast<size_t>(out.numel()));
  const S* px = x.data();
  S* po = out.data();
  for (int64_t o = 0; o < a.outer; ++o) {
    for (int64_t i = 0; i < a.inner; ++i) {
      int64_t best_k = 0;
      S bv = px[(o * a.k) * a.inner + i];
      for (int64_t kk = 1; kk < a.k; ++kk) {
        const S v = px[(o * a.k + kk) * a.inner + i];
        if (v > bv) {
          bv = v;
          best_k = kk;
        }
      }
      po[o * a.inner + i] = bv;
      argmax[static_cast<size_t>(o * a.inner + i)] = (o * a.k + best_k) * a.inner + i;
    }
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, argmax = std::move(argmax)]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      for (size_t i = 0; i < argmax.size(); ++i) gx[static_cast<size_t>(argmax[i])] += g[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Softmax family, computed with the max-shift trick along one axis.

template <class S>
Tensor<S> softmax(const Tensor<S>& x, int64_t axis) {
  const auto a = detail::split_axis(x.shape(), axis);
  FGSSL_CHECK(a.k > 0, "softmax: empty axis");
  Tensor<S> out(x.shape());
  const S* px = x.data();
  S* po = out.data();
  for (int64_t o = 0; o < a.outer; ++o) {
    for (int64_t i = 0; i < a.inner; ++i) {
      const int64_t base = o * a.k * a.inner + i;
      S m = px[base];
      for (int64_t kk = 1; kk < a.k; ++kk) m = std::max(m, px[base + kk * a.inner]);
      S z = S(0);
      for (int64_t kk = 0; kk < a.k; ++kk) {
        const S e = std::exp(px[base + kk * a.inner] - m);
        po[base + kk * a.inner] = e;
        z += e;
      }
      const S inv = S(1) / z;
      for (int64_t kk = 0; kk < a.k; ++kk) po[base + kk * a.inner] *= inv;
    }
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, a]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* y = oi->value.data();
      const S* g = oi->grad.data();
      for (int64_t o = 0; o < a.outer; ++o) {
        for (int64_t i = 0; i < a.inner; ++i) {
          const int64_t base = o * a.k * a.inner + i;
          S dot = S(0);
          for (int64_t kk = 0; kk < a.k; ++kk) {
            const int64_t idx = base + kk * a.inner;
            dot += g[idx] * y[idx];
          }
          for (int64_t kk = 0; kk < a.k; ++kk) {
            const int64_t idx = base + kk * a.inner;
            gx[static_cast<size_t>(idx)] += y[idx] * (g[idx] - dot);
          }
        }
      }
    });
  }
  return out;
}

template <class S>
Tensor<S> log_softmax(const Tensor<S>& x, int64_t axis) {
  const auto a = detail::split_axis(x.shape(), axis);
  FGSSL_CHECK(a.k > 0, "log_softmax: empty axis");
  Tensor<S> out(x.shape());
  const S* px = x.data();
  S* po = out.data();
  for (int64_t o = 0; o < a.outer; ++o) {
    for (int64_t i = 0; i < a.inner; ++i) {
      const int64_t base = o * a.k * a.inner + i;
      S m = px[base];
      for (int64_t kk = 1; kk < a.k; ++kk) m = std::max(m, px[base + kk * a.inner]);
      S z = S(0);
      for (int64_t kk = 0; kk < a.k; ++kk) z += std::exp(px[base + kk * a.inner] - m);
      const S lse = m + std::log(z);
      for (int64_t kk = 0; kk < a.k; ++kk) po[base + kk * a.inner] = px[base + kk * a.inner] - lse;
    }
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, a]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* y = oi->value.data();
      const S* g = oi->grad.data();
      for (int64_t o = 0; o < a.outer; ++o) {
        for (int64_t i = 0; i < a.inner; ++i) {
          const int64_t base = o * a.k * a.inner + i;
          S gsum = S(0);
          for (int64_t kk = 0; kk < a.k; ++kk) gsum += g[base + kk * a.inner];
          for (int64_t kk = 0; kk < a.k; ++kk) {
            const int64_t idx = base + kk * a.inner;
            gx[static_cast<size_t>(idx)] += g[idx] - std::exp(y[idx]) * gsum;
          }
        }
      }
    });
  }
  return out;
}

// log(sum(exp(x))) over a 1-D tensor, max-shifted. A single-element input
// returns that element exactly.
template <class S>
Tensor<S> logsumexp(const Tensor<S>& x) {
  FGSSL_CHECK(x.rank() == 1 && x.numel() > 0, "logsumexp: input must be non-empty rank 1");
  const S* px = x.data();
  S m = px[0];
  for (int64_t i = 1; i < x.numel(); ++i) m = std::max(m, px[i]);
  S z = S(0);
  for (int64_t i = 0; i < x.numel(); ++i) z += std::exp(px[i] - m);
  Tensor<S> out = Tensor<S>::scalar(m + std::log(z));
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S g = oi->grad[0];
      const S lse = oi->value[0];
      const S* px2 = xi->value.data();
      for (size_t i = 0; i < gx.size(); ++i) gx[i] += g * std::exp(px2[i] - lse);
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural ops.

template <class S>
Tensor<S> reshape(const Tensor<S>& x, Shape new_shape) {
  FGSSL_CHECK(shape_numel(new_shape) == x.numel(),
              "reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(new_shape));
  Tensor<S> out = Tensor<S>::from_data(std::move(new_shape), x.vec());
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      for (size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

// Contiguous slice [begin, end) along axis 0.
template <class S>
Tensor<S> slice_rows(const Tensor<S>& x, int64_t begin, int64_t end) {
  FGSSL_CHECK(x.rank() >= 1, "slice_rows: input must have rank >= 1");
  FGSSL_CHECK(0 <= begin && begin < end && end <= x.dim(0),
              "slice_rows: bad range [" + std::to_string(begin) + "," + std::to_string(end) +
                  ") for dim " + std::to_string(x.dim(0)));
  const int64_t row = x.numel() / x.dim(0);
  Shape out_shape = x.shape();
  out_shape[0] = end - begin;
  Tensor<S> out(std::move(out_shape));
  const S* px = x.data() + begin * row;
  std::copy(px, px + (end - begin) * row, out.data());
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, begin, row]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      S* base = gx.data() + begin * row;
      for (size_t i = 0; i < oi->grad.size(); ++i) base[i] += g[i];
    });
  }
  return out;
}

// Concatenation of 1-D tensors.
template <class S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts) {
  FGSSL_CHECK(!parts.empty(), "concat: no inputs");
  int64_t total = 0;
  for (const auto& p : parts) {
    FGSSL_CHECK(p.rank() == 1, "concat: all inputs must be rank 1");
    total += p.numel();
  }
  Tensor<S> out(Shape{total});
  S* po = out.data();
  int64_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.data(), p.data() + p.numel(), po + off);
    off += p.numel();
  }
  bool rec = false;
  for (const auto& p : parts) rec = rec || detail::recording<S>({&p});
  if (rec) {
    std::vector<std::shared_ptr<TensorImpl<S>>> impls;
    for (const auto& p : parts) impls.push_back(p.impl());
    auto oi = out.impl();
    detail::record(out, [impls = std::move(impls), oi]() {
      const S* g = oi->grad.data();
      int64_t off2 = 0;
      for (auto& pi : impls) {
        const int64_t n = static_cast<int64_t>(pi->value.size());
        if (pi->requires_grad) {
          std::vector<S>& gp = accum_grad(*pi);
          for (int64_t i = 0; i < n; ++i) gp[static_cast<size_t>(i)] += g[off2 + i];
        }
        off2 += n;
      }
    });
  }
  return out;
}

// out[j] = x[idx[j]] over a 1-D tensor; duplicate indices accumulate in the
// backward scatter.
template <class S>
Tensor<S> gather(const Tensor<S>& x, std::vector<int64_t> idx) {
  FGSSL_CHECK(x.rank() == 1, "gather: input must be rank 1");
  for (int64_t i : idx) {
    FGSSL_CHECK(i >= 0 && i < x.numel(), "gather: index " + std::to_string(i) + " out of range");
  }
  Tensor<S> out(Shape{static_cast<int64_t>(idx.size())});
  const S* px = x.data();
  S* po = out.data();
  for (size_t j = 0; j < idx.size(); ++j) po[j] = px[idx[j]];
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, idx = std::move(idx)]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      for (size_t j = 0; j < idx.size(); ++j) gx[static_cast<size_t>(idx[j])] += g[j];
    });
  }
  return out;
}

// out[b] = x[b, idx[b]] for a [B,N] tensor.
template <class S>
Tensor<S> select_index(const Tensor<S>& x, const std::vector<int64_t>& idx) {
  FGSSL_CHECK(x.rank() == 2, "select_index: input must be rank 2");
  const int64_t b = x.dim(0), n = x.dim(1);
  FGSSL_CHECK(static_cast<int64_t>(idx.size()) == b, "select_index: one index per row required");
  for (int64_t i : idx) {
    FGSSL_CHECK(i >= 0 && i < n, "select_index: index " + std::to_string(i) + " out of range");
  }
  Tensor<S> out(Shape{b});
  const S* px = x.data();
  S* po = out.data();
  for (int64_t r = 0; r < b; ++r) po[r] = px[r * n + idx[static_cast<size_t>(r)]];
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, idx, n]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* g = oi->grad.data();
      for (size_t r = 0; r < idx.size(); ++r) gx[static_cast<size_t>(r * n + idx[r])] += g[r];
    });
  }
  return out;
}

// x[b,:] + v broadcast over rows.
template <class S>
Tensor<S> add_rowvec(const Tensor<S>& x, const Tensor<S>& v) {
  FGSSL_CHECK(x.rank() == 2 && v.rank() == 1 && x.dim(1) == v.dim(0),
              "add_rowvec: need [B,N] and [N], got " + shape_str(x.shape()) + " and " + shape_str(v.shape()));
  const int64_t b = x.dim(0), n = x.dim(1);
  Tensor<S> out(x.shape());
  const S* px = x.data();
  const S* pv = v.data();
  S* po = out.data();
  for (int64_t r = 0; r < b; ++r) {
    for (int64_t j = 0; j < n; ++j) po[r * n + j] = px[r * n + j] + pv[j];
  }
  if (detail::recording<S>({&x, &v})) {
    auto xi = x.impl(), vi = v.impl(), oi = out.impl();
    detail::record(out, [xi, vi, oi, b, n]() {
      const S* g = oi->grad.data();
      if (xi->requires_grad) {
        std::vector<S>& gx = accum_grad(*xi);
        for (int64_t i = 0; i < b * n; ++i) gx[static_cast<size_t>(i)] += g[i];
      }
      if (vi->requires_grad) {
        std::vector<S>& gv = accum_grad(*vi);
        for (int64_t r = 0; r < b; ++r) {
          for (int64_t j = 0; j < n; ++j) gv[static_cast<size_t>(j)] += g[r * n + j];
        }
      }
    });
  }
  return out;
}

// Row-wise L2 normalization; a 1-D input is treated as a single row. Zero
// rows are an error because their direction is undefined.
template <class S>
Tensor<S> l2_normalize(const Tensor<S>& x) {
  FGSSL_CHECK(x.rank() == 1 || x.rank() == 2, "l2_normalize: input must be rank 1 or 2");
  const int64_t rows = x.rank() == 2 ? x.dim(0) : 1;
  const int64_t e = x.rank() == 2 ? x.dim(1) : x.dim(0);
  FGSSL_CHECK(e > 0, "l2_normalize: empty rows");
  Tensor<S> out(x.shape());
  std::vector<S> norms(static_cast<size_t>(rows));
  const S* px = x.data();
  S* po = out.data();
  for (int64_t r = 0; r < rows; ++r) {
    S acc = S(0);
    for (int64_t j = 0; j < e; ++j) acc += px[r * e + j] * px[r * e + j];
    const S nrm = std::sqrt(acc);
    FGSSL_CHECK(nrm > S(0), "l2_normalize: zero vector has no direction");
    norms[static_cast<size_t>(r)] = nrm;
    const S inv = S(1) / nrm;
    for (int64_t j = 0; j < e; ++j) po[r * e + j] = px[r * e + j] * inv;
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), oi = out.impl();
    detail::record(out, [xi, oi, rows, e, norms = std::move(norms)]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* y = oi->value.data();
      const S* g = oi->grad.data();
      for (int64_t r = 0; r < rows; ++r) {
        S dot = S(0);
        for (int64_t j = 0; j < e; ++j) dot += y[r * e + j] * g[r * e + j];
        const S inv = S(1) / norms[static_cast<size_t>(r)];
        for (int64_t j = 0; j < e; ++j) {
          gx[static_cast<size_t>(r * e + j)] += (g[r * e + j] - y[r * e + j] * dot) * inv;
        }
      }
    });
  }
  return out;
}

// Elementwise binary cross entropy on logits against constant targets in
// [0,1]: softplus(x) - t*x, the stable form of BCE(sigmoid(x), t).
template <class S>
Tensor<S> bce_logits(const Tensor<S>& x, const Tensor<S>& target) {
  FGSSL_CHECK(x.shape() == target.shape(), "bce_logits: shape mismatch");
  for (const S t : target.vec()) {
    FGSSL_CHECK(t >= S(0) && t <= S(1), "bce_logits: targets must lie in [0,1]");
  }
  Tensor<S> out(x.shape());
  const int64_t n = x.numel();
  const S* px = x.data();
  const S* pt = target.data();
  S* po = out.data();
  for (int64_t i = 0; i < n; ++i) {
    const S v = px[i];
    const S softplus = std::max(v, S(0)) + std::log1p(std::exp(-std::abs(v)));
    po[i] = softplus - pt[i] * v;
  }
  if (detail::recording<S>({&x})) {
    auto xi = x.impl(), ti = target.impl(), oi = out.impl();
    detail::record(out, [xi, ti, oi, n]() {
      if (!xi->requires_grad) return;
      std::vector<S>& gx = accum_grad(*xi);
      const S* px2 = xi->value.data();
      const S* pt2 = ti->value.data();
      const S* g = oi->grad.data();
      for (int64_t i = 0; i < n; ++i) {
        const S sig = S(1) / (S(1) + std::exp(-px2[i]));
        gx[static_cast<size_t>(i)] += g[i] * (sig - pt2[i]);
      }
    });
  }
  return out;
}

}  // namespace ops

// Operator sugar over the ops namespace.
template <class S>
Tensor<S> operator+(const Tensor<S>& a, const Tensor<S>& b) {
  return ops::add(a, b);
}
template <class S>
Tensor<S> operator-(const Tensor<S>& a, const Tensor<S>& b) {
  return ops::sub(a, b);
}
template <class S>
Tensor<S> operator*(const Tensor<S>& a, const Tensor<S>& b) {
  return ops::mul(a, b);
}
template <class S>
Tensor<S> operator*(const Tensor<S>& a, S c) {
  return ops::scale(a, c);
}
template <class S>
Tensor<S> operator*(S c, const Tensor<S>& a) {
  return ops::scale(a, c);
}
template <class S>
Tensor<S> operator-(const Tensor<S>& a) {
  return ops::neg(a);
}

}  // namespace fgssl
