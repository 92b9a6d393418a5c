#include <omp.h>

#include "core/gemm.h"
#include "core/ops.h"

namespace stvsr {
namespace ops {

namespace scratch {

// reused across calls; ops run on one thread at a time so thread_local is
// enough to keep reentrancy safe
template <typename T>
std::vector<T>& cols() {
  thread_local std::vector<T> buf;
  return buf;
}
template <typename T>
std::vector<T>& dcols() {
  thread_local std::vector<T> buf;
  return buf;
}

}  // namespace scratch

namespace {

// cols is [ic*k*k, oh*ow], zero padding.
template <typename T>
void im2col(const Tensor<T>& x, int n, int k, int stride, int pad, int oh, int ow,
            T* cols) {
  const Shape& s = x.shape;
  const int64_t ocols = int64_t(oh) * ow;
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < s.c; ++ic) {
    const T* src = x.plane(n, ic);
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols + ((int64_t(ic) * k + ky) * k + kx) * ocols;
        for (int oy = 0; oy < oh; ++oy) {
          int y = oy * stride - pad + ky;
          if (y < 0 || y >= s.h) {
            std::fill_n(dst + int64_t(oy) * ow, ow, T(0));
            continue;
          }
          const T* row = src + int64_t(y) * s.w;
          T* out_row = dst + int64_t(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            int xx = ox * stride - pad + kx;
            out_row[ox] = (xx >= 0 && xx < s.w) ? row[xx] : T(0);
          }
        }
      }
  }
}

// scatter-add of cols into dx (transpose of im2col)
template <typename T>
void col2im_add(const T* cols, int k, int stride, int pad, int oh, int ow,
                Tensor<T>& dx, int n) {
  const Shape& s = dx.shape;
  const int64_t ocols = int64_t(oh) * ow;
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < s.c; ++ic) {
    T* dst = dx.plane(n, ic);
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const T* src = cols + ((int64_t(ic) * k + ky) * k + kx) * ocols;
        for (int oy = 0; oy < oh; ++oy) {
          int y = oy * stride - pad + ky;
          if (y < 0 || y >= s.h) continue;
          T* row = dst + int64_t(y) * s.w;
          const T* src_row = src + int64_t(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            int xx = ox * stride - pad + kx;
            if (xx >= 0 && xx < s.w) row[xx] += src_row[ox];
          }
        }
      }
  }
}

}  // namespace

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, Var<T> b, int stride, int pad) {
  const Shape& xs = x->value.shape;
  const Shape& ws = w->value.shape;
  if (ws.h != ws.w) throw ConfigError("conv2d: only square kernels supported");
  const int k = ws.h;
  if (ws.c != xs.c)
    throw ConfigError("conv2d: weight expects " + std::to_string(ws.c) +
                      " input channels, got " + std::to_string(xs.c));
  if (b && (b->value.shape.c != ws.n || b->value.shape.numel() != ws.n))
    throw ConfigError("conv2d: bias shape mismatch");
  const int oh = (xs.h + 2 * pad - k) / stride + 1;
  const int ow = (xs.w + 2 * pad - k) / stride + 1;
  if (oh < 1 || ow < 1) throw ConfigError("conv2d: output would be empty");
  const int oc = ws.n;
  const int ick2 = xs.c * k * k;
  const int64_t ocols = int64_t(oh) * ow;

  Tensor<T> out(Shape(xs.n, oc, oh, ow));
  std::vector<T>& cols = scratch::cols<T>();
  cols.resize(size_t(ick2) * ocols);
  for (int n = 0; n < xs.n; ++n) {
    im2col(x->value, n, k, stride, pad, oh, ow, cols.data());
    gemm(false, false, oc, int(ocols), ick2, T(1), w->value.data(), ick2, cols.data(),
         int(ocols), T(0), out.plane(n, 0), int(ocols));
  }
  if (b) {
    for (int n = 0; n < xs.n; ++n)
      for (int c = 0; c < oc; ++c) {
        T bias = b->value.v[size_t(c)];
        T* p = out.plane(n, c);
        for (int64_t i = 0; i < ocols; ++i) p[i] += bias;
      }
  }

  std::vector<Var<T>> inputs = b ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
  return make_node<T>(
      std::move(out), "conv2d", std::move(inputs),
      [k, stride, pad, oh, ow, oc, ick2, ocols](Node<T>& n) {
        auto& x = n.inputs[0];
        auto& w = n.inputs[1];
        Var<T> b = n.inputs.size() > 2 ? n.inputs[2] : nullptr;
        const Shape& xs = x->value.shape;
        std::vector<T>& cols = scratch::cols<T>();
        std::vector<T>& dcols = scratch::dcols<T>();
        cols.resize(size_t(ick2) * ocols);
        dcols.resize(size_t(ick2) * ocols);
        for (int item = 0; item < xs.n; ++item) {
          const T* gout = n.grad.plane(item, 0);
          if (w->requires_grad) {
            im2col(x->value, item, k, stride, pad, oh, ow, cols.data());
            // dW += gout [oc, S] * cols^T [S, ick2]
            gemm(false, true, oc, ick2, int(ocols), T(1), gout, int(ocols), cols.data(),
                 int(ocols), T(1), w->ensure_grad().data(), ick2);
          }
          if (x->requires_grad) {
            // dcols = W^T [ick2, oc] * gout [oc, S]
            gemm(true, false, ick2, int(ocols), oc, T(1), w->value.data(), ick2, gout,
                 int(ocols), T(0), dcols.data(), int(ocols));
            col2im_add(dcols.data(), k, stride, pad, oh, ow, x->ensure_grad(), item);
          }
          if (b && b->requires_grad) {
            T* gb = b->ensure_grad().data();
            for (int c = 0; c < oc; ++c) {
              const T* gp = n.grad.plane(item, c);
              T acc = T(0);
              for (int64_t i = 0; i < ocols; ++i) acc += gp[i];
              gb[c] += acc;
            }
          }
        }
      });
}

template <typename T>
Var<T> pixel_shuffle(Var<T> x, int r) {
  const Shape& s = x->value.shape;
  if (r < 1) throw ConfigError("pixel_shuffle: factor must be >= 1");
  if (s.c % (r * r) != 0)
    throw ConfigError("pixel_shuffle: channels " + std::to_string(s.c) +
                      " not divisible by r^2=" + std::to_string(r * r));
  const int oc = s.c / (r * r);
  Tensor<T> out(Shape(s.n, oc, s.h * r, s.w * r));
  out.domain = x->value.domain;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < oc; ++c)
      for (int dy = 0; dy < r; ++dy)
        for (int dx = 0; dx < r; ++dx) {
          const T* src = x->value.plane(n, (c * r + dy) * r + dx);
          for (int y = 0; y < s.h; ++y) {
            T* dst = out.plane(n, c) + int64_t(y * r + dy) * (s.w * r) + dx;
            const T* srow = src + int64_t(y) * s.w;
            for (int xx = 0; xx < s.w; ++xx) dst[int64_t(xx) * r] = srow[xx];
          }
        }
  return make_node<T>(std::move(out), "pixel_shuffle", {x}, [r](Node<T>& n) {
    auto& in = n.inputs[0];
    if (!in->requires_grad) return;
    const Shape& s = in->value.shape;
    const int oc = s.c / (r * r);
    Tensor<T>& g = in->ensure_grad();
    for (int b = 0; b < s.n; ++b)
      for (int c = 0; c < oc; ++c)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) {
            T* dst = g.plane(b, (c * r + dy) * r + dx);
            for (int y = 0; y < s.h; ++y) {
              const T* src = n.grad.plane(b, c) + int64_t(y * r + dy) * (s.w * r) + dx;
              T* drow = dst + int64_t(y) * s.w;
              for (int xx = 0; xx < s.w; ++xx) drow[xx] += src[int64_t(xx) * r];
            }
          }
  });
}

template <typename T>
Var<T> pixel_unshuffle(Var<T> x, int r) {
  const Shape& s = x->value.shape;
  if (r < 1) throw ConfigError("pixel_unshuffle: factor must be >= 1");
  if (s.h % r != 0 || s.w % r != 0)
    throw ConfigError("pixel_unshuffle: spatial dims not divisible by r");
  const int oh = s.h / r, ow = s.w / r;
  Tensor<T> out(Shape(s.n, s.c * r * r, oh, ow));
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int dy = 0; dy < r; ++dy)
        for (int dx = 0; dx < r; ++dx) {
          T* dst = out.plane(n, (c * r + dy) * r + dx);
          const T* src = x->value.plane(n, c);
          for (int y = 0; y < oh; ++y)
            for (int xx = 0; xx < ow; ++xx)
              dst[int64_t(y) * ow + xx] = src[int64_t(y * r + dy) * s.w + (xx * r + dx)];
        }
  return make_node<T>(std::move(out), "pixel_unshuffle", {x}, [r](Node<T>& n) {
    auto& in = n.inputs[0];
    if (!in->requires_grad) return;
    const Shape& s = in->value.shape;
    const int oh = s.h / r, ow = s.w / r;
    Tensor<T>& g = in->ensure_grad();
    for (int b = 0; b < s.n; ++b)
      for (int c = 0; c < s.c; ++c)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) {
            const T* src = n.grad.plane(b, (c * r + dy) * r + dx);
            T* dst = g.plane(b, c);
            for (int y = 0; y < oh; ++y)
              for (int xx = 0; xx < ow; ++xx)
                dst[int64_t(y * r + dy) * s.w + (xx * r + dx)] += src[int64_t(y) * ow + xx];
          }
  });
}

#define INSTANTIATE_CONV(T)                          \
  template Var<T> conv2d(Var<T>, Var<T>, Var<T>, int, int); \
  template Var<T> pixel_shuffle(Var<T>, int);        \
  template Var<T> pixel_unshuffle(Var<T>, int);

INSTANTIATE_CONV(float)
INSTANTIATE_CONV(double)

}  // namespace ops
}  // namespace stvsr
