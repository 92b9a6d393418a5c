#include <algorithm>
#include <cmath>
#include <omp.h>

#include "core/gemm.h"
#include "core/ops.h"

namespace stvsr {
namespace ops {

namespace {

// Interpolation cell for coordinate y: weights live on [y0, y0+1] with
// fy in (0, 1]. Integer coordinates pick the left/lower cell (fy = 1), which
// makes the subgradient there the left one.
template <typename T>
inline void sample_cell(T y, int limit, int* y0, T* fy) {
  // far outside the support every contribution is zero; clamp to keep the
  // int conversion safe for arbitrary real inputs
  if (y < T(-limit - 3)) y = T(-limit - 3);
  if (y > T(limit + 3)) y = T(limit + 3);
  T fl = std::floor(y);
  if (fl == y) {
    *y0 = int(fl) - 1;
    *fy = T(1);
  } else {
    *y0 = int(fl);
    *fy = y - fl;
  }
}

template <typename T>
inline T read_zero(const T* plane, int h, int w, int y, int x) {
  return (y >= 0 && y < h && x >= 0 && x < w) ? plane[int64_t(y) * w + x] : T(0);
}

}  // namespace

template <typename T>
T bilinear_sample(const Tensor<T>& src, int n, int c, T y, T x) {
  const Shape& s = src.shape;
  int y0, x0;
  T fy, fx;
  sample_cell(y, s.h, &y0, &fy);
  sample_cell(x, s.w, &x0, &fx);
  const T* p = src.plane(n, c);
  T v00 = read_zero(p, s.h, s.w, y0, x0);
  T v01 = read_zero(p, s.h, s.w, y0, x0 + 1);
  T v10 = read_zero(p, s.h, s.w, y0 + 1, x0);
  T v11 = read_zero(p, s.h, s.w, y0 + 1, x0 + 1);
  return (T(1) - fy) * ((T(1) - fx) * v00 + fx * v01) +
         fy * ((T(1) - fx) * v10 + fx * v11);
}

template <typename T>
void bilinear_sample_grad(const Tensor<T>& src, int n, int c, T y, T x, T* value,
                          T* dy, T* dx) {
  const Shape& s = src.shape;
  int y0, x0;
  T fy, fx;
  sample_cell(y, s.h, &y0, &fy);
  sample_cell(x, s.w, &x0, &fx);
  const T* p = src.plane(n, c);
  T v00 = read_zero(p, s.h, s.w, y0, x0);
  T v01 = read_zero(p, s.h, s.w, y0, x0 + 1);
  T v10 = read_zero(p, s.h, s.w, y0 + 1, x0);
  T v11 = read_zero(p, s.h, s.w, y0 + 1, x0 + 1);
  *value = (T(1) - fy) * ((T(1) - fx) * v00 + fx * v01) +
           fy * ((T(1) - fx) * v10 + fx * v11);
  *dy = (T(1) - fx) * (v10 - v00) + fx * (v11 - v01);
  *dx = (T(1) - fy) * (v01 - v00) + fy * (v11 - v10);
}

// ---- deformable convolution --------------------------------------------------

namespace {

template <typename T>
struct DeformDims {
  int k, k2, pad, groups, ic, oc, oh, ow, ic_per_g;
  int64_t ocols;
};

template <typename T>
DeformDims<T> deform_dims(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& off,
                          const Tensor<T>* mod, int pad, int groups) {
  const Shape& xs = x.shape;
  const Shape& ws = w.shape;
  if (ws.h != ws.w) throw ConfigError("deform_conv2d: only square kernels");
  DeformDims<T> d;
  d.k = ws.h;
  d.k2 = d.k * d.k;
  d.pad = pad;
  d.groups = groups;
  d.ic = xs.c;
  d.oc = ws.n;
  if (ws.c != xs.c) throw ConfigError("deform_conv2d: weight/input channel mismatch");
  if (groups < 1 || xs.c % groups != 0)
    throw ConfigError("deform_conv2d: groups must divide input channels");
  d.ic_per_g = xs.c / groups;
  d.oh = xs.h + 2 * pad - d.k + 1;
  d.ow = xs.w + 2 * pad - d.k + 1;
  if (d.oh < 1 || d.ow < 1) throw ConfigError("deform_conv2d: empty output");
  d.ocols = int64_t(d.oh) * d.ow;
  const Shape& os = off.shape;
  if (os.n != xs.n || os.c != 2 * d.k2 * groups || os.h != d.oh || os.w != d.ow)
    throw ConfigError("deform_conv2d: offsets shape " + os.str() + " incompatible, want [" +
                      std::to_string(xs.n) + "," + std::to_string(2 * d.k2 * groups) + "," +
                      std::to_string(d.oh) + "," + std::to_string(d.ow) + "]");
  if (mod) {
    const Shape& ms = mod->shape;
    if (ms.n != xs.n || ms.c != d.k2 * groups || ms.h != d.oh || ms.w != d.ow)
      throw ConfigError("deform_conv2d: modulation shape incompatible");
  }
  return d;
}

// cols[(ic*k2 + t), oy*ow+ox] = mod * bilinear(x[ic], base + offset)
template <typename T>
void deform_im2col(const Tensor<T>& x, const Tensor<T>& off, const Tensor<T>* mod,
                   int n, const DeformDims<T>& d, T* cols) {
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < d.ic; ++ic) {
    const int g = ic / d.ic_per_g;
    for (int t = 0; t < d.k2; ++t) {
      const int ky = t / d.k, kx = t % d.k;
      const T* offy = off.plane(n, (g * d.k2 + t) * 2);
      const T* offx = off.plane(n, (g * d.k2 + t) * 2 + 1);
      const T* m = mod ? mod->plane(n, g * d.k2 + t) : nullptr;
      T* dst = cols + (int64_t(ic) * d.k2 + t) * d.ocols;
      for (int oy = 0; oy < d.oh; ++oy)
        for (int ox = 0; ox < d.ow; ++ox) {
          int64_t i = int64_t(oy) * d.ow + ox;
          T py = T(oy - d.pad + ky) + offy[i];
          T px = T(ox - d.pad + kx) + offx[i];
          T v = bilinear_sample(x, n, ic, py, px);
          dst[i] = m ? m[i] * v : v;
        }
    }
  }
}

}  // namespace

template <typename T>
Var<T> deform_conv2d(Var<T> x, Var<T> w, Var<T> b, Var<T> offsets, Var<T> modulation,
                     int pad, int groups) {
  const Tensor<T>* mod = modulation ? &modulation->value : nullptr;
  DeformDims<T> d = deform_dims(x->value, w->value, offsets->value, mod, pad, groups);
  const Shape& xs = x->value.shape;
  const int ick2 = d.ic * d.k2;

  Tensor<T> out(Shape(xs.n, d.oc, d.oh, d.ow));
  std::vector<T> cols(size_t(ick2) * d.ocols);  // deform cols stay local: the
  for (int n = 0; n < xs.n; ++n) {              // op runs twice per forward
    deform_im2col(x->value, offsets->value, mod, n, d, cols.data());
    gemm(false, false, d.oc, int(d.ocols), ick2, T(1), w->value.data(), ick2,
         cols.data(), int(d.ocols), T(0), out.plane(n, 0), int(d.ocols));
  }
  if (b) {
    for (int n = 0; n < xs.n; ++n)
      for (int c = 0; c < d.oc; ++c) {
        T bias = b->value.v[size_t(c)];
        T* p = out.plane(n, c);
        for (int64_t i = 0; i < d.ocols; ++i) p[i] += bias;
      }
  }

  std::vector<Var<T>> inputs{x, w, offsets};
  int bias_idx = -1, mod_idx = -1;
  if (b) {
    bias_idx = int(inputs.size());
    inputs.push_back(b);
  }
  if (modulation) {
    mod_idx = int(inputs.size());
    inputs.push_back(modulation);
  }

  return make_node<T>(
      std::move(out), "deform_conv2d", std::move(inputs),
      [d, ick2, bias_idx, mod_idx](Node<T>& n) {
        auto& x = n.inputs[0];
        auto& w = n.inputs[1];
        auto& off = n.inputs[2];
        Var<T> b = bias_idx >= 0 ? n.inputs[bias_idx] : nullptr;
        Var<T> modv = mod_idx >= 0 ? n.inputs[mod_idx] : nullptr;
        const Tensor<T>* mod = modv ? &modv->value : nullptr;
        const Shape& xs = x->value.shape;

        std::vector<T> cols(size_t(ick2) * d.ocols);
        std::vector<T> dcols(size_t(ick2) * d.ocols);
        for (int item = 0; item < xs.n; ++item) {
          const T* gout = n.grad.plane(item, 0);
          if (w->requires_grad) {
            deform_im2col(x->value, off->value, mod, item, d, cols.data());
            gemm(false, true, d.oc, ick2, int(d.ocols), T(1), gout, int(d.ocols),
                 cols.data(), int(d.ocols), T(1), w->ensure_grad().data(), ick2);
          }
          if (b && b->requires_grad) {
            T* gb = b->ensure_grad().data();
            for (int c = 0; c < d.oc; ++c) {
              const T* gp = n.grad.plane(item, c);
              T acc = T(0);
              for (int64_t i = 0; i < d.ocols; ++i) acc += gp[i];
              gb[c] += acc;
            }
          }
          bool need_x = x->requires_grad;
          bool need_off = off->requires_grad;
          bool need_mod = modv && modv->requires_grad;
          if (!need_x && !need_off && !need_mod) continue;

          // dcols = W^T * gout
          gemm(true, false, ick2, int(d.ocols), d.oc, T(1), w->value.data(), ick2, gout,
               int(d.ocols), T(0), dcols.data(), int(d.ocols));

          if (need_x) {
            Tensor<T>& gx = x->ensure_grad();
#pragma omp parallel for schedule(static)
            for (int ic = 0; ic < d.ic; ++ic) {
              const int g = ic / d.ic_per_g;
              T* gplane = gx.plane(item, ic);
              for (int t = 0; t < d.k2; ++t) {
                const int ky = t / d.k, kx = t % d.k;
                const T* offy = off->value.plane(item, (g * d.k2 + t) * 2);
                const T* offx = off->value.plane(item, (g * d.k2 + t) * 2 + 1);
                const T* m = mod ? mod->plane(item, g * d.k2 + t) : nullptr;
                const T* dc = dcols.data() + (int64_t(ic) * d.k2 + t) * d.ocols;
                for (int oy = 0; oy < d.oh; ++oy)
                  for (int ox = 0; ox < d.ow; ++ox) {
                    int64_t i = int64_t(oy) * d.ow + ox;
                    T gv = m ? dc[i] * m[i] : dc[i];
                    if (gv == T(0)) continue;
                    T py = T(oy - d.pad + ky) + offy[i];
                    T px = T(ox - d.pad + kx) + offx[i];
                    int y0, x0;
                    T fy, fx;
                    sample_cell(py, xs.h, &y0, &fy);
                    sample_cell(px, xs.w, &x0, &fx);
                    for (int ddy = 0; ddy < 2; ++ddy)
                      for (int ddx = 0; ddx < 2; ++ddx) {
                        int yy = y0 + ddy, xxw = x0 + ddx;
                        if (yy < 0 || yy >= xs.h || xxw < 0 || xxw >= xs.w) continue;
                        T wgt = (ddy ? fy : T(1) - fy) * (ddx ? fx : T(1) - fx);
                        gplane[int64_t(yy) * xs.w + xxw] += gv * wgt;
                      }
                  }
              }
            }
          }
          if (need_off || need_mod) {
            Tensor<T>* goff = need_off ? &off->ensure_grad() : nullptr;
            Tensor<T>* gmod = need_mod ? &modv->ensure_grad() : nullptr;
#pragma omp parallel for schedule(static)
            for (int g = 0; g < d.groups; ++g) {
              for (int t = 0; t < d.k2; ++t) {
                const int ky = t / d.k, kx = t % d.k;
                const T* offy = off->value.plane(item, (g * d.k2 + t) * 2);
                const T* offx = off->value.plane(item, (g * d.k2 + t) * 2 + 1);
                const T* m = mod ? mod->plane(item, g * d.k2 + t) : nullptr;
                T* gy = goff ? goff->plane(item, (g * d.k2 + t) * 2) : nullptr;
                T* gxo = goff ? goff->plane(item, (g * d.k2 + t) * 2 + 1) : nullptr;
                T* gm = gmod ? gmod->plane(item, g * d.k2 + t) : nullptr;
                for (int oy = 0; oy < d.oh; ++oy)
                  for (int ox = 0; ox < d.ow; ++ox) {
                    int64_t i = int64_t(oy) * d.ow + ox;
                    T py = T(oy - d.pad + ky) + offy[i];
                    T px = T(ox - d.pad + kx) + offx[i];
                    T acc_y = T(0), acc_x = T(0), acc_m = T(0);
                    for (int ic = g * d.ic_per_g; ic < (g + 1) * d.ic_per_g; ++ic) {
                      T dc = dcols[(int64_t(ic) * d.k2 + t) * d.ocols + i];
                      if (dc == T(0)) continue;
                      T v, dvy, dvx;
                      bilinear_sample_grad(x->value, item, ic, py, px, &v, &dvy, &dvx);
                      acc_y += dc * dvy;
                      acc_x += dc * dvx;
                      acc_m += dc * v;
                    }
                    if (gy) {
                      T mm = m ? m[i] : T(1);
                      gy[i] += mm * acc_y;
                      gxo[i] += mm * acc_x;
                    }
                    if (gm) gm[i] += acc_m;
                  }
              }
            }
          }
        }
      });
}

// ---- bilinear upsample -------------------------------------------------------

namespace {

struct UpTap {
  int a, b;
  double f;  // weight of b; (1-f) on a
};

inline std::vector<UpTap> upsample_taps(int in, int factor) {
  std::vector<UpTap> taps(size_t(in) * factor);
  for (int o = 0; o < in * factor; ++o) {
    double src = (o + 0.5) / factor - 0.5;
    double fl = std::floor(src);
    int i0 = int(fl);
    double f = src - fl;
    int a = std::clamp(i0, 0, in - 1);
    int b = std::clamp(i0 + 1, 0, in - 1);
    taps[size_t(o)] = {a, b, f};
  }
  return taps;
}

}  // namespace

template <typename T>
Var<T> bilinear_upsample(Var<T> x, int factor) {
  if (factor < 1) throw ConfigError("bilinear_upsample: factor must be >= 1");
  const Shape& s = x->value.shape;
  auto ty = upsample_taps(s.h, factor);
  auto tx = upsample_taps(s.w, factor);
  Tensor<T> out(Shape(s.n, s.c, s.h * factor, s.w * factor));
  out.domain = x->value.domain;
  const int oh = s.h * factor, ow = s.w * factor;
#pragma omp parallel for schedule(static)
  for (int nc = 0; nc < s.n * s.c; ++nc) {
    const T* src = x->value.data() + int64_t(nc) * s.h * s.w;
    T* dst = out.data() + int64_t(nc) * oh * ow;
    for (int y = 0; y < oh; ++y) {
      const UpTap& t0 = ty[size_t(y)];
      const T* ra = src + int64_t(t0.a) * s.w;
      const T* rb = src + int64_t(t0.b) * s.w;
      T fy = T(t0.f);
      T* drow = dst + int64_t(y) * ow;
      for (int xq = 0; xq < ow; ++xq) {
        const UpTap& t1 = tx[size_t(xq)];
        T fx = T(t1.f);
        T va = (T(1) - fx) * ra[t1.a] + fx * ra[t1.b];
        T vb = (T(1) - fx) * rb[t1.a] + fx * rb[t1.b];
        drow[xq] = (T(1) - fy) * va + fy * vb;
      }
    }
  }
  return make_node<T>(std::move(out), "bilinear_upsample", {x}, [factor](Node<T>& n) {
    auto& in = n.inputs[0];
    if (!in->requires_grad) return;
    const Shape& s = in->value.shape;
    auto ty = upsample_taps(s.h, factor);
    auto tx = upsample_taps(s.w, factor);
    Tensor<T>& g = in->ensure_grad();
    const int oh = s.h * factor, ow = s.w * factor;
#pragma omp parallel for schedule(static)
    for (int nc = 0; nc < s.n * s.c; ++nc) {
      T* gin = g.data() + int64_t(nc) * s.h * s.w;
      const T* go = n.grad.data() + int64_t(nc) * oh * ow;
      for (int y = 0; y < oh; ++y) {
        const UpTap& t0 = ty[size_t(y)];
        T fy = T(t0.f);
        const T* grow = go + int64_t(y) * ow;
        T* ga = gin + int64_t(t0.a) * s.w;
        T* gb = gin + int64_t(t0.b) * s.w;
        for (int xq = 0; xq < ow; ++xq) {
          const UpTap& t1 = tx[size_t(xq)];
          T fx = T(t1.f);
          T v = grow[xq];
          ga[t1.a] += (T(1) - fy) * (T(1) - fx) * v;
          ga[t1.b] += (T(1) - fy) * fx * v;
          gb[t1.a] += fy * (T(1) - fx) * v;
          gb[t1.b] += fy * fx * v;
        }
      }
    }
  });
}

// ---- flow warp ----------------------------------------------------------------

template <typename T>
Var<T> warp(Var<T> src, Var<T> flow) {
  const Shape& s = src->value.shape;
  const Shape& fs = flow->value.shape;
  if (fs.n != s.n || fs.c != 2 || fs.h != s.h || fs.w != s.w)
    throw ConfigError("warp: flow must be [n,2,h,w] matching source");
  Tensor<T> out(s);
  for (int n = 0; n < s.n; ++n) {
    const T* fy = flow->value.plane(n, 0);
    const T* fx = flow->value.plane(n, 1);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < s.c; ++c) {
      T* dst = out.plane(n, c);
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x) {
          int64_t i = int64_t(y) * s.w + x;
          dst[i] = bilinear_sample(src->value, n, c, T(y) + fy[i], T(x) + fx[i]);
        }
    }
  }
  return make_node<T>(std::move(out), "warp", {src, flow}, [](Node<T>& n) {
    auto& src = n.inputs[0];
    auto& flow = n.inputs[1];
    const Shape& s = src->value.shape;
    for (int item = 0; item < s.n; ++item) {
      const T* fy = flow->value.plane(item, 0);
      const T* fx = flow->value.plane(item, 1);
      if (src->requires_grad) {
        Tensor<T>& g = src->ensure_grad();
#pragma omp parallel for schedule(static)
        for (int c = 0; c < s.c; ++c) {
          T* gplane = g.plane(item, c);
          const T* go = n.grad.plane(item, c);
          for (int y = 0; y < s.h; ++y)
            for (int x = 0; x < s.w; ++x) {
              int64_t i = int64_t(y) * s.w + x;
              T gv = go[i];
              if (gv == T(0)) continue;
              int y0, x0;
              T wy, wx;
              sample_cell(T(y) + fy[i], s.h, &y0, &wy);
              sample_cell(T(x) + fx[i], s.w, &x0, &wx);
              for (int ddy = 0; ddy < 2; ++ddy)
                for (int ddx = 0; ddx < 2; ++ddx) {
                  int yy = y0 + ddy, xxw = x0 + ddx;
                  if (yy < 0 || yy >= s.h || xxw < 0 || xxw >= s.w) continue;
                  T wgt = (ddy ? wy : T(1) - wy) * (ddx ? wx : T(1) - wx);
                  gplane[int64_t(yy) * s.w + xxw] += gv * wgt;
                }
            }
        }
      }
      if (flow->requires_grad) {
        Tensor<T>& gf = flow->ensure_grad();
        T* gfy = gf.plane(item, 0);
        T* gfx = gf.plane(item, 1);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < s.h; ++y)
          for (int x = 0; x < s.w; ++x) {
            int64_t i = int64_t(y) * s.w + x;
            T acc_y = T(0), acc_x = T(0);
            for (int c = 0; c < s.c; ++c) {
              T gv = n.grad.plane(item, c)[i];
              if (gv == T(0)) continue;
              T v, dvy, dvx;
              bilinear_sample_grad(src->value, item, c, T(y) + fy[i], T(x) + fx[i], &v,
                                   &dvy, &dvx);
              acc_y += gv * dvy;
              acc_x += gv * dvx;
            }
            gfy[i] += acc_y;
            gfx[i] += acc_x;
          }
      }
    }
  });
}

#define INSTANTIATE_SAMPLE(T)                                                      \
  template T bilinear_sample(const Tensor<T>&, int, int, T, T);                    \
  template void bilinear_sample_grad(const Tensor<T>&, int, int, T, T, T*, T*, T*); \
  template Var<T> deform_conv2d(Var<T>, Var<T>, Var<T>, Var<T>, Var<T>, int, int); \
  template Var<T> bilinear_upsample(Var<T>, int);                                  \
  template Var<T> warp(Var<T>, Var<T>);

INSTANTIATE_SAMPLE(float)
INSTANTIATE_SAMPLE(double)

}  // namespace ops
}  // namespace stvsr
