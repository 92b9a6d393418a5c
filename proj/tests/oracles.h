#pragma once

// Naive reference implementations, deliberately written as direct loops so the
// production paths (GEMM-based convolutions, separable filters, precomputed
// tap tables) are checked against an independent computation.

#include <cmath>

#include "core/tensor.h"

namespace oracle {

using stvsr::Shape;
using stvsr::Tensor;

template <typename T>
T bilinear_zero_pad(const Tensor<T>& src, int n, int c, double y, double x) {
  // plain floor-cell interpolation; zero outside
  int y0 = int(std::floor(y)), x0 = int(std::floor(x));
  double fy = y - y0, fx = x - x0;
  auto rd = [&](int yy, int xx) -> double {
    if (yy < 0 || yy >= src.shape.h || xx < 0 || xx >= src.shape.w) return 0.0;
    return double(src.at(n, c, yy, xx));
  };
  return T((1 - fy) * ((1 - fx) * rd(y0, x0) + fx * rd(y0, x0 + 1)) +
           fy * ((1 - fx) * rd(y0 + 1, x0) + fx * rd(y0 + 1, x0 + 1)));
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias,
                 int stride, int pad) {
  const Shape& xs = x.shape;
  const int k = w.shape.h;
  const int oh = (xs.h + 2 * pad - k) / stride + 1;
  const int ow = (xs.w + 2 * pad - k) / stride + 1;
  Tensor<T> out(Shape(xs.n, w.shape.n, oh, ow));
  for (int n = 0; n < xs.n; ++n)
    for (int oc = 0; oc < w.shape.n; ++oc)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double acc = bias ? double(bias->v[size_t(oc)]) : 0.0;
          for (int ic = 0; ic < xs.c; ++ic)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                int y = oy * stride - pad + ky;
                int xx = ox * stride - pad + kx;
                if (y < 0 || y >= xs.h || xx < 0 || xx >= xs.w) continue;
                acc += double(w.at(oc, ic, ky, kx)) * double(x.at(n, ic, y, xx));
              }
          out.at(n, oc, oy, ox) = T(acc);
        }
  return out;
}

template <typename T>
Tensor<T> deform_conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias,
                        const Tensor<T>& off, const Tensor<T>* mod, int pad, int groups) {
  const Shape& xs = x.shape;
  const int k = w.shape.h, k2 = k * k;
  const int oh = xs.h + 2 * pad - k + 1;
  const int ow = xs.w + 2 * pad - k + 1;
  const int ic_per_g = xs.c / groups;
  Tensor<T> out(Shape(xs.n, w.shape.n, oh, ow));
  for (int n = 0; n < xs.n; ++n)
    for (int oc = 0; oc < w.shape.n; ++oc)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double acc = bias ? double(bias->v[size_t(oc)]) : 0.0;
          for (int ic = 0; ic < xs.c; ++ic) {
            int g = ic / ic_per_g;
            for (int t = 0; t < k2; ++t) {
              int ky = t / k, kx = t % k;
              double dy = double(off.at(n, (g * k2 + t) * 2, oy, ox));
              double dx = double(off.at(n, (g * k2 + t) * 2 + 1, oy, ox));
              double m = mod ? double(mod->at(n, g * k2 + t, oy, ox)) : 1.0;
              double v = double(
                  bilinear_zero_pad(x, n, ic, oy - pad + ky + dy, ox - pad + kx + dx));
              acc += double(w.at(oc, ic, ky, kx)) * m * v;
            }
          }
          out.at(n, oc, oy, ox) = T(acc);
        }
  return out;
}

template <typename T>
Tensor<T> bilinear_upsample(const Tensor<T>& x, int factor) {
  const Shape& s = x.shape;
  Tensor<T> out(Shape(s.n, s.c, s.h * factor, s.w * factor));
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h * factor; ++y)
        for (int x2 = 0; x2 < s.w * factor; ++x2) {
          double sy = (y + 0.5) / factor - 0.5;
          double sx = (x2 + 0.5) / factor - 0.5;
          int y0 = int(std::floor(sy)), x0 = int(std::floor(sx));
          double fy = sy - y0, fx = sx - x0;
          double v = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              double wgt = (a ? fy : 1 - fy) * (b ? fx : 1 - fx);
              v += wgt * double(x.at(n, c, clampi(y0 + a, s.h - 1), clampi(x0 + b, s.w - 1)));
            }
          out.at(n, c, y, x2) = T(v);
        }
  return out;
}

inline double cubic_keys(double t) {
  constexpr double a = -0.5;
  t = std::fabs(t);
  if (t <= 1.0) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
  if (t < 2.0) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
  return 0.0;
}

// one axis of the antialiased bicubic at a single output index
inline double bicubic_axis_sample(const std::vector<double>& row, int in, int o, int out) {
  double scale = double(in) / out;
  double support = scale > 1.0 ? 2.0 * scale : 2.0;
  double center = (o + 0.5) * scale - 0.5;
  double acc = 0.0, wsum = 0.0;
  for (int j = int(std::ceil(center - support)); j <= int(std::floor(center + support)); ++j) {
    double wv = cubic_keys((j - center) / (scale > 1.0 ? scale : 1.0));
    int idx = std::min(in - 1, std::max(0, j));
    acc += wv * row[size_t(idx)];
    wsum += wv;
  }
  return acc / wsum;
}

template <typename T>
Tensor<T> bicubic_downscale(const Tensor<T>& x, int scale) {
  const Shape& s = x.shape;
  const int oh = s.h / scale, ow = s.w / scale;
  Tensor<T> out(Shape(s.n, s.c, oh, ow));
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      // horizontal then vertical, recomputing weights per output pixel
      std::vector<std::vector<double>> tmp(size_t(s.h), std::vector<double>(size_t(ow)));
      for (int y = 0; y < s.h; ++y) {
        std::vector<double> row(size_t(s.w));
        for (int xx = 0; xx < s.w; ++xx) row[size_t(xx)] = double(x.at(n, c, y, xx));
        for (int o = 0; o < ow; ++o) tmp[size_t(y)][size_t(o)] = bicubic_axis_sample(row, s.w, o, ow);
      }
      for (int o = 0; o < oh; ++o)
        for (int xx = 0; xx < ow; ++xx) {
          std::vector<double> col(size_t(s.h));
          for (int y = 0; y < s.h; ++y) col[size_t(y)] = tmp[size_t(y)][size_t(xx)];
          double v = bicubic_axis_sample(col, s.h, o, oh);
          out.at(n, c, o, xx) = T(std::min(1.0, std::max(0.0, v)));
        }
    }
  return out;
}

// direct windowed SSIM on one plane of 0..255 values
inline double ssim_direct(const std::vector<double>& a, const std::vector<double>& b,
                          int h, int w) {
  constexpr int win = 11;
  constexpr double sigma = 1.5;
  constexpr double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
  double g[win][win];
  double gsum = 0.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      double dy = i - 5.0, dx = j - 5.0;
      g[i][j] = std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma));
      gsum += g[i][j];
    }
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) g[i][j] /= gsum;

  double total = 0.0;
  int count = 0;
  for (int y = 0; y + win <= h; ++y)
    for (int x = 0; x + win <= w; ++x) {
      double mx = 0, my = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          mx += g[i][j] * a[size_t(y + i) * w + (x + j)];
          my += g[i][j] * b[size_t(y + i) * w + (x + j)];
        }
      double sx = 0, sy = 0, sxy = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          double da = a[size_t(y + i) * w + (x + j)] - mx;
          double db = b[size_t(y + i) * w + (x + j)] - my;
          sx += g[i][j] * da * da;
          sy += g[i][j] * db * db;
          sxy += g[i][j] * da * db;
        }
      total += ((2 * mx * my + c1) * (2 * sxy + c2)) /
               ((mx * mx + my * my + c1) * (sx + sy + c2));
      ++count;
    }
  return total / count;
}

inline double ie_direct(const std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b) {
  double acc = 0.0;
  for (size_t c = 0; c < a.size(); ++c) {
    double se = 0.0;
    for (size_t i = 0; i < a[c].size(); ++i) {
      double d = a[c][i] - b[c][i];
      se += d * d;
    }
    acc += std::sqrt(se / double(a[c].size()));
  }
  return acc / double(a.size());
}

// scalar AdaMax reference
struct AdamaxScalar {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double m = 0.0, u = 0.0;
  int t = 0;
  double step(double theta, double g, double lr) {
    ++t;
    m = beta1 * m + (1 - beta1) * g;
    u = std::max(beta2 * u, std::fabs(g));
    return theta - lr / (1 - std::pow(beta1, t)) * m / (u + eps);
  }
};

}  // namespace oracle
