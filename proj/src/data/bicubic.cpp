#include "data/bicubic.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace stvsr {
namespace data {

namespace {

constexpr double kA = -0.5;

double cubic_kernel(double t) {
  t = std::fabs(t);
  if (t <= 1.0) return (kA + 2.0) * t * t * t - (kA + 3.0) * t * t + 1.0;
  if (t < 2.0) return kA * t * t * t - 5.0 * kA * t * t + 8.0 * kA * t - 4.0 * kA;
  return 0.0;
}

struct TapSet {
  int first;
  std::vector<double> w;  // normalized
};

// One output coordinate along an axis of length `in`, mapping half-pixel
// centers; support widens by `scale` when scale > 1 (downscale + antialias).
std::vector<TapSet> make_taps(int in, int out) {
  double scale = double(in) / double(out);
  double support = scale > 1.0 ? 2.0 * scale : 2.0;
  std::vector<TapSet> taps(static_cast<size_t>(out));
  for (int o = 0; o < out; ++o) {
    double center = (o + 0.5) * scale - 0.5;
    int lo = int(std::ceil(center - support));
    int hi = int(std::floor(center + support));
    TapSet& t = taps[size_t(o)];
    t.first = lo;
    t.w.resize(size_t(hi - lo + 1));
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) {
      double arg = (j - center) / (scale > 1.0 ? scale : 1.0);
      double wv = cubic_kernel(arg);
      t.w[size_t(j - lo)] = wv;
      sum += wv;
    }
    for (double& wv : t.w) wv /= sum;
  }
  return taps;
}

}  // namespace

template <typename T>
Tensor<T> resize_bicubic(const Tensor<T>& src, int out_h, int out_w) {
  const Shape& s = src.shape;
  if (out_h < 1 || out_w < 1) throw ConfigError("resize_bicubic: bad output size");
  auto taps_y = make_taps(s.h, out_h);
  auto taps_x = make_taps(s.w, out_w);

  // horizontal pass, then vertical, accumulating in double
  Tensor<T> out(Shape(s.n, s.c, out_h, out_w));
  out.domain = src.domain;
  std::vector<double> tmp(size_t(s.h) * out_w);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const T* plane = src.plane(n, c);
      for (int y = 0; y < s.h; ++y) {
        const T* row = plane + int64_t(y) * s.w;
        for (int x = 0; x < out_w; ++x) {
          const TapSet& t = taps_x[size_t(x)];
          double acc = 0.0;
          for (size_t j = 0; j < t.w.size(); ++j) {
            int sx = std::clamp(t.first + int(j), 0, s.w - 1);
            acc += t.w[j] * double(row[sx]);
          }
          tmp[size_t(y) * out_w + x] = acc;
        }
      }
      T* dst = out.plane(n, c);
      for (int y = 0; y < out_h; ++y) {
        const TapSet& t = taps_y[size_t(y)];
        for (int x = 0; x < out_w; ++x) {
          double acc = 0.0;
          for (size_t j = 0; j < t.w.size(); ++j) {
            int sy = std::clamp(t.first + int(j), 0, s.h - 1);
            acc += t.w[j] * tmp[size_t(sy) * out_w + x];
          }
          dst[int64_t(y) * out_w + x] = T(acc);
        }
      }
    }
  return out;
}

template <typename T>
Tensor<T> degrade_bicubic(const Tensor<T>& frame, int scale) {
  const Shape& s = frame.shape;
  if (scale < 1) throw ConfigError("degrade_bicubic: scale must be >= 1");
  if (s.h % scale != 0 || s.w % scale != 0)
    throw ConfigError("degrade_bicubic: dims " + s.str() + " not divisible by scale " +
                      std::to_string(scale));
  Tensor<T> out = resize_bicubic(frame, s.h / scale, s.w / scale);
  for (T& x : out.v) x = std::min(T(1), std::max(T(0), x));
  out.domain = ValueDomain::pixel_unit;
  return out;
}

template <typename T>
Tensor<T> upscale_bicubic(const Tensor<T>& frame, int scale) {
  const Shape& s = frame.shape;
  if (scale < 1) throw ConfigError("upscale_bicubic: scale must be >= 1");
  return resize_bicubic(frame, s.h * scale, s.w * scale);
}

template Tensor<float> resize_bicubic(const Tensor<float>&, int, int);
template Tensor<double> resize_bicubic(const Tensor<double>&, int, int);
template Tensor<float> degrade_bicubic(const Tensor<float>&, int);
template Tensor<double> degrade_bicubic(const Tensor<double>&, int);
template Tensor<float> upscale_bicubic(const Tensor<float>&, int);
template Tensor<double> upscale_bicubic(const Tensor<double>&, int);

}  // namespace data
}  // namespace stvsr
