#include "core/tensor.h"

#include <algorithm>
#include <cmath>

namespace stvsr {

std::string Shape::str() const {
  return "[" + std::to_string(n) + "," + std::to_string(c) + "," +
         std::to_string(h) + "," + std::to_string(w) + "]";
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (const T& x : v)
    if (!std::isfinite(double(x))) return false;
  return true;
}

template <typename T>
T Tensor<T>::min() const {
  return v.empty() ? T(0) : *std::min_element(v.begin(), v.end());
}

template <typename T>
T Tensor<T>::max() const {
  return v.empty() ? T(0) : *std::max_element(v.begin(), v.end());
}

template <typename T>
double Tensor<T>::sum() const {
  double s = 0.0;
  for (const T& x : v) s += double(x);
  return s;
}

template <typename T>
Tensor<T> flip_horizontal(const Tensor<T>& t) {
  Tensor<T> out(t.shape);
  out.domain = t.domain;
  const Shape& s = t.shape;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x)
          out.at(n, c, y, x) = t.at(n, c, y, s.w - 1 - x);
  return out;
}

template <typename T>
Tensor<T> flip_vertical(const Tensor<T>& t) {
  Tensor<T> out(t.shape);
  out.domain = t.domain;
  const Shape& s = t.shape;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x)
          out.at(n, c, y, x) = t.at(n, c, s.h - 1 - y, x);
  return out;
}

template <typename T>
Tensor<T> clamp01(const Tensor<T>& t) {
  Tensor<T> out = t;
  for (T& x : out.v) x = std::min(T(1), std::max(T(0), x));
  return out;
}

template class Tensor<float>;
template class Tensor<double>;

template Tensor<float> flip_horizontal(const Tensor<float>&);
template Tensor<double> flip_horizontal(const Tensor<double>&);
template Tensor<float> flip_vertical(const Tensor<float>&);
template Tensor<double> flip_vertical(const Tensor<double>&);
template Tensor<float> clamp01(const Tensor<float>&);
template Tensor<double> clamp01(const Tensor<double>&);

}  // namespace stvsr
