#pragma once

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stvsr {

// Thrown on contract violations in module/op configuration (bad shapes,
// invalid hyperparameters, malformed files). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when training hits a non-finite loss or gradient. Exit code 3.
class TrainAbort : public std::runtime_error {
 public:
  explicit TrainAbort(const std::string& msg) : std::runtime_error(msg) {}
};

enum class ValueDomain { feature, pixel_unit };

struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  Shape() = default;
  Shape(int n_, int c_, int h_, int w_) : n(n_), c(c_), h(h_), w(w_) {}
  static Shape chw(int c_, int h_, int w_) { return Shape(1, c_, h_, w_); }

  int64_t numel() const {
    return int64_t(n) * c * h * w;
  }
  bool operator==(const Shape& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }
  std::string str() const;
};

// Dense row-major [n, c, h, w] tensor. Frames are n == 1 with a value-domain
// tag; feature maps and batches use the same storage.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape s, T fill = T(0)) : shape(s), v(size_t(s.numel()), fill) {}

  static Tensor zeros(Shape s) { return Tensor(s, T(0)); }
  static Tensor full(Shape s, T value) { return Tensor(s, value); }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
  int64_t numel() const { return shape.numel(); }
  bool empty() const { return v.empty(); }

  int64_t index(int n, int c, int y, int x) const {
    return ((int64_t(n) * shape.c + c) * shape.h + y) * shape.w + x;
  }
  T& at(int n, int c, int y, int x) { return v[index(n, c, y, x)]; }
  T at(int n, int c, int y, int x) const { return v[index(n, c, y, x)]; }

  // channel plane of item n
  T* plane(int n, int c) { return v.data() + index(n, c, 0, 0); }
  const T* plane(int n, int c) const { return v.data() + index(n, c, 0, 0); }

  void fill(T value) { std::fill(v.begin(), v.end(), value); }
  bool all_finite() const;
  T min() const;
  T max() const;
  double sum() const;  // accumulated in double

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape);
    for (int64_t i = 0; i < numel(); ++i) out.v[size_t(i)] = U(v[size_t(i)]);
    out.domain = domain;
    return out;
  }

  Shape shape;
  ValueDomain domain = ValueDomain::feature;
  std::vector<T> v;
};

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape != b.shape)
    throw ConfigError(std::string(what) + ": shape mismatch " + a.shape.str() +
                      " vs " + b.shape.str());
}

// value-level helpers used by the data pipeline and metrics
template <typename T>
Tensor<T> flip_horizontal(const Tensor<T>& t);
template <typename T>
Tensor<T> flip_vertical(const Tensor<T>& t);
template <typename T>
Tensor<T> clamp01(const Tensor<T>& t);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace stvsr
