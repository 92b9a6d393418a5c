#pragma once

#include <functional>

#include "core/ops.h"
#include "core/rng.h"

namespace testutil {

using namespace stvsr;

template <typename T>
Tensor<T> random_uniform(Shape s, uint64_t seed, T lo, T hi) {
  Tensor<T> t(s);
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> dist{double(lo), double(hi)};
  for (T& x : t.v) x = T(dist(rng));
  return t;
}

template <typename T>
Tensor<T> random_normal(Shape s, uint64_t seed, T stddev) {
  Tensor<T> t(s);
  auto rng = make_rng(seed);
  std::normal_distribution<double> dist{0.0, double(stddev)};
  for (T& x : t.v) x = T(dist(rng));
  return t;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  double m = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::fabs(double(a.v[size_t(i)]) - double(b.v[size_t(i)])));
  return m;
}

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape != b.shape) return false;
  for (int64_t i = 0; i < a.numel(); ++i)
    if (a.v[size_t(i)] != b.v[size_t(i)]) return false;
  return true;
}

// Central-difference gradient check. `build` constructs the scalar loss from
// the leaves; analytic grads are compared at `samples` random coordinates per
// leaf. Returns the max relative error, with a floor on the denominator so
// near-zero gradients compare in absolute terms.
template <typename T>
double gradcheck(const std::function<Var<T>(std::vector<Var<T>>&)>& build,
                 std::vector<Tensor<T>> leaf_values, T step, int samples, uint64_t seed) {
  std::vector<Var<T>> leaves;
  for (auto& t : leaf_values) leaves.push_back(make_leaf(t, true));
  Var<T> loss = build(leaves);
  backward(loss);
  std::vector<Tensor<T>> analytic;
  double max_grad = 0.0;
  for (auto& l : leaves) {
    analytic.push_back(l->has_grad ? l->grad : Tensor<T>::zeros(l->value.shape));
    for (T g : analytic.back().v) max_grad = std::max(max_grad, std::fabs(double(g)));
  }
  const double denom_floor = std::max(1e-6, 1e-3 * max_grad);

  auto eval = [&](const std::vector<Tensor<T>>& vals) {
    std::vector<Var<T>> fresh;
    for (const auto& t : vals) fresh.push_back(make_leaf(t, false));
    return double(build(fresh)->value.v[0]);
  };

  auto rng = make_rng(seed);
  double max_rel = 0.0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    int64_t n = leaf_values[li].numel();
    for (int s = 0; s < samples; ++s) {
      int64_t idx = int64_t(rng() % uint64_t(n));
      std::vector<Tensor<T>> plus = leaf_values, minus = leaf_values;
      plus[li].v[size_t(idx)] += step;
      minus[li].v[size_t(idx)] -= step;
      double fd = (eval(plus) - eval(minus)) / (2.0 * double(step));
      double an = double(analytic[li].v[size_t(idx)]);
      double rel = std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), denom_floor});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace testutil
