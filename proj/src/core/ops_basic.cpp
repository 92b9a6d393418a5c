#include <cmath>

#include "core/ops.h"

namespace stvsr {
namespace ops {

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  check_same_shape(a->value, b->value, "add");
  Tensor<T> out = a->value;
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] += pb[i];
  return make_node<T>(std::move(out), "add", {a, b}, [](Node<T>& n) {
    for (int k = 0; k < 2; ++k) {
      auto& in = n.inputs[k];
      if (!in->requires_grad) continue;
      T* g = in->ensure_grad().data();
      const T* go = n.grad.data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) g[i] += go[i];
    }
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  check_same_shape(a->value, b->value, "sub");
  Tensor<T> out = a->value;
  const T* pb = b->value.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] -= pb[i];
  return make_node<T>(std::move(out), "sub", {a, b}, [](Node<T>& n) {
    const T* go = n.grad.data();
    if (n.inputs[0]->requires_grad) {
      T* g = n.inputs[0]->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) g[i] += go[i];
    }
    if (n.inputs[1]->requires_grad) {
      T* g = n.inputs[1]->ensure_grad().data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) g[i] -= go[i];
    }
  });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  Tensor<T> out = a->value;
  for (T& x : out.v) x *= s;
  return make_node<T>(std::move(out), "scale", {a}, [s](Node<T>& n) {
    if (!n.inputs[0]->requires_grad) return;
    T* g = n.inputs[0]->ensure_grad().data();
    const T* go = n.grad.data();
    for (int64_t i = 0; i < n.grad.numel(); ++i) g[i] += s * go[i];
  });
}

template <typename T>
Var<T> leaky_relu(Var<T> a, T neg_slope) {
  Tensor<T> out = a->value;
  for (T& x : out.v) x = x >= T(0) ? x : neg_slope * x;
  return make_node<T>(std::move(out), "leaky_relu", {a}, [neg_slope](Node<T>& n) {
    if (!n.inputs[0]->requires_grad) return;
    T* g = n.inputs[0]->ensure_grad().data();
    const T* go = n.grad.data();
    const T* xin = n.inputs[0]->value.data();
    for (int64_t i = 0; i < n.grad.numel(); ++i)
      g[i] += (xin[i] >= T(0) ? T(1) : neg_slope) * go[i];
  });
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  Tensor<T> out = a->value;
  for (T& x : out.v) x = T(1) / (T(1) + std::exp(-x));
  return make_node<T>(std::move(out), "sigmoid", {a}, [](Node<T>& n) {
    if (!n.inputs[0]->requires_grad) return;
    T* g = n.inputs[0]->ensure_grad().data();
    const T* go = n.grad.data();
    const T* y = n.value.data();
    for (int64_t i = 0; i < n.grad.numel(); ++i) g[i] += y[i] * (T(1) - y[i]) * go[i];
  });
}

template <typename T>
Var<T> concat_c(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw ConfigError("concat_c: empty input list");
  Shape s0 = xs[0]->value.shape;
  int ctot = 0;
  for (const auto& x : xs) {
    const Shape& s = x->value.shape;
    if (s.n != s0.n || s.h != s0.h || s.w != s0.w)
      throw ConfigError("concat_c: incompatible shapes " + s.str() + " vs " + s0.str());
    ctot += s.c;
  }
  Tensor<T> out(Shape(s0.n, ctot, s0.h, s0.w));
  int64_t plane = int64_t(s0.h) * s0.w;
  for (int n = 0; n < s0.n; ++n) {
    int coff = 0;
    for (const auto& x : xs) {
      const Shape& s = x->value.shape;
      std::copy_n(x->value.plane(n, 0), int64_t(s.c) * plane, out.plane(n, coff));
      coff += s.c;
    }
  }
  std::vector<Var<T>> inputs(xs.begin(), xs.end());
  return make_node<T>(std::move(out), "concat_c", std::move(inputs), [plane](Node<T>& n) {
    const Shape& so = n.value.shape;
    for (int b = 0; b < so.n; ++b) {
      int coff = 0;
      for (auto& in : n.inputs) {
        const Shape& s = in->value.shape;
        if (in->requires_grad) {
          T* g = in->ensure_grad().plane(b, 0);
          const T* go = n.grad.plane(b, coff);
          for (int64_t i = 0; i < int64_t(s.c) * plane; ++i) g[i] += go[i];
        }
        coff += s.c;
      }
    }
  });
}

template <typename T>
Var<T> slice_c(Var<T> x, int c0, int len) {
  const Shape& s = x->value.shape;
  if (c0 < 0 || len < 1 || c0 + len > s.c)
    throw ConfigError("slice_c: range out of bounds");
  Tensor<T> out(Shape(s.n, len, s.h, s.w));
  int64_t plane = int64_t(s.h) * s.w;
  for (int n = 0; n < s.n; ++n)
    std::copy_n(x->value.plane(n, c0), int64_t(len) * plane, out.plane(n, 0));
  return make_node<T>(std::move(out), "slice_c", {x}, [c0, len, plane](Node<T>& n) {
    auto& in = n.inputs[0];
    if (!in->requires_grad) return;
    Tensor<T>& g = in->ensure_grad();
    for (int b = 0; b < n.value.shape.n; ++b) {
      T* gp = g.plane(b, c0);
      const T* go = n.grad.plane(b, 0);
      for (int64_t i = 0; i < int64_t(len) * plane; ++i) gp[i] += go[i];
    }
  });
}

template <typename T>
Var<T> mean_flow(Var<T> offsets) {
  const Shape& s = offsets->value.shape;
  if (s.c % 2 != 0) throw ConfigError("mean_flow: offset channels must be even");
  int pairs = s.c / 2;
  Tensor<T> out(Shape(s.n, 2, s.h, s.w));
  int64_t plane = int64_t(s.h) * s.w;
  for (int n = 0; n < s.n; ++n)
    for (int p = 0; p < pairs; ++p)
      for (int d = 0; d < 2; ++d) {
        const T* src = offsets->value.plane(n, 2 * p + d);
        T* dst = out.plane(n, d);
        for (int64_t i = 0; i < plane; ++i) dst[i] += src[i];
      }
  T inv = T(1) / T(pairs);
  for (T& x : out.v) x *= inv;
  return make_node<T>(std::move(out), "mean_flow", {offsets}, [pairs, plane, inv](Node<T>& n) {
    auto& in = n.inputs[0];
    if (!in->requires_grad) return;
    Tensor<T>& g = in->ensure_grad();
    for (int b = 0; b < n.value.shape.n; ++b)
      for (int p = 0; p < pairs; ++p)
        for (int d = 0; d < 2; ++d) {
          T* gp = g.plane(b, 2 * p + d);
          const T* go = n.grad.plane(b, d);
          for (int64_t i = 0; i < plane; ++i) gp[i] += inv * go[i];
        }
  });
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> softmax2_weights(const Tensor<T>& logit_f,
                                                 const Tensor<T>& logit_b) {
  Tensor<T> sf(logit_f.shape), sb(logit_f.shape);
  for (int64_t i = 0; i < logit_f.numel(); ++i) {
    T s = T(1) / (T(1) + std::exp(-(logit_f.v[size_t(i)] - logit_b.v[size_t(i)])));
    sf.v[size_t(i)] = s;
    sb.v[size_t(i)] = T(1) - s;
  }
  return {sf, sb};
}

template <typename T>
Var<T> blend_softmax(Var<T> phi_f, Var<T> phi_b, Var<T> logit_f, Var<T> logit_b) {
  check_same_shape(phi_f->value, phi_b->value, "blend_softmax");
  check_same_shape(logit_f->value, logit_b->value, "blend_softmax logits");
  const Shape& s = phi_f->value.shape;
  const Shape& ls = logit_f->value.shape;
  if (ls.n != s.n || ls.c != 1 || ls.h != s.h || ls.w != s.w)
    throw ConfigError("blend_softmax: logits must be [n,1,h,w] matching features");

  auto [sf, sb] = softmax2_weights(logit_f->value, logit_b->value);
  Tensor<T> out(s);
  int64_t plane = int64_t(s.h) * s.w;
  for (int n = 0; n < s.n; ++n) {
    const T* w = sf.plane(n, 0);
    for (int c = 0; c < s.c; ++c) {
      const T* pf = phi_f->value.plane(n, c);
      const T* pb = phi_b->value.plane(n, c);
      T* po = out.plane(n, c);
      for (int64_t i = 0; i < plane; ++i) po[i] = w[i] * pf[i] + (T(1) - w[i]) * pb[i];
    }
  }
  Tensor<T> sf_saved = sf;
  return make_node<T>(
      std::move(out), "blend_softmax", {phi_f, phi_b, logit_f, logit_b},
      [sf_saved, plane](Node<T>& n) {
        const Shape& s = n.value.shape;
        auto& phi_f = n.inputs[0];
        auto& phi_b = n.inputs[1];
        auto& logit_f = n.inputs[2];
        auto& logit_b = n.inputs[3];
        bool need_l = logit_f->requires_grad || logit_b->requires_grad;
        for (int b = 0; b < s.n; ++b) {
          const T* w = sf_saved.plane(b, 0);
          for (int c = 0; c < s.c; ++c) {
            const T* go = n.grad.plane(b, c);
            if (phi_f->requires_grad) {
              T* g = phi_f->ensure_grad().plane(b, c);
              for (int64_t i = 0; i < plane; ++i) g[i] += w[i] * go[i];
            }
            if (phi_b->requires_grad) {
              T* g = phi_b->ensure_grad().plane(b, c);
              for (int64_t i = 0; i < plane; ++i) g[i] += (T(1) - w[i]) * go[i];
            }
          }
          if (need_l) {
            // d out / d logit_f = s(1-s) * (phi_f - phi_b), summed over channels
            T* glf = logit_f->requires_grad ? logit_f->ensure_grad().plane(b, 0) : nullptr;
            T* glb = logit_b->requires_grad ? logit_b->ensure_grad().plane(b, 0) : nullptr;
            for (int64_t i = 0; i < plane; ++i) {
              T acc = T(0);
              for (int c = 0; c < s.c; ++c) {
                const T* go = n.grad.plane(b, c);
                acc += go[i] * (phi_f->value.plane(b, c)[i] - phi_b->value.plane(b, c)[i]);
              }
              T dw = w[i] * (T(1) - w[i]) * acc;
              if (glf) glf[i] += dw;
              if (glb) glb[i] -= dw;
            }
          }
        }
      });
}

template <typename T>
Var<T> charbonnier(Var<T> pred, const Tensor<T>& target, T omega) {
  check_same_shape(pred->value, target, "charbonnier");
  const int64_t count = pred->value.numel();
  double acc = 0.0;
  const T* p = pred->value.data();
  const T* t = target.data();
  for (int64_t i = 0; i < count; ++i) {
    T d = p[i] - t[i];
    acc += std::sqrt(double(d) * double(d) + double(omega) * double(omega));
  }
  Tensor<T> out(Shape(1, 1, 1, 1));
  out.v[0] = T(acc / double(count));
  Tensor<T> target_copy = target;
  return make_node<T>(std::move(out), "charbonnier", {pred},
                      [target_copy, omega, count](Node<T>& n) {
                        auto& in = n.inputs[0];
                        if (!in->requires_grad) return;
                        T* g = in->ensure_grad().data();
                        const T* p = in->value.data();
                        const T* t = target_copy.data();
                        T go = n.grad.v[0] / T(count);
                        for (int64_t i = 0; i < count; ++i) {
                          T d = p[i] - t[i];
                          g[i] += go * d / std::sqrt(d * d + omega * omega);
                        }
                      });
}

template <typename T>
Var<T> add_weighted(const std::vector<Var<T>>& scalars, const std::vector<T>& weights) {
  if (scalars.empty() || scalars.size() != weights.size())
    throw ConfigError("add_weighted: size mismatch");
  Tensor<T> out(Shape(1, 1, 1, 1));
  T acc = T(0);
  for (size_t i = 0; i < scalars.size(); ++i) acc += weights[i] * scalars[i]->value.v[0];
  out.v[0] = acc;
  std::vector<Var<T>> inputs(scalars.begin(), scalars.end());
  std::vector<T> w = weights;
  return make_node<T>(std::move(out), "add_weighted", std::move(inputs), [w](Node<T>& n) {
    for (size_t i = 0; i < n.inputs.size(); ++i) {
      if (!n.inputs[i]->requires_grad) continue;
      n.inputs[i]->ensure_grad().v[0] += w[i] * n.grad.v[0];
    }
  });
}

template <typename T>
Var<T> sum_all(Var<T> x) {
  Tensor<T> out(Shape(1, 1, 1, 1));
  double acc = 0.0;
  for (const T& v : x->value.v) acc += double(v);
  out.v[0] = T(acc);
  return make_node<T>(std::move(out), "sum_all", {x}, [](Node<T>& n) {
    auto& in = n.inputs[0];
    if (!in->requires_grad) return;
    T* g = in->ensure_grad().data();
    T go = n.grad.v[0];
    for (int64_t i = 0; i < in->value.numel(); ++i) g[i] += go;
  });
}

#define INSTANTIATE_BASIC(T)                                                     \
  template Var<T> sum_all(Var<T>);                                              \
  template Var<T> add(Var<T>, Var<T>);                                          \
  template Var<T> sub(Var<T>, Var<T>);                                          \
  template Var<T> scale(Var<T>, T);                                             \
  template Var<T> leaky_relu(Var<T>, T);                                        \
  template Var<T> sigmoid(Var<T>);                                              \
  template Var<T> concat_c(const std::vector<Var<T>>&);                         \
  template Var<T> slice_c(Var<T>, int, int);                                    \
  template Var<T> mean_flow(Var<T>);                                            \
  template std::pair<Tensor<T>, Tensor<T>> softmax2_weights(const Tensor<T>&,   \
                                                            const Tensor<T>&);  \
  template Var<T> blend_softmax(Var<T>, Var<T>, Var<T>, Var<T>);                \
  template Var<T> charbonnier(Var<T>, const Tensor<T>&, T);                     \
  template Var<T> add_weighted(const std::vector<Var<T>>&, const std::vector<T>&);

INSTANTIATE_BASIC(float)
INSTANTIATE_BASIC(double)

}  // namespace ops
}  // namespace stvsr
