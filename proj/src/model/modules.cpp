#include "model/modules.h"

#include <cmath>

namespace stvsr {
namespace model {

template <typename T>
Var<T> ParamStore<T>::create(const std::string& name, Shape shape, Init init) {
  if (params_.count(name)) throw ConfigError("ParamStore: duplicate parameter '" + name + "'");
  Tensor<T> t(shape);
  if (init != Init::zero) {
    auto rng = make_rng(derive_seed(seed_, name));
    // fan-in over everything but the leading (output) dim
    double fan_in = double(shape.c) * shape.h * shape.w;
    double stddev = std::sqrt(2.0 / fan_in);
    if (init == Init::he_residual) stddev *= 0.1;
    std::normal_distribution<double> dist{0.0, stddev};
    for (T& x : t.v) x = T(dist(rng));
  }
  Var<T> v = make_leaf<T>(std::move(t), /*requires_grad=*/true);
  params_[name] = v;
  return v;
}

template <typename T>
Var<T> ParamStore<T>::find(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("ParamStore: no parameter '" + name + "'");
  return it->second;
}

template <typename T>
int64_t ParamStore<T>::total_params() const {
  int64_t total = 0;
  for (const auto& [name, v] : params_) total += v->value.numel();
  return total;
}

template <typename T>
void ParamStore<T>::zero_grads() {
  for (auto& [name, v] : params_) v->clear_grad();
}

template <typename T>
Conv2dLayer<T> Conv2dLayer<T>::make(ParamStore<T>& ps, const std::string& name, int ic,
                                    int oc, int k, int stride, int pad, Init init) {
  Conv2dLayer<T> l;
  l.stride = stride;
  l.pad = pad;
  l.w = ps.create(name + ".w", Shape(oc, ic, k, k), init);
  l.b = ps.create(name + ".b", Shape(1, oc, 1, 1), Init::zero);
  return l;
}

template <typename T>
ResBlock<T> ResBlock<T>::make(ParamStore<T>& ps, const std::string& name, int c) {
  ResBlock<T> r;
  r.c1 = Conv2dLayer<T>::make(ps, name + ".c1", c, c, 3, 1, 1);
  r.c2 = Conv2dLayer<T>::make(ps, name + ".c2", c, c, 3, 1, 1, Init::he_residual);
  return r;
}

template <typename T>
Var<T> ResBlock<T>::operator()(Var<T> x) const {
  return ops::add(x, c2(ops::leaky_relu(c1(x), T(kLeakySlope))));
}

template <typename T>
FusionResblock<T> FusionResblock<T>::make(ParamStore<T>& ps, const std::string& name,
                                          int c) {
  FusionResblock<T> f;
  f.fuse = Conv2dLayer<T>::make(ps, name + ".fuse", 3 * c, 3 * c, 1, 1, 0);
  for (int i = 0; i < 3; ++i)
    f.frame[i] = Conv2dLayer<T>::make(ps, name + ".f" + std::to_string(i), c, c, 3, 1, 1,
                                      Init::he_residual);
  return f;
}

template <typename T>
VarTriplet<T> FusionResblock<T>::operator()(const VarTriplet<T>& t) const {
  const int c = t.f0->value.shape.c;
  Var<T> mixed = ops::leaky_relu(fuse(ops::concat_c<T>({t.f0, t.ft, t.f1})), T(kLeakySlope));
  VarTriplet<T> out;
  out.f0 = ops::add(t.f0, frame[0](ops::slice_c(mixed, 0, c)));
  out.ft = ops::add(t.ft, frame[1](ops::slice_c(mixed, c, c)));
  out.f1 = ops::add(t.f1, frame[2](ops::slice_c(mixed, 2 * c, c)));
  return out;
}

template <typename T>
ScaleUp<T> ScaleUp<T>::make(ParamStore<T>& ps, const std::string& name, int c,
                            int n_blocks, Init post_init) {
  ScaleUp<T> s;
  for (int i = 0; i < n_blocks; ++i)
    s.blocks.push_back(FusionResblock<T>::make(ps, name + ".frb" + std::to_string(i), c));
  s.post = Conv2dLayer<T>::make(ps, name + ".post", c, c, 1, 1, 0, post_init);
  return s;
}

template <typename T>
VarTriplet<T> ScaleUp<T>::operator()(VarTriplet<T> t) const {
  for (const auto& b : blocks) t = b(t);
  auto up = [&](Var<T> f) {
    return ops::leaky_relu(post(ops::bilinear_upsample(f, 2)), T(kLeakySlope));
  };
  return {up(t.f0), up(t.ft), up(t.f1)};
}

template <typename T>
ScaleDown<T> ScaleDown<T>::make(ParamStore<T>& ps, const std::string& name, int c,
                                int n_blocks, Init pre_init) {
  ScaleDown<T> s;
  s.pre = Conv2dLayer<T>::make(ps, name + ".pre", c, c, 4, 2, 1, pre_init);
  for (int i = 0; i < n_blocks; ++i)
    s.blocks.push_back(FusionResblock<T>::make(ps, name + ".frb" + std::to_string(i), c));
  return s;
}

template <typename T>
VarTriplet<T> ScaleDown<T>::operator()(VarTriplet<T> t) const {
  const Shape& s = t.f0->value.shape;
  if (s.h % 2 != 0 || s.w % 2 != 0)
    throw ConfigError("ScaleDown: spatial dims must be even, got " + s.str());
  auto dn = [&](Var<T> f) { return ops::leaky_relu(pre(f), T(kLeakySlope)); };
  t = {dn(t.f0), dn(t.ft), dn(t.f1)};
  for (const auto& b : blocks) t = b(t);
  return t;
}

template class ParamStore<float>;
template class ParamStore<double>;
template struct Conv2dLayer<float>;
template struct Conv2dLayer<double>;
template struct ResBlock<float>;
template struct ResBlock<double>;
template struct FusionResblock<float>;
template struct FusionResblock<double>;
template struct ScaleUp<float>;
template struct ScaleUp<double>;
template struct ScaleDown<float>;
template struct ScaleDown<double>;

}  // namespace model
}  // namespace stvsr
