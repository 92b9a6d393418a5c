#include "model/projection.h"

namespace stvsr {
namespace model {

namespace {

template <typename T>
VarTriplet<T> sub3(const VarTriplet<T>& a, const VarTriplet<T>& b) {
  return {ops::sub(a.f0, b.f0), ops::sub(a.ft, b.ft), ops::sub(a.f1, b.f1)};
}

template <typename T>
VarTriplet<T> add3(const VarTriplet<T>& a, const VarTriplet<T>& b) {
  return {ops::add(a.f0, b.f0), ops::add(a.ft, b.ft), ops::add(a.f1, b.f1)};
}

}  // namespace

template <typename T>
Upu<T> Upu<T>::make(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg) {
  Upu<T> u;
  u.up0 = ScaleUp<T>::make(ps, name + ".up0", cfg.channels, cfg.fusion_resblocks);
  u.dn = ScaleDown<T>::make(ps, name + ".dn", cfg.channels, cfg.fusion_resblocks);
  // the residual-correction branch starts small so unit chains stay bounded
  u.up1 = ScaleUp<T>::make(ps, name + ".up1", cfg.channels, cfg.fusion_resblocks,
                           Init::he_residual);
  return u;
}

template <typename T>
VarTriplet<T> Upu<T>::operator()(const VarTriplet<T>& l, ProjectionTrace<T>* trace) const {
  VarTriplet<T> u = up0(l);
  VarTriplet<T> e = sub3(dn(u), l);
  VarTriplet<T> h = add3(up1(e), u);
  if (trace) trace->upu.push_back({u, e, h});
  return h;
}

template <typename T>
Dpu<T> Dpu<T>::make(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg) {
  Dpu<T> d;
  d.dn0 = ScaleDown<T>::make(ps, name + ".dn0", cfg.channels, cfg.fusion_resblocks);
  d.up = ScaleUp<T>::make(ps, name + ".up", cfg.channels, cfg.fusion_resblocks);
  d.dn1 = ScaleDown<T>::make(ps, name + ".dn1", cfg.channels, cfg.fusion_resblocks,
                             Init::he_residual);
  return d;
}

template <typename T>
VarTriplet<T> Dpu<T>::operator()(const VarTriplet<T>& h, ProjectionTrace<T>* trace) const {
  VarTriplet<T> d = dn0(h);
  VarTriplet<T> e_hr = sub3(up(d), h);
  VarTriplet<T> l = add3(dn1(e_hr), d);
  if (trace) trace->dpu.push_back({d, e_hr, l});
  return l;
}

template <typename T>
MutualCycle<T> MutualCycle<T>::make(ParamStore<T>& ps, const std::string& name,
                                    const ModelConfig& cfg) {
  if (cfg.units < 1) throw ConfigError("MutualCycle: need at least one unit");
  MutualCycle<T> m;
  for (int i = 0; i < cfg.units; ++i)
    m.upus.push_back(Upu<T>::make(ps, name + ".upu" + std::to_string(i + 1), cfg));
  for (int i = 0; i + 1 < cfg.units; ++i)
    m.dpus.push_back(Dpu<T>::make(ps, name + ".dpu" + std::to_string(i + 1), cfg));
  return m;
}

template <typename T>
CycleOut<T> MutualCycle<T>::operator()(const VarTriplet<T>& l0) const {
  CycleOut<T> out;
  VarTriplet<T> l = l0;
  out.lr_reps.push_back(l0);
  const size_t m = upus.size();
  for (size_t i = 0; i < m; ++i) {
    VarTriplet<T> h = upus[i](l, &out.trace);
    out.hr_reps.push_back(h);
    if (i + 1 < m) {
      l = dpus[i](h, &out.trace);
      out.lr_reps.push_back(l);
    }
  }
  return out;
}

template struct Upu<float>;
template struct Upu<double>;
template struct Dpu<float>;
template struct Dpu<double>;
template struct MutualCycle<float>;
template struct MutualCycle<double>;

}  // namespace model
}  // namespace stvsr
