#pragma once

#include "model/config.h"
#include "model/modules.h"

namespace stvsr {
namespace model {

// Per-iteration intermediates of the projection cycle, kept as live tape nodes
// so the residual identities can be checked on the exact tensors and feature
// maps can be dumped for inspection.
template <typename T>
struct ProjectionTrace {
  struct UpuRecord {
    VarTriplet<T> u, e, h;
  };
  struct DpuRecord {
    VarTriplet<T> d, e_hr, l;
  };
  std::vector<UpuRecord> upu;  // M records
  std::vector<DpuRecord> dpu;  // M-1 records
};

// Up-projection: u = UP0(l); e = DN(u) - l; h = UP1(e) + u.
template <typename T>
struct Upu {
  ScaleUp<T> up0, up1;
  ScaleDown<T> dn;
  static Upu make(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg);
  VarTriplet<T> operator()(const VarTriplet<T>& l, ProjectionTrace<T>* trace) const;
};

// Down-projection mirror: d = DN0(h); e_hr = UP(d) - h; l = DN1(e_hr) + d.
template <typename T>
struct Dpu {
  ScaleDown<T> dn0, dn1;
  ScaleUp<T> up;
  static Dpu make(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg);
  VarTriplet<T> operator()(const VarTriplet<T>& h, ProjectionTrace<T>* trace) const;
};

template <typename T>
struct CycleOut {
  std::vector<VarTriplet<T>> hr_reps;  // h^1 .. h^M
  std::vector<VarTriplet<T>> lr_reps;  // l^0 .. l^(M-1)
  ProjectionTrace<T> trace;
};

// Alternates UPU_1, DPU_1, ..., DPU_(M-1), UPU_M. Units are not weight-shared.
template <typename T>
struct MutualCycle {
  std::vector<Upu<T>> upus;
  std::vector<Dpu<T>> dpus;
  static MutualCycle make(ParamStore<T>& ps, const std::string& name,
                          const ModelConfig& cfg);
  CycleOut<T> operator()(const VarTriplet<T>& l0) const;
};

extern template struct Upu<float>;
extern template struct Upu<double>;
extern template struct Dpu<float>;
extern template struct Dpu<double>;
extern template struct MutualCycle<float>;
extern template struct MutualCycle<double>;

}  // namespace model
}  // namespace stvsr
