#pragma once

#include <map>
#include <string>

#include "core/ops.h"
#include "core/rng.h"

namespace stvsr {
namespace model {

// he_residual shrinks the He std by 10x; used on the last conv of residual
// branches so activation variance stays bounded through deep unit chains.
enum class Init { he_normal, he_residual, zero };

// Owns the named trainable leaves. Each parameter is initialized from a stream
// derived from (seed, name), so values do not depend on registration order.
template <typename T>
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed) : seed_(seed) {}

  Var<T> create(const std::string& name, Shape shape, Init init);
  Var<T> find(const std::string& name) const;
  const std::map<std::string, Var<T>>& all() const { return params_; }
  int64_t total_params() const;
  void zero_grads();

 private:
  uint64_t seed_;
  std::map<std::string, Var<T>> params_;
};

template <typename T>
struct Conv2dLayer {
  Var<T> w, b;
  int stride = 1, pad = 0;

  static Conv2dLayer make(ParamStore<T>& ps, const std::string& name, int ic, int oc,
                          int k, int stride, int pad, Init init = Init::he_normal);
  Var<T> operator()(Var<T> x) const { return ops::conv2d(x, w, b, stride, pad); }
};

// The three time-indexed feature maps the projection cycle operates on.
template <typename T>
struct VarTriplet {
  Var<T> f0, ft, f1;
};

template <typename T>
struct ResBlock {
  Conv2dLayer<T> c1, c2;
  static ResBlock make(ParamStore<T>& ps, const std::string& name, int c);
  Var<T> operator()(Var<T> x) const;
};

// Cross-time mixing with per-frame identity paths: concat -> shared 1x1 fusion
// conv -> split -> per-frame 3x3 conv -> residual add.
template <typename T>
struct FusionResblock {
  Conv2dLayer<T> fuse;
  Conv2dLayer<T> frame[3];
  static FusionResblock make(ParamStore<T>& ps, const std::string& name, int c);
  VarTriplet<T> operator()(const VarTriplet<T>& t) const;
};

// N fusion resblocks, then per-frame bilinear x2 upsample + shared 1x1 conv.
template <typename T>
struct ScaleUp {
  std::vector<FusionResblock<T>> blocks;
  Conv2dLayer<T> post;
  static ScaleUp make(ParamStore<T>& ps, const std::string& name, int c, int n_blocks,
                      Init post_init = Init::he_normal);
  VarTriplet<T> operator()(VarTriplet<T> t) const;
};

// Per-frame shared 4x4 stride-2 conv back to half resolution, then N fusion
// resblocks. Rejects odd spatial dims.
template <typename T>
struct ScaleDown {
  Conv2dLayer<T> pre;
  std::vector<FusionResblock<T>> blocks;
  static ScaleDown make(ParamStore<T>& ps, const std::string& name, int c, int n_blocks,
                        Init pre_init = Init::he_normal);
  VarTriplet<T> operator()(VarTriplet<T> t) const;
};

constexpr double kLeakySlope = 0.1;

extern template class ParamStore<float>;
extern template class ParamStore<double>;
extern template struct Conv2dLayer<float>;
extern template struct Conv2dLayer<double>;
extern template struct ResBlock<float>;
extern template struct ResBlock<double>;
extern template struct FusionResblock<float>;
extern template struct FusionResblock<double>;
extern template struct ScaleUp<float>;
extern template struct ScaleUp<double>;
extern template struct ScaleDown<float>;
extern template struct ScaleDown<double>;

}  // namespace model
}  // namespace stvsr
