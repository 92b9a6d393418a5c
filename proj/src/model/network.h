#pragma once

#include <array>
#include <optional>

#include "model/fti.h"
#include "model/projection.h"
#include "model/reconstruction.h"

namespace stvsr {
namespace model {

template <typename T>
struct Outputs {
  Var<T> h0, ht, h1;  // at LR dims * scale
  Var<T> lt;          // at LR dims
  std::vector<VarTriplet<T>> hr_reps, lr_reps;
  ProjectionTrace<T> trace;
};

// Direct fusion interpolation (ablation variant a): the middle-frame features
// come from a plain conv stack over the concatenated endpoints, no motion
// estimation of any kind.
template <typename T>
struct FusionInterp {
  Conv2dLayer<T> c1, c2, c3;
  static FusionInterp make(ParamStore<T>& ps, const std::string& name,
                           const ModelConfig& cfg);
  Var<T> operator()(Var<T> feat0, Var<T> feat1) const;
};

// Constant-resolution refinement unit (ablation variant c).
template <typename T>
struct PlainUnit {
  std::vector<FusionResblock<T>> blocks;
  static PlainUnit make(ParamStore<T>& ps, const std::string& name, int c, int n_blocks);
  VarTriplet<T> operator()(VarTriplet<T> t) const;
};

template <typename T>
class Network {
 public:
  Network(const ModelConfig& cfg, uint64_t param_seed);

  // lr0, lr1: [n, 3, h, w] endpoint frames
  Outputs<T> forward(Var<T> lr0, Var<T> lr1) const;

  ParamStore<T>& params() { return store_; }
  const ParamStore<T>& params() const { return store_; }
  const ModelConfig& config() const { return cfg_; }

  const FeatureExtractor<T>& fe() const { return fe_; }
  const FtiNet<T>& fti() const { return *fti_; }
  const MutualCycle<T>& cycle() const { return *cycle_; }
  int plain_blocks() const { return plain_blocks_; }

 private:
  ModelConfig cfg_;
  ParamStore<T> store_;
  FeatureExtractor<T> fe_;
  std::optional<FtiNet<T>> fti_;
  std::optional<FusionInterp<T>> ffi_;
  std::optional<MutualCycle<T>> cycle_;
  std::vector<PlainUnit<T>> plain_;
  std::optional<Reconstruction<T>> rec_;
  int plain_blocks_ = 0;
};

// Closed-form trainable-parameter count for a configuration; cross-checked in
// tests against constructed networks.
int64_t count_params(const ModelConfig& cfg);

// Resblocks per plain unit that brings variant c closest to variant d's budget.
int choose_plain_blocks(const ModelConfig& cfg);

// Channel-mean of every traced feature map, min-max normalized, written as
// grayscale PNGs (item 0 of the batch).
void dump_trace(const ProjectionTrace<float>& trace, const std::string& dir);

extern template struct FusionInterp<float>;
extern template struct FusionInterp<double>;
extern template struct PlainUnit<float>;
extern template struct PlainUnit<double>;
extern template class Network<float>;
extern template class Network<double>;

}  // namespace model
}  // namespace stvsr
