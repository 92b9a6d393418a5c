#pragma once

#include "model/config.h"
#include "model/modules.h"

namespace stvsr {
namespace model {

// 3x3 conv into C channels followed by plain residual blocks (no norm).
template <typename T>
struct FeatureExtractor {
  Conv2dLayer<T> conv_in;
  std::vector<ResBlock<T>> blocks;
  static FeatureExtractor make(ParamStore<T>& ps, const std::string& name,
                               const ModelConfig& cfg);
  Var<T> operator()(Var<T> rgb) const;
};

template <typename T>
struct OffsetFieldVar {
  Var<T> offsets;     // [n, 2*taps*groups, h, w]
  Var<T> mod_logits;  // [n, taps*groups, h, w] or null
};

// Coarse-to-fine bidirectional offset estimation. Each level sees the two
// (warped) feature maps and predicts residual offsets for both directions; the
// final conv of every level is zero-initialized so estimation starts from the
// identity alignment.
template <typename T>
struct OffsetPyramid {
  struct Head {
    Conv2dLayer<T> c1, c2, c3;
  };
  std::vector<Conv2dLayer<T>> down;  // P-1 stride-2 convs shared by both frames
  std::vector<Head> heads;           // index 0 = finest level
  int levels = 1, taps = 9, groups = 1;
  bool modulation = true;

  static OffsetPyramid make(ParamStore<T>& ps, const std::string& name,
                            const ModelConfig& cfg);
  // returns (forward 0->t, backward 1->t)
  std::pair<OffsetFieldVar<T>, OffsetFieldVar<T>> operator()(Var<T> feat0,
                                                             Var<T> feat1) const;
};

// Deformable interpolation of the missing middle-frame features plus learned
// softmax blending of the forward/backward estimates.
template <typename T>
struct FtiNet {
  OffsetPyramid<T> pyramid;
  Conv2dLayer<T> deform_f, deform_b;  // weights consumed by deform_conv2d
  Conv2dLayer<T> blend_f, blend_b;    // per-pixel scalar logits
  int groups = 1;
  bool modulation = true;

  static FtiNet make(ParamStore<T>& ps, const std::string& name, const ModelConfig& cfg);

  // deformable interpolation with externally supplied offsets
  Var<T> interpolate(Var<T> feat0, Var<T> feat1, const OffsetFieldVar<T>& fwd,
                     const OffsetFieldVar<T>& bwd) const;
  // full path: estimate offsets, interpolate, blend
  Var<T> operator()(Var<T> feat0, Var<T> feat1) const;
};

extern template struct FeatureExtractor<float>;
extern template struct FeatureExtractor<double>;
extern template struct OffsetPyramid<float>;
extern template struct OffsetPyramid<double>;
extern template struct FtiNet<float>;
extern template struct FtiNet<double>;

}  // namespace model
}  // namespace stvsr
