#include "model/fti.h"

namespace stvsr {
namespace model {

template <typename T>
FeatureExtractor<T> FeatureExtractor<T>::make(ParamStore<T>& ps, const std::string& name,
                                              const ModelConfig& cfg) {
  FeatureExtractor<T> fe;
  fe.conv_in = Conv2dLayer<T>::make(ps, name + ".conv_in", 3, cfg.channels, 3, 1, 1);
  for (int i = 0; i < cfg.fe_resblocks; ++i)
    fe.blocks.push_back(ResBlock<T>::make(ps, name + ".res" + std::to_string(i), cfg.channels));
  return fe;
}

template <typename T>
Var<T> FeatureExtractor<T>::operator()(Var<T> rgb) const {
  Var<T> x = ops::leaky_relu(conv_in(rgb), T(kLeakySlope));
  for (const auto& b : blocks) x = b(x);
  return x;
}

template <typename T>
OffsetPyramid<T> OffsetPyramid<T>::make(ParamStore<T>& ps, const std::string& name,
                                        const ModelConfig& cfg) {
  OffsetPyramid<T> p;
  p.levels = cfg.pyramid_levels;
  p.taps = cfg.taps();
  p.groups = cfg.deform_groups;
  p.modulation = cfg.use_modulation;
  const int c = cfg.channels;
  for (int i = 0; i + 1 < p.levels; ++i)
    p.down.push_back(Conv2dLayer<T>::make(ps, name + ".down" + std::to_string(i), c, c, 3, 2, 1));
  const int per_dir = (2 + (p.modulation ? 1 : 0)) * p.taps * p.groups;
  for (int lv = 0; lv < p.levels; ++lv) {
    Head h;
    std::string base = name + ".lv" + std::to_string(lv);
    h.c1 = Conv2dLayer<T>::make(ps, base + ".c1", 2 * c, c, 3, 1, 1);
    h.c2 = Conv2dLayer<T>::make(ps, base + ".c2", c, c, 3, 1, 1);
    h.c3 = Conv2dLayer<T>::make(ps, base + ".c3", c, 2 * per_dir, 3, 1, 1, Init::zero);
    p.heads.push_back(h);
  }
  return p;
}

template <typename T>
std::pair<OffsetFieldVar<T>, OffsetFieldVar<T>> OffsetPyramid<T>::operator()(
    Var<T> feat0, Var<T> feat1) const {
  const Shape& s = feat0->value.shape;
  check_same_shape(feat0->value, feat1->value, "OffsetPyramid");
  const int div = 1 << (levels - 1);
  if (s.h % div != 0 || s.w % div != 0)
    throw ConfigError("OffsetPyramid: input dims " + s.str() + " not divisible by 2^" +
                      std::to_string(levels - 1));

  std::vector<Var<T>> p0{feat0}, p1{feat1};
  for (int i = 0; i + 1 < levels; ++i) {
    p0.push_back(ops::leaky_relu(down[i](p0.back()), T(kLeakySlope)));
    p1.push_back(ops::leaky_relu(down[i](p1.back()), T(kLeakySlope)));
  }

  const int off_c = 2 * taps * groups;
  const int mod_c = taps * groups;
  Var<T> off_f, off_b, ml_f, ml_b;
  for (int lv = levels - 1; lv >= 0; --lv) {
    Var<T> in0 = p0[size_t(lv)], in1 = p1[size_t(lv)];
    if (off_f) {
      // refine: double the coarser offsets onto this level's grid and align
      // the endpoint features with the mean displacement before predicting
      // the residual
      off_f = ops::scale(ops::bilinear_upsample(off_f, 2), T(2));
      off_b = ops::scale(ops::bilinear_upsample(off_b, 2), T(2));
      if (modulation) {
        ml_f = ops::bilinear_upsample(ml_f, 2);
        ml_b = ops::bilinear_upsample(ml_b, 2);
      }
      in0 = ops::warp(in0, ops::mean_flow(off_f));
      in1 = ops::warp(in1, ops::mean_flow(off_b));
    }
    const Head& head = heads[size_t(lv)];
    Var<T> x = ops::leaky_relu(head.c1(ops::concat_c<T>({in0, in1})), T(kLeakySlope));
    x = ops::leaky_relu(head.c2(x), T(kLeakySlope));
    Var<T> raw = head.c3(x);
    Var<T> rf = ops::slice_c(raw, 0, off_c);
    Var<T> rb = ops::slice_c(raw, off_c, off_c);
    off_f = off_f ? ops::add(off_f, rf) : rf;
    off_b = off_b ? ops::add(off_b, rb) : rb;
    if (modulation) {
      Var<T> mf = ops::slice_c(raw, 2 * off_c, mod_c);
      Var<T> mb = ops::slice_c(raw, 2 * off_c + mod_c, mod_c);
      ml_f = ml_f ? ops::add(ml_f, mf) : mf;
      ml_b = ml_b ? ops::add(ml_b, mb) : mb;
    }
  }
  return {OffsetFieldVar<T>{off_f, ml_f}, OffsetFieldVar<T>{off_b, ml_b}};
}

template <typename T>
FtiNet<T> FtiNet<T>::make(ParamStore<T>& ps, const std::string& name,
                          const ModelConfig& cfg) {
  FtiNet<T> f;
  f.pyramid = OffsetPyramid<T>::make(ps, name + ".pyr", cfg);
  const int c = cfg.channels, k = cfg.kernel;
  f.deform_f = Conv2dLayer<T>::make(ps, name + ".def_f", c, c, k, 1, k / 2);
  f.deform_b = Conv2dLayer<T>::make(ps, name + ".def_b", c, c, k, 1, k / 2);
  f.blend_f = Conv2dLayer<T>::make(ps, name + ".blend_f", c, 1, 3, 1, 1);
  f.blend_b = Conv2dLayer<T>::make(ps, name + ".blend_b", c, 1, 3, 1, 1);
  f.groups = cfg.deform_groups;
  f.modulation = cfg.use_modulation;
  return f;
}

template <typename T>
Var<T> FtiNet<T>::interpolate(Var<T> feat0, Var<T> feat1, const OffsetFieldVar<T>& fwd,
                              const OffsetFieldVar<T>& bwd) const {
  Var<T> mod_f = fwd.mod_logits ? ops::sigmoid(fwd.mod_logits) : nullptr;
  Var<T> mod_b = bwd.mod_logits ? ops::sigmoid(bwd.mod_logits) : nullptr;
  Var<T> phi_f =
      ops::deform_conv2d(feat0, deform_f.w, deform_f.b, fwd.offsets, mod_f, deform_f.pad, groups);
  Var<T> phi_b =
      ops::deform_conv2d(feat1, deform_b.w, deform_b.b, bwd.offsets, mod_b, deform_b.pad, groups);
  return ops::blend_softmax(phi_f, phi_b, blend_f(phi_f), blend_b(phi_b));
}

template <typename T>
Var<T> FtiNet<T>::operator()(Var<T> feat0, Var<T> feat1) const {
  auto [fwd, bwd] = pyramid(feat0, feat1);
  return interpolate(feat0, feat1, fwd, bwd);
}

template struct FeatureExtractor<float>;
template struct FeatureExtractor<double>;
template struct OffsetPyramid<float>;
template struct OffsetPyramid<double>;
template struct FtiNet<float>;
template struct FtiNet<double>;

}  // namespace model
}  // namespace stvsr
