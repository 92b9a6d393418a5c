#include "model/reconstruction.h"

namespace stvsr {
namespace model {

template <typename T>
Reconstruction<T> Reconstruction<T>::make(ParamStore<T>& ps, const std::string& name,
                                          const ModelConfig& cfg, int rep_count,
                                          bool hr_input_at_2x) {
  Reconstruction<T> r;
  r.reps = rep_count;
  const int c = cfg.channels;
  int remaining = cfg.scale / (hr_input_at_2x ? 2 : 1);
  int n_stages = 0;
  while (remaining > 1) {
    remaining /= 2;
    ++n_stages;
  }
  r.hr_fuse = Conv2dLayer<T>::make(ps, name + ".hr_fuse", rep_count * c, c, 3, 1, 1);
  for (int i = 0; i < n_stages; ++i)
    r.stages.push_back(
        Conv2dLayer<T>::make(ps, name + ".stage" + std::to_string(i), c, 4 * c, 3, 1, 1));
  r.hr_out = Conv2dLayer<T>::make(ps, name + ".hr_out", c, 3, 3, 1, 1);
  r.lr_fuse = Conv2dLayer<T>::make(ps, name + ".lr_fuse", rep_count * c, c, 3, 1, 1);
  r.lr_out = Conv2dLayer<T>::make(ps, name + ".lr_out", c, 3, 3, 1, 1);
  return r;
}

template <typename T>
std::array<Var<T>, 3> Reconstruction<T>::reconstruct_hr(
    const std::vector<VarTriplet<T>>& hr_reps) const {
  if (int(hr_reps.size()) != reps)
    throw ConfigError("reconstruct_hr: expected " + std::to_string(reps) +
                      " representations, got " + std::to_string(hr_reps.size()));
  for (const auto& t : hr_reps) {
    check_same_shape(t.f0->value, hr_reps[0].f0->value, "reconstruct_hr");
    check_same_shape(t.ft->value, hr_reps[0].f0->value, "reconstruct_hr");
    check_same_shape(t.f1->value, hr_reps[0].f0->value, "reconstruct_hr");
  }
  std::array<Var<T>, 3> out;
  for (int frame = 0; frame < 3; ++frame) {
    std::vector<Var<T>> maps;
    for (const auto& t : hr_reps)
      maps.push_back(frame == 0 ? t.f0 : frame == 1 ? t.ft : t.f1);
    Var<T> x = ops::leaky_relu(hr_fuse(ops::concat_c(maps)), T(kLeakySlope));
    for (const auto& st : stages)
      x = ops::pixel_shuffle(ops::leaky_relu(st(x), T(kLeakySlope)), 2);
    out[size_t(frame)] = hr_out(x);
  }
  return out;
}

template <typename T>
Var<T> Reconstruction<T>::reconstruct_lr(const std::vector<VarTriplet<T>>& lr_reps) const {
  if (int(lr_reps.size()) != reps)
    throw ConfigError("reconstruct_lr: expected " + std::to_string(reps) +
                      " representations, got " + std::to_string(lr_reps.size()));
  std::vector<Var<T>> maps;
  for (const auto& t : lr_reps) maps.push_back(t.ft);
  Var<T> x = ops::leaky_relu(lr_fuse(ops::concat_c(maps)), T(kLeakySlope));
  return lr_out(x);
}

template struct Reconstruction<float>;
template struct Reconstruction<double>;

}  // namespace model
}  // namespace stvsr
