#pragma once

#include "model/config.h"
#include "model/modules.h"

namespace stvsr {
namespace model {

// Fuses the representation lists into output frames. The HR head concatenates
// the M maps of one time index, fuses to C channels, then applies
// conv+pixel-shuffle x2 stages until the target scale is reached and a final
// conv to RGB. `hr_input_at_2x` selects how many stages that takes: reps from
// the projection cycle are already at 2x, reps from plain/LR variants are not.
template <typename T>
struct Reconstruction {
  Conv2dLayer<T> hr_fuse;
  std::vector<Conv2dLayer<T>> stages;  // C -> 4C, each followed by pixel_shuffle(2)
  Conv2dLayer<T> hr_out;
  Conv2dLayer<T> lr_fuse, lr_out;
  int reps = 1;

  static Reconstruction make(ParamStore<T>& ps, const std::string& name,
                             const ModelConfig& cfg, int rep_count, bool hr_input_at_2x);

  // H0, Ht, H1 at LR dims * scale
  std::array<Var<T>, 3> reconstruct_hr(const std::vector<VarTriplet<T>>& hr_reps) const;
  // Lt at LR dims (middle-frame maps only)
  Var<T> reconstruct_lr(const std::vector<VarTriplet<T>>& lr_reps) const;
};

extern template struct Reconstruction<float>;
extern template struct Reconstruction<double>;

}  // namespace model
}  // namespace stvsr
