#include "model/loss.h"

namespace stvsr {
namespace model {

template <typename T>
Var<T> total_loss(const Outputs<T>& out, const Tensor<T>& lt_gt, const Tensor<T>& ht_gt,
                  const Tensor<T>& h0_gt, const Tensor<T>& h1_gt, const LossWeights& w) {
  w.validate();
  const T omega = T(w.omega);
  std::vector<Var<T>> terms{
      ops::charbonnier(out.lt, lt_gt, omega),
      ops::charbonnier(out.ht, ht_gt, omega),
      ops::charbonnier(out.h0, h0_gt, omega),
      ops::charbonnier(out.h1, h1_gt, omega),
  };
  return ops::add_weighted(terms, {T(w.w_lt), T(w.w_ht), T(w.w_h0), T(w.w_h1)});
}

template Var<float> total_loss(const Outputs<float>&, const Tensor<float>&,
                               const Tensor<float>&, const Tensor<float>&,
                               const Tensor<float>&, const LossWeights&);
template Var<double> total_loss(const Outputs<double>&, const Tensor<double>&,
                                const Tensor<double>&, const Tensor<double>&,
                                const Tensor<double>&, const LossWeights&);

}  // namespace model
}  // namespace stvsr
