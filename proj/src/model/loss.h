#pragma once

#include "model/network.h"

namespace stvsr {
namespace model {

// rho(x) = sqrt(x^2 + omega^2), mean-reduced; the four terms weight the LR
// middle frame, HR middle frame and the two HR endpoints.
struct LossWeights {
  double omega = 1e-3;
  double w_lt = 1.0;
  double w_ht = 1.0;
  double w_h0 = 0.5;
  double w_h1 = 0.5;

  void validate() const {
    if (omega <= 0 || w_lt <= 0 || w_ht <= 0 || w_h0 <= 0 || w_h1 <= 0)
      throw ConfigError("LossWeights: all weights must be positive");
  }
};

template <typename T>
Var<T> total_loss(const Outputs<T>& out, const Tensor<T>& lt_gt, const Tensor<T>& ht_gt,
                  const Tensor<T>& h0_gt, const Tensor<T>& h1_gt,
                  const LossWeights& w = LossWeights());

extern template Var<float> total_loss(const Outputs<float>&, const Tensor<float>&,
                                      const Tensor<float>&, const Tensor<float>&,
                                      const Tensor<float>&, const LossWeights&);
extern template Var<double> total_loss(const Outputs<double>&, const Tensor<double>&,
                                       const Tensor<double>&, const Tensor<double>&,
                                       const Tensor<double>&, const LossWeights&);

}  // namespace model
}  // namespace stvsr
