#pragma once

#include <map>

#include "model/modules.h"

namespace stvsr {
namespace train {

// AdaMax: m <- b1*m + (1-b1)*g; u <- max(b2*u, |g|);
// theta <- theta - lr/(1-b1^t) * m/(u+eps).
// Parameters with no recorded gradient this step are treated as zero-gradient.
// Non-finite gradients abort with the parameter name.
template <typename T>
class Adamax {
 public:
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);

  void step(model::ParamStore<T>& params, T lr);

  int64_t step_count() const { return t_; }
  std::map<std::string, Tensor<T>>& moment_m() { return m_; }
  std::map<std::string, Tensor<T>>& moment_u() { return u_; }
  const std::map<std::string, Tensor<T>>& moment_m() const { return m_; }
  const std::map<std::string, Tensor<T>>& moment_u() const { return u_; }
  void set_step_count(int64_t t) { t_ = t; }

 private:
  int64_t t_ = 0;
  std::map<std::string, Tensor<T>> m_, u_;
};

extern template class Adamax<float>;
extern template class Adamax<double>;

}  // namespace train
}  // namespace stvsr
