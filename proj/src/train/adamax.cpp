#include "train/adamax.h"

#include <cmath>

namespace stvsr {
namespace train {

template <typename T>
void Adamax<T>::step(model::ParamStore<T>& params, T lr) {
  ++t_;
  const T bias_fix = T(1) - T(std::pow(double(beta1), double(t_)));
  for (auto& [name, p] : params.all()) {
    Tensor<T>& m = m_.try_emplace(name, Tensor<T>::zeros(p->value.shape)).first->second;
    Tensor<T>& u = u_.try_emplace(name, Tensor<T>::zeros(p->value.shape)).first->second;
    const Tensor<T>* g = p->has_grad ? &p->grad : nullptr;
    if (g && !g->all_finite())
      throw TrainAbort("non-finite gradient in parameter '" + name + "'");
    T* pm = m.data();
    T* pu = u.data();
    T* pp = p->value.data();
    const T* pg = g ? g->data() : nullptr;
    const T scale = lr / bias_fix;
    for (int64_t i = 0; i < p->value.numel(); ++i) {
      T gi = pg ? pg[i] : T(0);
      pm[i] = beta1 * pm[i] + (T(1) - beta1) * gi;
      pu[i] = std::max(beta2 * pu[i], std::abs(gi));
      pp[i] -= scale * pm[i] / (pu[i] + eps);
    }
  }
}

template class Adamax<float>;
template class Adamax<double>;

}  // namespace train
}  // namespace stvsr
