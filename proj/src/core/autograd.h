#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "core/tensor.h"

namespace stvsr {

// Tape-based reverse-mode autodiff. Every op returns a new node holding its
// value; backward() walks the tape in reverse topological order and each
// node's backward_fn accumulates into its inputs' grad buffers.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated lazily by ensure_grad()
  bool requires_grad = false;
  bool has_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node<T>>> inputs;
  std::function<void(Node<T>&)> backward_fn;

  Tensor<T>& ensure_grad() {
    if (!has_grad) {
      grad = Tensor<T>::zeros(value.shape);
      has_grad = true;
    }
    return grad;
  }
  void clear_grad() {
    grad = Tensor<T>();
    has_grad = false;
  }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

template <typename T>
Var<T> make_leaf(Tensor<T> value, bool requires_grad = false) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

template <typename T>
Var<T> make_node(Tensor<T> value, const char* op, std::vector<Var<T>> inputs,
                 std::function<void(Node<T>&)> backward_fn) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->op = op;
  bool req = false;
  for (const auto& in : inputs) req = req || (in && in->requires_grad);
  n->requires_grad = req;
  n->inputs = std::move(inputs);
  n->backward_fn = std::move(backward_fn);
  return n;
}

// Reverse topological order (root last).
template <typename T>
std::vector<Node<T>*> topo_order(const Var<T>& root);

// Seeds root's grad with ones and propagates to all reachable nodes that
// require grad. Leaf grads (parameters, inputs) survive; intermediate grads
// are released as the walk retires them.
template <typename T>
void backward(const Var<T>& root);

// Counts nodes with the given op name in the tape rooted at `root`.
template <typename T>
int count_ops(const Var<T>& root, const char* op);

extern template struct Node<float>;
extern template struct Node<double>;
extern template std::vector<Node<float>*> topo_order(const Var<float>&);
extern template std::vector<Node<double>*> topo_order(const Var<double>&);
extern template void backward(const Var<float>&);
extern template void backward(const Var<double>&);
extern template int count_ops(const Var<float>&, const char*);
extern template int count_ops(const Var<double>&, const char*);

}  // namespace stvsr
