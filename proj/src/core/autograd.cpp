#include "core/autograd.h"

#include <cstring>
#include <unordered_set>

namespace stvsr {

template <typename T>
std::vector<Node<T>*> topo_order(const Var<T>& root) {
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  // iterative post-order DFS
  struct Frame {
    Node<T>* node;
    size_t next_input;
  };
  std::vector<Frame> stack;
  if (root) stack.push_back({root.get(), 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_input == 0 && visited.count(f.node)) {
      stack.pop_back();
      continue;
    }
    if (f.next_input < f.node->inputs.size()) {
      Node<T>* child = f.node->inputs[f.next_input++].get();
      if (child && !visited.count(child)) stack.push_back({child, 0});
    } else {
      visited.insert(f.node);
      order.push_back(f.node);
      stack.pop_back();
    }
  }
  return order;
}

template <typename T>
void backward(const Var<T>& root) {
  auto order = topo_order(root);
  if (order.empty()) return;
  Node<T>& r = *root;
  r.ensure_grad().fill(T(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (!n->requires_grad || !n->backward_fn || !n->has_grad) continue;
    n->backward_fn(*n);
    if (n != root.get() && !n->inputs.empty()) n->clear_grad();  // intermediate, retire
  }
}

template <typename T>
int count_ops(const Var<T>& root, const char* op) {
  int count = 0;
  for (Node<T>* n : topo_order(root))
    if (std::strcmp(n->op, op) == 0) ++count;
  return count;
}

template struct Node<float>;
template struct Node<double>;
template std::vector<Node<float>*> topo_order(const Var<float>&);
template std::vector<Node<double>*> topo_order(const Var<double>&);
template void backward(const Var<float>&);
template void backward(const Var<double>&);
template int count_ops(const Var<float>&, const char*);
template int count_ops(const Var<double>&, const char*);

}  // namespace stvsr
