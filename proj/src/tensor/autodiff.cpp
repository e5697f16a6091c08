#include "tensor/autodiff.hpp"

#include "common/error.hpp"

namespace sw {

Var Tape::leaf(Tensor value) {
  Node n;
  n.requires_grad = value.requires_grad();
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  return leaf(std::move(value));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backward fn) {
  Node n;
  for (const Var& v : inputs) {
    if (&v.tape() != this) throw Error(ErrorCode::kInternal, "op mixes vars from different tapes");
    n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
  }
  n.value = std::move(value);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor* Tape::grad_sink(std::uint32_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(n.value);
    n.has_grad = true;
  }
  return &n.grad;
}

Tensor Tape::grad(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.has_grad ? n.grad : Tensor::zeros_like(n.value);
}

void Tape::backward(Var root) {
  if (root.value().size() != 1) {
    throw DimensionError("backward() needs a scalar root, got " + root.value().shape_string());
  }
  backward(root, Tensor(root.value().shape(), 1.0));
}

void Tape::backward(Var root, const Tensor& seed) {
  if (seed.shape() != root.value().shape()) {
    throw DimensionError("backward seed shape " + seed.shape_string() + " does not match root " +
                         root.value().shape_string());
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
  }
  Tensor* g = grad_sink(root.id());
  if (g == nullptr) return;
  *g = seed;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.has_grad && n.backward) n.backward(*this, static_cast<std::uint32_t>(i));
  }
}

}  // namespace sw
