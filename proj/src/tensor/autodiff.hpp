#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>

#include "tensor/tensor.hpp"

namespace sw {

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }

  const Tensor& value() const;
  // Gradient accumulated by the last backward pass (zeros if untouched).
  Tensor grad() const;
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Reverse-mode tape. Ops append nodes in evaluation order; backward() walks
// them in reverse and calls each node's closure exactly once.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value);
  Var constant(Tensor value);
  Var record(Tensor value, std::span<const Var> inputs, Backward fn);
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward fn) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
  }

  // Seeds d(root)/d(root) = 1; root must hold a single value.
  void backward(Var root);
  void backward(Var root, const Tensor& seed);

  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  // Upstream gradient of `self` inside a backward closure.
  const Tensor& out_grad(std::uint32_t self) const { return nodes_[self].grad; }
  // Gradient buffer of an input, allocated on first use; nullptr when the
  // input does not require a gradient.
  Tensor* grad_sink(std::uint32_t id);
  Tensor grad(std::uint32_t id) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline Tensor Var::grad() const { return tape_->grad(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace sw
