#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common/rng.hpp"
#include "tensor/autodiff.hpp"

namespace sw {

// Bound parameter leaves for one forward pass, indexed like the ParamStore.
using Params = std::span<const Var>;

// Named, ordered collection of trainable tensors.
class ParamStore {
 public:
  std::size_t add(std::string name, Tensor init);

  std::size_t size() const { return tensors_.size(); }
  std::size_t scalar_count() const;
  const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;

  // Creates one requires-grad leaf per parameter on `tape`.
  std::vector<Var> bind(Tape& tape) const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

Tensor uniform_tensor(Shape shape, double bound, SplitMix& rng);

}  // namespace sw
