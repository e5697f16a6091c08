#include "tensor/params.hpp"

#include "common/error.hpp"

namespace sw {

std::size_t ParamStore::add(std::string name, Tensor init) {
  if (find(name)) throw ConfigError("duplicate parameter name " + name);
  names_.push_back(std::move(name));
  init.set_requires_grad(true);
  tensors_.push_back(std::move(init));
  return tensors_.size() - 1;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.size();
  return n;
}

std::optional<std::size_t> ParamStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<Var> ParamStore::bind(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(tensors_.size());
  for (const Tensor& t : tensors_) vars.push_back(tape.leaf(t));
  return vars;
}

Tensor uniform_tensor(Shape shape, double bound, SplitMix& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace sw
