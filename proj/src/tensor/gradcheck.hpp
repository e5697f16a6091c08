#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tensor/autodiff.hpp"

namespace sw {

struct GradReport {
  std::string op_name;
  double max_rel_error = 0.0;
  // Worst relative error per input tensor, in input order.
  std::vector<double> per_input_errors;
  double tolerance = 0.0;

  bool passed() const { return max_rel_error < tolerance; }
};

using DifferentiableOp = std::function<Var(Tape&, std::span<const Var>)>;

// Compares the tape gradient of sum_i w_i * op(inputs)_i (fixed pseudo-random
// weights) against central differences at every scalar input position.
// Relative error per entry is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
// Throws Error(kEvaluation) when a forward value is not finite.
GradReport check_gradients(std::string op_name, const DifferentiableOp& op, std::vector<Tensor> inputs,
                           double step = 1e-5, double tol = 1e-3);

}  // namespace sw
