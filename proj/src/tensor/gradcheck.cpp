#include "tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "tensor/ops.hpp"

namespace sw {

namespace {

constexpr double kDenominatorFloor = 1e-6;

Tensor probe_weights(const Shape& shape) {
  Tensor w(shape);
  SplitMix rng(0x9ad5c0ffee);
  for (double& v : w.values()) v = rng.uniform(0.5, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  return w;
}

double evaluate(const DifferentiableOp& op, const std::vector<Tensor>& inputs, Tensor* weights) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  const Var out = op(tape, vars);
  if (!out.value().all_finite()) throw Error(ErrorCode::kEvaluation, "non-finite forward value");
  if (weights->size() != out.value().size()) *weights = probe_weights(out.value().shape());
  double s = 0.0;
  for (std::size_t i = 0; i < weights->size(); ++i) s += (*weights)[i] * out.value()[i];
  return s;
}

}  // namespace

GradReport check_gradients(std::string op_name, const DifferentiableOp& op, std::vector<Tensor> inputs,
                           double step, double tol) {
  if (!(step > 0.0)) throw ConfigError("check_gradients: step must be positive");
  GradReport report;
  report.op_name = std::move(op_name);
  report.tolerance = tol;
  if (inputs.empty()) return report;
  for (const Tensor& t : inputs) {
    if (!t.all_finite()) throw Error(ErrorCode::kEvaluation, "check_gradients: non-finite input");
  }

  Tape tape;
  std::vector<Var> vars;
  for (Tensor t : inputs) vars.push_back(tape.leaf(std::move(t.set_requires_grad(true))));
  const Var out = op(tape, vars);
  if (!out.value().all_finite()) throw Error(ErrorCode::kEvaluation, "non-finite forward value");
  Tensor weights = probe_weights(out.value().shape());
  tape.backward(weighted_sum(out, weights));

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor analytic = vars[i].grad();
    double worst = 0.0;
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      const double orig = inputs[i][j];
      inputs[i][j] = orig + step;
      const double fp = evaluate(op, inputs, &weights);
      inputs[i][j] = orig - step;
      const double fm = evaluate(op, inputs, &weights);
      inputs[i][j] = orig;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic[j];
      const double denom = std::max({std::abs(a), std::abs(numeric), kDenominatorFloor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    report.per_input_errors.push_back(worst);
  }
  report.max_rel_error = *std::max_element(report.per_input_errors.begin(), report.per_input_errors.end());
  return report;
}

}  // namespace sw
