#include "policy/train.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace sw {

SampleGradient sample_gradient(const PolicyModel& model, const TrainingSample& sample) {
  Tape tape;
  const std::vector<Var> p = model.params().bind(tape);
  const ForwardVars out = model.forward(p, sample.input);
  const LossTerms loss = composite_loss(out.waypoints, out.arrival, sample.gt_waypoints, sample.gt_arrived,
                                        model.config());
  SampleGradient g;
  g.loss = loss.total.value()[0];
  if (!std::isfinite(g.loss)) {
    std::ostringstream os;
    os << "non-finite loss (waypoint " << loss.waypoint << ", arrival " << loss.arrival << ", direction "
       << loss.direction << ")";
    throw NumericError(os.str());
  }
  tape.backward(loss.total);
  g.grads.reserve(p.size());
  for (const Var& v : p) g.grads.push_back(v.grad());
  return g;
}

double sample_loss(const PolicyModel& model, const TrainingSample& sample) {
  Tape tape;
  std::vector<Var> p;
  for (std::size_t i = 0; i < model.params().size(); ++i) p.push_back(tape.constant(model.params().tensor(i)));
  const ForwardVars out = model.forward(p, sample.input);
  return composite_loss(out.waypoints, out.arrival, sample.gt_waypoints, sample.gt_arrived, model.config())
      .total.value()[0];
}

void AdamW::step(ParamStore& params, std::span<const Tensor> grads, double lr) {
  if (grads.size() != params.size()) throw DimensionError("gradient count does not match parameter count");
  if (m_.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.push_back(Tensor::zeros_like(params.tensor(i)));
      v_.push_back(Tensor::zeros_like(params.tensor(i)));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& w = params.tensor(i);
    const Tensor& g = grads[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = options_.beta1 * m[j] + (1.0 - options_.beta1) * g[j];
      v[j] = options_.beta2 * v[j] + (1.0 - options_.beta2) * g[j] * g[j];
      const double update = (m[j] / bc1) / (std::sqrt(v[j] / bc2) + options_.eps);
      w[j] -= lr * (update + options_.weight_decay * w[j]);
    }
  }
}

double train_step(PolicyModel& model, AdamW& optimizer, std::span<const TrainingSample* const> batch, double lr) {
  if (batch.empty()) throw ValidationError("batch", "must not be empty");
  std::vector<Tensor> mean;
  double loss = 0.0;
  for (const TrainingSample* s : batch) {
    SampleGradient g = sample_gradient(model, *s);
    loss += g.loss;
    if (mean.empty()) {
      mean = std::move(g.grads);
    } else {
      for (std::size_t i = 0; i < mean.size(); ++i)
        for (std::size_t j = 0; j < mean[i].size(); ++j) mean[i][j] += g.grads[i][j];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (Tensor& t : mean)
    for (double& v : t.values()) v *= inv;
  optimizer.step(model.params(), mean, lr);
  return loss * inv;
}

double scheduled_lr(const TrainOptions& o, std::size_t step) {
  if (o.warmup_steps > 0 && step < o.warmup_steps) {
    return o.lr * static_cast<double>(step + 1) / static_cast<double>(o.warmup_steps);
  }
  const std::size_t decay = o.steps > o.warmup_steps ? o.steps - o.warmup_steps : 1;
  const double progress = std::min(1.0, static_cast<double>(step - std::min(step, o.warmup_steps)) /
                                            static_cast<double>(decay));
  const double floor = o.min_lr_ratio * o.lr;
  return floor + (o.lr - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainResult train(PolicyModel& model, std::span<const TrainingSample> samples, const TrainOptions& options) {
  if (samples.empty()) throw EmptySetError("no training samples");
  if (options.batch_size == 0) throw ConfigError("batch_size must be positive");
  AdamW optimizer(AdamW::Options{.weight_decay = options.weight_decay});
  SplitMix rng(options.seed);
  // Epoch-style shuffling: walk a permutation, reshuffle when exhausted.
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();
  TrainResult result;
  result.step_losses.reserve(options.steps);
  std::vector<const TrainingSample*> batch;
  for (std::size_t step = 0; step < options.steps; ++step) {
    batch.clear();
    while (batch.size() < std::min(options.batch_size, samples.size())) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) {
          std::swap(order[i - 1], order[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
        }
        cursor = 0;
      }
      batch.push_back(&samples[order[cursor++]]);
    }
    const double loss = train_step(model, optimizer, batch, scheduled_lr(options, step));
    result.step_losses.push_back(loss);
    if (options.on_step) options.on_step(step, loss);
  }
  return result;
}

double mean_loss(const PolicyModel& model, std::span<const TrainingSample> samples) {
  if (samples.empty()) throw EmptySetError("no samples");
  double total = 0.0;
  for (const TrainingSample& s : samples) total += sample_loss(model, s);
  return total / static_cast<double>(samples.size());
}

}  // namespace sw
