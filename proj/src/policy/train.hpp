#pragma once

#include <functional>
#include <span>
#include <vector>

#include "policy/loss.hpp"
#include "policy/model.hpp"

namespace sw {

struct TrainingSample {
  ModelInput input;
  std::vector<Vec2> gt_waypoints;
  bool gt_arrived = false;
};

// Composite loss of one sample with gradients w.r.t. every parameter.
struct SampleGradient {
  double loss = 0.0;
  std::vector<Tensor> grads;
};

SampleGradient sample_gradient(const PolicyModel& model, const TrainingSample& sample);
double sample_loss(const PolicyModel& model, const TrainingSample& sample);

// Adam with decoupled weight decay.
class AdamW {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW() = default;
  explicit AdamW(Options options) : options_(options) {}

  void step(ParamStore& params, std::span<const Tensor> grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  Options options_;
  std::size_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

// One optimizer step on the mean composite loss of `batch`. Returns the
// pre-step mean loss; throws NumericError when it is not finite.
double train_step(PolicyModel& model, AdamW& optimizer, std::span<const TrainingSample* const> batch, double lr);

struct TrainOptions {
  std::size_t steps = 2000;
  std::size_t batch_size = 8;
  double lr = 1e-3;
  double min_lr_ratio = 0.05;
  std::size_t warmup_steps = 50;
  double weight_decay = 0.01;
  std::uint64_t seed = 1;
  // Called after each step with (step, pre-step batch loss).
  std::function<void(std::size_t, double)> on_step;
};

// Linear warmup, then cosine decay to min_lr_ratio * lr.
double scheduled_lr(const TrainOptions& options, std::size_t step);

struct TrainResult {
  std::vector<double> step_losses;
};

TrainResult train(PolicyModel& model, std::span<const TrainingSample> samples, const TrainOptions& options);

// Mean composite loss over `samples` without updating anything.
double mean_loss(const PolicyModel& model, std::span<const TrainingSample> samples);

}  // namespace sw
