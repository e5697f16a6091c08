#include "policy/loss.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "tensor/ops.hpp"

namespace sw {

std::vector<Vec2> step_vectors(std::span<const Vec2> waypoints) {
  std::vector<Vec2> steps;
  steps.reserve(waypoints.size());
  Vec2 prev{0.0, 0.0};
  for (Vec2 w : waypoints) {
    steps.push_back(w - prev);
    prev = w;
  }
  return steps;
}

namespace {

void check_horizons(std::size_t pred, std::size_t gt) {
  if (pred != gt) {
    throw DimensionError("prediction has " + std::to_string(pred) + " waypoints, ground truth " + std::to_string(gt));
  }
}

}  // namespace

double direction_loss(std::span<const Vec2> pred, std::span<const Vec2> gt) {
  check_horizons(pred.size(), gt.size());
  const std::vector<Vec2> ps = step_vectors(pred), gs = step_vectors(gt);
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    if (gs[k].norm() < kMinStepLength) continue;
    total += std::abs(wrap_angle(std::atan2(ps[k].y, ps[k].x) - std::atan2(gs[k].y, gs[k].x)));
    ++used;
  }
  if (used == 0) throw UndefinedDirectionError("every ground-truth step is shorter than 1e-6 m");
  return total / static_cast<double>(used);
}

Var direction_loss(Var pred, std::span<const Vec2> gt) {
  const Tensor& pv = pred.value();
  check_horizons(pv.rows(), gt.size());
  if (pv.cols() != 2) throw DimensionError("direction_loss expects [horizon x 2] waypoints");
  std::vector<Vec2> pw(pv.rows());
  for (std::size_t k = 0; k < pw.size(); ++k) pw[k] = {pv.at(k, 0), pv.at(k, 1)};
  const std::vector<Vec2> ps = step_vectors(pw), gs = step_vectors(gt);

  // d|diff|/d(step) per used step; zero-length predicted steps get no gradient.
  std::vector<Vec2> dstep(ps.size(), Vec2{0, 0});
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    if (gs[k].norm() < kMinStepLength) continue;
    const double diff = wrap_angle(std::atan2(ps[k].y, ps[k].x) - std::atan2(gs[k].y, gs[k].x));
    total += std::abs(diff);
    ++used;
    const double n2 = ps[k].squared_norm();
    if (n2 > 0.0 && diff != 0.0) {
      const double sgn = diff > 0.0 ? 1.0 : -1.0;
      dstep[k] = Vec2{-ps[k].y / n2, ps[k].x / n2} * sgn;
    }
  }
  Tape& tape = pred.tape();
  if (used == 0) return tape.constant(Tensor::scalar(0.0));
  const double inv = 1.0 / static_cast<double>(used);
  return tape.record(Tensor::scalar(total * inv), {pred}, [pred, dstep, inv](Tape& t, std::uint32_t self) {
    Tensor* gp = t.grad_sink(pred.id());
    if (!gp) return;
    const double g = t.out_grad(self)[0] * inv;
    for (std::size_t k = 0; k < dstep.size(); ++k) {
      // step_k = w_k - w_{k-1}
      gp->at(k, 0) += g * dstep[k].x;
      gp->at(k, 1) += g * dstep[k].y;
      if (k + 1 < dstep.size()) {
        gp->at(k, 0) -= g * dstep[k + 1].x;
        gp->at(k, 1) -= g * dstep[k + 1].y;
      }
    }
  });
}

double binary_cross_entropy(double p, bool label) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return label ? -std::log(q) : -std::log(1.0 - q);
}

Var binary_cross_entropy(Var p, bool label) {
  const double pv = p.value()[0];
  const bool clamped = pv < kProbClamp || pv > 1.0 - kProbClamp;
  const double q = std::clamp(pv, kProbClamp, 1.0 - kProbClamp);
  return p.tape().record(Tensor::scalar(binary_cross_entropy(pv, label)), {p},
                         [p, q, label, clamped](Tape& t, std::uint32_t self) {
                           Tensor* gp = t.grad_sink(p.id());
                           if (!gp || clamped) return;
                           (*gp)[0] += t.out_grad(self)[0] * (label ? -1.0 / q : 1.0 / (1.0 - q));
                         });
}

Var waypoint_mse(Var pred, std::span<const Vec2> gt) {
  const Tensor& pv = pred.value();
  check_horizons(pv.rows(), gt.size());
  Tensor target(Shape{gt.size(), 2});
  for (std::size_t k = 0; k < gt.size(); ++k) {
    target.at(k, 0) = gt[k].x;
    target.at(k, 1) = gt[k].y;
  }
  const Var diff = sub(pred, pred.tape().constant(std::move(target)));
  return scale(sum(mul(diff, diff)), 1.0 / static_cast<double>(2 * gt.size()));
}

LossTerms composite_loss(Var pred_waypoints, Var arrival_prob, std::span<const Vec2> gt_waypoints, bool gt_arrived,
                         const ModelConfig& config) {
  const Var wp = waypoint_mse(pred_waypoints, gt_waypoints);
  const Var arr = binary_cross_entropy(arrival_prob, gt_arrived);
  const Var dir = direction_loss(pred_waypoints, gt_waypoints);
  LossTerms out;
  out.total = add(add(wp, scale(arr, config.lambda_arrvd)), scale(dir, config.lambda_dir));
  out.waypoint = wp.value()[0];
  out.arrival = arr.value()[0];
  out.direction = dir.value()[0];
  return out;
}

}  // namespace sw
