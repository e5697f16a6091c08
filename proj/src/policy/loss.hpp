#pragma once

#include <span>
#include <vector>

#include "common/geometry.hpp"
#include "policy/config.hpp"
#include "tensor/autodiff.hpp"

namespace sw {

inline constexpr double kMinStepLength = 1e-6;
inline constexpr double kProbClamp = 1e-7;

// Step vectors of a trajectory with the origin prepended.
std::vector<Vec2> step_vectors(std::span<const Vec2> waypoints);

// Mean absolute wrapped heading difference over GT steps of length
// >= kMinStepLength. Throws UndefinedDirectionError when none qualify.
double direction_loss(std::span<const Vec2> pred, std::span<const Vec2> gt);
// Differentiable form over a [horizon x 2] prediction. Returns a zero
// constant when every GT step is degenerate.
Var direction_loss(Var pred, std::span<const Vec2> gt);

// -(y log p + (1-y) log(1-p)) with p clamped to [1e-7, 1-1e-7].
double binary_cross_entropy(double p, bool label);
Var binary_cross_entropy(Var p, bool label);

// Mean squared error over all waypoint coordinates.
Var waypoint_mse(Var pred, std::span<const Vec2> gt);

struct LossTerms {
  Var total;
  double waypoint = 0.0;
  double arrival = 0.0;
  double direction = 0.0;
};

// L = L_wp + lambda_arrvd * L_arrvd + lambda_dir * L_dir
LossTerms composite_loss(Var pred_waypoints, Var arrival_prob, std::span<const Vec2> gt_waypoints, bool gt_arrived,
                         const ModelConfig& config);

}  // namespace sw
