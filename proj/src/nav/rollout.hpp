#pragma once

#include <memory>
#include <span>
#include <vector>

#include "episodes/episode.hpp"
#include "nav/sim.hpp"
#include "policy/model.hpp"

namespace sw {

// What a closed-loop policy sees each second. `state` and `subgoal_world`
// are ground truth, available to scripted policies only.
struct PolicyQuery {
  ObservationWindow window;
  RobotState state;
  Vec2 subgoal_world;
};

class NavPolicy {
 public:
  virtual ~NavPolicy() = default;
  virtual PolicyOutput act(const PolicyQuery& query) = 0;
};

// Runs the learned model on the rendered window.
class ModelPolicy final : public NavPolicy {
 public:
  ModelPolicy(const PolicyModel& model, std::shared_ptr<const FeatureProvider> provider)
      : model_(model), provider_(std::move(provider)) {}
  PolicyOutput act(const PolicyQuery& query) override;

 private:
  const PolicyModel& model_;
  std::shared_ptr<const FeatureProvider> provider_;
};

// Walks 1 m per step straight at the current sub-goal.
class OraclePolicy final : public NavPolicy {
 public:
  explicit OraclePolicy(std::size_t horizon = 5, double step_m = 1.0) : horizon_(horizon), step_m_(step_m) {}
  PolicyOutput act(const PolicyQuery& query) override;

 private:
  std::size_t horizon_;
  double step_m_;
};

// Always predicts the current position.
class ZeroPolicy final : public NavPolicy {
 public:
  explicit ZeroPolicy(std::size_t horizon = 5) : horizon_(horizon) {}
  PolicyOutput act(const PolicyQuery& query) override;

 private:
  std::size_t horizon_;
};

struct RolloutOptions {
  std::size_t max_steps = 120;
  std::size_t context_n = 5;
  double subgoal_radius_m = 1.0;
  double arrival_tau = 0.5;
  double success_radius_m = 1.0;
  SimOptions sim;
  StereoRig rig;
  std::uint64_t frame_seed = 0;
};

enum class RolloutOutcome { kSuccess, kCollision, kTimeout };
const char* rollout_outcome_name(RolloutOutcome o);

struct RolloutResult {
  std::vector<RobotState> trajectory;       // includes the start state
  std::vector<std::size_t> subgoal_indices;  // one per executed step
  RolloutOutcome outcome = RolloutOutcome::kTimeout;
  bool collision = false;

  bool success() const { return outcome == RolloutOutcome::kSuccess; }
};

// Builds the N-frame window from the last simulated states (padding the
// start by extrapolating backward along the initial heading), executes the
// first predicted waypoint for 1 s, then updates the sub-goal. Success
// means ending within success_radius of the final waypoint with no collision.
RolloutResult rollout(NavPolicy& policy, const World& world, std::span<const Vec2> route,
                      const RolloutOptions& options = {});

}  // namespace sw
