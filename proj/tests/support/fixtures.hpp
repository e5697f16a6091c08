#pragma once

#include <cmath>
#include <vector>

#include "common/rng.hpp"
#include "episodes/episode.hpp"
#include "perception/providers.hpp"
#include "policy/model.hpp"
#include "policy/train.hpp"

namespace sw::fixture {

// A window of `n` frames walking a gentle curve, ego-framed at the last pose.
inline ObservationWindow curve_window(std::size_t n, std::uint64_t seed, bool stereo = true) {
  std::vector<Vec2> pos;
  std::vector<double> heading, time;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    pos.push_back({t, 0.05 * t * t});
    heading.push_back(std::atan(0.1 * t));
    time.push_back(t);
  }
  ObservationWindow w;
  w.frames = frames_for_path(seed, pos, heading, time);
  if (!stereo) {
    for (auto& f : w.frames) f.right.reset();
  }
  const Pose2 last{pos.back(), heading.back()};
  for (const Vec2& p : pos) w.positions.push_back(to_ego(last, p));
  w.subgoal = {3.0, 1.0};
  return w;
}

inline TrainingSample random_sample(const ModelConfig& config, std::uint64_t seed) {
  SplitMix rng(seed);
  ObservationWindow w = curve_window(config.context_n, seed);
  w.subgoal = {rng.uniform(1.0, 5.0), rng.uniform(-2.0, 2.0)};
  TrainingSample s;
  s.input = prepare_input(ProceduralProvider{}, config, w);
  Vec2 p{};
  for (std::size_t k = 0; k < config.horizon; ++k) {
    p = p + Vec2{rng.uniform(0.5, 1.0), rng.uniform(-0.4, 0.4)};
    s.gt_waypoints.push_back(p);
  }
  s.gt_arrived = rng.uniform() < 0.5;
  return s;
}

// Replaces every parameter with small random values so that no path through
// the network is switched off by a zero initialisation.
inline void randomize_params(PolicyModel& model, std::uint64_t seed, double bound = 0.3) {
  SplitMix rng(seed);
  ParamStore& store = model.params();
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (double& v : store.tensor(i).values()) v = rng.uniform(-bound, bound);
  }
}

}  // namespace sw::fixture
