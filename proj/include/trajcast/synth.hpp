#pragma once

#include <cstdint>

#include "trajcast/scene.hpp"

namespace trajcast {

enum class RoadTemplate { kStraight, kCurve, kIntersection };

struct SynthConfig {
  int num_agents = 3;  // in [1,16]
  RoadTemplate road = RoadTemplate::kStraight;
  double noise_sigma = 0.0;        // meters, Gaussian position noise
  double timestamp_jitter = 0.0;   // seconds, uniform, < half the step
  int t_obs = 20;
  int horizon = 30;

  void validate() const;
};

/// Deterministic synthetic scene: agents follow lanelet centerlines with a
/// smoothed speed profile; every agent has a future continuation.
Scene synth_scene(uint64_t seed, const SynthConfig& config);

std::string road_template_name(RoadTemplate t);
RoadTemplate road_template_from_name(const std::string& s);

}  // namespace trajcast
