#pragma once

#include <vector>

#include "trajcast/loss.hpp"
#include "trajcast/model.hpp"

namespace trajcast {

struct Metrics {
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
  int agents = 0;  // evaluated agents
};

constexpr double kMissThreshold = 2.0;  // meters

/// World-frame displacement metrics over the top-k modes by probability.
/// Only agents flagged in `evaluate_agent` with a valid prediction and
/// future contribute. Throws if k exceeds the number of modes.
Metrics evaluate(const Prediction& pred, const std::vector<AgentTargets>& targets,
                 const std::vector<bool>& evaluate_agent, int k = 6,
                 double miss_threshold = kMissThreshold);

/// Accumulates metrics over several scenes, weighted by agent count.
struct MetricsAccumulator {
  double ade_sum = 0.0, fde_sum = 0.0, miss_sum = 0.0;
  int agents = 0;

  void add(const Metrics& m) {
    ade_sum += m.min_ade * m.agents;
    fde_sum += m.min_fde * m.agents;
    miss_sum += m.miss_rate * m.agents;
    agents += m.agents;
  }
  Metrics result() const {
    Metrics m;
    m.agents = agents;
    if (agents > 0) {
      m.min_ade = ade_sum / agents;
      m.min_fde = fde_sum / agents;
      m.miss_rate = miss_sum / agents;
    }
    return m;
  }
};

}  // namespace trajcast
