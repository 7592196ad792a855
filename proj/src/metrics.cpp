#include "trajcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace trajcast {

Metrics evaluate(const Prediction& pred, const std::vector<AgentTargets>& targets,
                 const std::vector<bool>& evaluate_agent, int k, double miss_threshold) {
  if (pred.agents.size() != targets.size() || pred.agents.size() != evaluate_agent.size())
    throw std::invalid_argument("evaluate: size mismatch");
  Metrics m;
  double ade_sum = 0.0, fde_sum = 0.0, miss_sum = 0.0;
  for (size_t i = 0; i < pred.agents.size(); ++i) {
    const AgentPrediction& ap = pred.agents[i];
    const AgentTargets& tg = targets[i];
    if (!evaluate_agent[i] || !ap.valid || !tg.valid) continue;
    int f_modes = static_cast<int>(ap.modes.size());
    if (k > f_modes)
      throw std::invalid_argument("evaluate: k exceeds the number of modes");

    // Top-k modes by predicted probability, ties broken by mode index.
    std::vector<int> order(f_modes);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return ap.pi.value().data[a] > ap.pi.value().data[b];
    });
    order.resize(k);

    double best_ade = std::numeric_limits<double>::infinity();
    double best_fde = std::numeric_limits<double>::infinity();
    int h = static_cast<int>(tg.mask.size());
    for (int f : order) {
      double sum = 0.0;
      int steps = 0;
      for (int t = 0; t < h; ++t) {
        if (!tg.mask[t]) continue;
        sum += (ap.world_point(f, t) - tg.world[t]).norm();
        ++steps;
      }
      best_ade = std::min(best_ade, sum / steps);
      best_fde =
          std::min(best_fde, (ap.world_point(f, tg.last_step) - tg.world[tg.last_step]).norm());
    }
    ade_sum += best_ade;
    fde_sum += best_fde;
    miss_sum += best_fde > miss_threshold ? 1.0 : 0.0;
    ++m.agents;
  }
  if (m.agents > 0) {
    m.min_ade = ade_sum / m.agents;
    m.min_fde = fde_sum / m.agents;
    m.miss_rate = miss_sum / m.agents;
  }
  return m;
}

}  // namespace trajcast
