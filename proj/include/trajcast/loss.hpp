#pragma once

#include <vector>

#include "trajcast/model.hpp"
#include "trajcast/scene.hpp"

namespace trajcast {

/// log p(x) for a Laplace distribution with location mu and scale b.
double laplace_logpdf(double x, double mu, double b);

/// Future ground truth for one agent, in the agent's current heading frame.
struct AgentTargets {
  bool valid = false;       // at least one observed future step
  std::vector<bool> mask;   // H entries, step observed
  Tensor local;             // [H,2]; rows with mask false are zero
  std::vector<Vec2> world;  // H entries
  int last_step = -1;       // last observed future step (endpoint)
};

std::vector<AgentTargets> make_targets(const Scene& scene, const Prediction& pred);

/// Winner-take-all mode per agent: smallest endpoint error in the local
/// frame. -1 for agents without a valid prediction or future.
std::vector<int> best_modes(const Prediction& pred, const std::vector<AgentTargets>& targets);

/// Soft mode assignment [n_agents, F]: softmax over modes of the negative
/// endpoint error. Rows for invalid agents are zero.
Tensor soft_targets(const Prediction& pred, const std::vector<AgentTargets>& targets);

struct LossResult {
  Var total;
  Var regression;
  Var classification;
  std::vector<int> modes;  // the winner-take-all choice actually used
};

/// Negative Laplace log-likelihood of the winner mode, averaged over all
/// observed future steps of all valid agents. `fixed_modes` overrides the
/// winner-take-all choice (used by finite-difference checks).
Var regression_loss(const Prediction& pred, const std::vector<AgentTargets>& targets,
                    const std::vector<int>* fixed_modes = nullptr);

/// Cross entropy between the soft mode assignment (treated as a constant)
/// and the predicted mode probabilities, averaged over valid agents.
Var classification_loss(const Prediction& pred, const std::vector<AgentTargets>& targets,
                        const Tensor* fixed_soft = nullptr);

LossResult total_loss(const Prediction& pred, const std::vector<AgentTargets>& targets,
                      const std::vector<int>* fixed_modes = nullptr,
                      const Tensor* fixed_soft = nullptr);

}  // namespace trajcast
