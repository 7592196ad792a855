#pragma once

#include <ostream>
#include <vector>

#include "trajcast/loss.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/model.hpp"
#include "trajcast/optim.hpp"

namespace trajcast {

struct TrainConfig {
  int epochs = 64;
  double base_lr = 5e-4;
  double weight_decay = 1e-4;
  bool drop_static = true;
  int log_every = 10;  // steps; 0 disables progress lines
};

struct TrainResult {
  std::vector<double> loss_history;  // one entry per optimizer step
  Metrics train_metrics;             // over the training scenes, final params
};

/// One optimizer step per scene, cosine-annealed learning rate over
/// epochs * scenes steps. Aborts with the failing step index if the loss
/// or any gradient becomes non-finite.
TrainResult train(Model& model, const std::vector<Scene>& scenes, const TrainConfig& cfg,
                  std::ostream* log = nullptr);

/// Loss and metrics of the current parameters on one scene, no updates.
struct EvalOutput {
  double loss = 0.0;
  Metrics metrics;
};
EvalOutput eval_scene(Model& model, const Scene& scene, bool drop_static = true,
                      bool targets_only = true);

}  // namespace trajcast
