#include "trajcast/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trajcast {

namespace {

std::vector<bool> eval_flags(const Scene& scene, bool targets_only) {
  std::vector<bool> flags;
  for (const auto& a : scene.agents) flags.push_back(!targets_only || a.is_target);
  return flags;
}

}  // namespace

TrainResult train(Model& model, const std::vector<Scene>& scenes, const TrainConfig& cfg,
                  std::ostream* log) {
  if (scenes.empty()) throw std::invalid_argument("train: no scenes");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

  std::vector<Scene> prepared;
  std::vector<SceneFeatures> features;
  for (const auto& s : scenes) {
    prepared.push_back(cfg.drop_static ? drop_static_agents(s) : s);
    features.push_back(featurize_scene(prepared.back()));
  }

  AdamWConfig opt_cfg;
  opt_cfg.base_lr = cfg.base_lr;
  opt_cfg.weight_decay = cfg.weight_decay;
  AdamW opt(opt_cfg);

  const int64_t total_steps = static_cast<int64_t>(cfg.epochs) * prepared.size();
  TrainResult result;
  int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t si = 0; si < prepared.size(); ++si) {
      model.params().zero_grad();
      Prediction pred = model.forward(features[si]);
      auto targets = make_targets(prepared[si], pred);
      LossResult loss = total_loss(pred, targets);
      double value = loss.total.value().data[0];
      if (!std::isfinite(value))
        throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
      backward(loss.total);
      opt.step(model.params(), cosine_lr(cfg.base_lr, step, total_steps));
      result.loss_history.push_back(value);
      if (log && cfg.log_every > 0 && step % cfg.log_every == 0)
        (*log) << "step " << step << "/" << total_steps << " loss " << value << "\n";
      ++step;
    }
  }

  MetricsAccumulator acc;
  for (size_t si = 0; si < prepared.size(); ++si) {
    Prediction pred = model.forward(features[si]);
    auto targets = make_targets(prepared[si], pred);
    int k = std::min(6, model.config().modes);
    acc.add(evaluate(pred, targets, eval_flags(prepared[si], true), k));
  }
  result.train_metrics = acc.result();
  return result;
}

EvalOutput eval_scene(Model& model, const Scene& scene, bool drop_static, bool targets_only) {
  Scene prepared = drop_static ? drop_static_agents(scene) : scene;
  SceneFeatures sf = featurize_scene(prepared);
  Prediction pred = model.forward(sf);
  auto targets = make_targets(prepared, pred);
  EvalOutput out;
  out.loss = total_loss(pred, targets).total.value().data[0];
  int k = std::min(6, model.config().modes);
  out.metrics = evaluate(pred, targets, eval_flags(prepared, targets_only), k);
  return out;
}

}  // namespace trajcast
