#include "trajcast/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trajcast {

double laplace_logpdf(double x, double mu, double b) {
  return -std::log(2.0 * b) - std::abs(x - mu) / b;
}

std::vector<AgentTargets> make_targets(const Scene& scene, const Prediction& pred) {
  if (scene.agents.size() != pred.agents.size())
    throw std::invalid_argument("make_targets: prediction/scene agent count mismatch");
  const int h = scene.horizon;
  std::vector<AgentTargets> out(scene.agents.size());
  for (size_t i = 0; i < scene.agents.size(); ++i) {
    AgentTargets& tg = out[i];
    tg.mask.assign(h, false);
    tg.local = Tensor::zeros({h, 2});
    tg.world.assign(h, {});
    if (!pred.agents[i].valid) continue;
    const AgentTrack& track = scene.agents[i];
    const Vec2 origin = pred.agents[i].origin;
    const Rotation2 rot = pred.agents[i].rot;
    for (int t = 0; t < h; ++t) {
      int step = scene.t_obs + t;
      if (!track.observed_at(step)) continue;
      tg.mask[t] = true;
      tg.valid = true;
      tg.last_step = t;
      Vec2 p{track.samples[step].x, track.samples[step].y};
      tg.world[t] = p;
      Vec2 local = rot.into_frame(p - origin);
      tg.local.data[t * 2] = local.x;
      tg.local.data[t * 2 + 1] = local.y;
    }
  }
  return out;
}

namespace {

double endpoint_error(const AgentPrediction& ap, const AgentTargets& tg, int f) {
  int t = tg.last_step;
  double dx = ap.modes[f].mu.value().at(t, 0) - tg.local.at(t, 0);
  double dy = ap.modes[f].mu.value().at(t, 1) - tg.local.at(t, 1);
  return std::hypot(dx, dy);
}

}  // namespace

std::vector<int> best_modes(const Prediction& pred, const std::vector<AgentTargets>& targets) {
  std::vector<int> out(pred.agents.size(), -1);
  for (size_t i = 0; i < pred.agents.size(); ++i) {
    const AgentPrediction& ap = pred.agents[i];
    if (!ap.valid || !targets[i].valid) continue;
    int best = 0;
    double best_err = endpoint_error(ap, targets[i], 0);
    for (size_t f = 1; f < ap.modes.size(); ++f) {
      double err = endpoint_error(ap, targets[i], static_cast<int>(f));
      if (err < best_err) {
        best_err = err;
        best = static_cast<int>(f);
      }
    }
    out[i] = best;
  }
  return out;
}

Tensor soft_targets(const Prediction& pred, const std::vector<AgentTargets>& targets) {
  int64_t n = static_cast<int64_t>(pred.agents.size());
  int64_t f_modes = 0;
  for (const auto& ap : pred.agents)
    if (ap.valid) f_modes = static_cast<int64_t>(ap.modes.size());
  Tensor out = Tensor::zeros({n, std::max<int64_t>(f_modes, 1)});
  for (int64_t i = 0; i < n; ++i) {
    const AgentPrediction& ap = pred.agents[i];
    if (!ap.valid || !targets[i].valid) continue;
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> neg(f_modes);
    for (int64_t f = 0; f < f_modes; ++f) {
      neg[f] = -endpoint_error(ap, targets[i], static_cast<int>(f));
      mx = std::max(mx, neg[f]);
    }
    double denom = 0.0;
    for (int64_t f = 0; f < f_modes; ++f) denom += std::exp(neg[f] - mx);
    for (int64_t f = 0; f < f_modes; ++f)
      out.data[i * f_modes + f] = std::exp(neg[f] - mx) / denom;
  }
  return out;
}

Var regression_loss(const Prediction& pred, const std::vector<AgentTargets>& targets,
                    const std::vector<int>* fixed_modes) {
  if (pred.agents.size() != targets.size())
    throw std::invalid_argument("regression_loss: size mismatch");
  std::vector<int> modes = fixed_modes ? *fixed_modes : best_modes(pred, targets);
  std::vector<Var> terms;
  int64_t steps = 0;
  for (size_t i = 0; i < pred.agents.size(); ++i) {
    const AgentPrediction& ap = pred.agents[i];
    const AgentTargets& tg = targets[i];
    if (!ap.valid || !tg.valid || modes[i] < 0) continue;
    const ModePrediction& mp = ap.modes[modes[i]];
    int64_t h = mp.mu.rows();
    Tensor mask = Tensor::zeros({h, 2});
    for (int64_t t = 0; t < h; ++t) {
      if (!tg.mask[t]) continue;
      mask.data[t * 2] = mask.data[t * 2 + 1] = 1.0;
      ++steps;
    }
    Var x = constant(tg.local);
    // -log p = log(2b) + |x - mu| / b, per coordinate.
    Var nll = add(log_v(scale(mp.b, 2.0)), div(abs_v(sub(x, mp.mu)), mp.b));
    terms.push_back(sum(mul(nll, constant(mask))));
  }
  if (terms.empty()) return constant(Tensor::scalar(0.0));
  Var total = terms[0];
  for (size_t k = 1; k < terms.size(); ++k) total = add(total, terms[k]);
  return scale(total, 1.0 / static_cast<double>(steps));
}

Var classification_loss(const Prediction& pred, const std::vector<AgentTargets>& targets,
                        const Tensor* fixed_soft) {
  Tensor q = fixed_soft ? *fixed_soft : soft_targets(pred, targets);
  std::vector<Var> terms;
  int64_t agents = 0;
  for (size_t i = 0; i < pred.agents.size(); ++i) {
    const AgentPrediction& ap = pred.agents[i];
    if (!ap.valid || !targets[i].valid) continue;
    int64_t f_modes = ap.pi.cols();
    Tensor qi = Tensor::zeros({1, f_modes});
    for (int64_t f = 0; f < f_modes; ++f) qi.data[f] = q.at(i, f);
    terms.push_back(neg(sum(mul(log_v(ap.pi), constant(qi)))));
    ++agents;
  }
  if (terms.empty()) return constant(Tensor::scalar(0.0));
  Var total = terms[0];
  for (size_t k = 1; k < terms.size(); ++k) total = add(total, terms[k]);
  return scale(total, 1.0 / static_cast<double>(agents));
}

LossResult total_loss(const Prediction& pred, const std::vector<AgentTargets>& targets,
                      const std::vector<int>* fixed_modes, const Tensor* fixed_soft) {
  LossResult r;
  r.modes = fixed_modes ? *fixed_modes : best_modes(pred, targets);
  r.regression = regression_loss(pred, targets, &r.modes);
  r.classification = classification_loss(pred, targets, fixed_soft);
  r.total = add(r.regression, r.classification);
  return r;
}

}  // namespace trajcast
