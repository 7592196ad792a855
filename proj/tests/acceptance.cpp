// Acceptance gate: every release-blocking property, one verdict line each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "reference.hpp"
#include "trajcast/bench.hpp"
#include "trajcast/loss.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/model.hpp"
#include "trajcast/svg_plot.hpp"
#include "trajcast/synth.hpp"
#include "trajcast/train.hpp"

using namespace trajcast;

namespace {

int failures = 0;

void verdict(const std::string& name, const std::function<bool()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string note;
  try {
    ok = body();
  } catch (const std::exception& e) {
    note = std::string(" (exception: ") + e.what() + ")";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s - %s [%.1fs]%s\n", ok ? "PASS" : "FAIL", name.c_str(), secs, note.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

Tensor random_tensor(std::vector<int64_t> shape, uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

Scene rigidly_moved(const Scene& s, double angle, Vec2 shift) {
  Scene out = s;
  Rotation2 r = Rotation2::from_angle(angle);
  for (auto& a : out.agents)
    for (auto& sample : a.samples) {
      Vec2 p = r.out_of_frame({sample.x, sample.y}) + shift;
      sample.x = p.x;
      sample.y = p.y;
    }
  for (auto& l : out.lanelets)
    for (auto& p : l.centerline) p = r.out_of_frame(p) + shift;
  return out;
}

// --- criterion 1: invariance ------------------------------------------------

bool invariance_suite() {
  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.temporal_layers = 2;
  cfg.global_layers = 2;
  cfg.modes = 2;
  cfg.t_obs = 10;
  cfg.horizon = 6;
  Model model(cfg, 17);

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ang(-3.1, 3.1), off(-300.0, 300.0);
  RoadTemplate roads[] = {RoadTemplate::kStraight, RoadTemplate::kCurve,
                          RoadTemplate::kIntersection};
  for (int sc = 0; sc < 50; ++sc) {
    SynthConfig synth;
    synth.road = roads[sc % 3];
    synth.num_agents = 2 + sc % 7;
    synth.noise_sigma = 0.02 + 0.01 * (sc % 5);
    synth.timestamp_jitter = (sc % 2) ? 0.01 : 0.0;
    synth.t_obs = 10;
    synth.horizon = 6;
    Scene base = synth_scene(1000 + sc, synth);
    Prediction ref_pred = model.forward(featurize_scene(base));

    for (int trial = 0; trial < 10; ++trial) {
      Scene moved = rigidly_moved(base, ang(rng), {off(rng), off(rng)});
      Prediction p = model.forward(featurize_scene(moved));
      for (size_t i = 0; i < ref_pred.agents.size(); ++i) {
        const auto& a = ref_pred.agents[i];
        const auto& b = p.agents[i];
        if (a.valid != b.valid) return false;
        if (!a.valid) continue;
        for (size_t k = 0; k < a.pi.value().data.size(); ++k)
          if (!close(a.pi.value().data[k], b.pi.value().data[k], 1e-6)) return false;
        for (size_t f = 0; f < a.modes.size(); ++f) {
          for (size_t k = 0; k < a.modes[f].mu.value().data.size(); ++k) {
            if (!close(a.modes[f].mu.value().data[k], b.modes[f].mu.value().data[k], 1e-6))
              return false;
            if (!close(a.modes[f].b.value().data[k], b.modes[f].b.value().data[k], 1e-6))
              return false;
          }
        }
      }
    }
  }
  return true;
}

// --- criterion 2: end-to-end gradients --------------------------------------

bool gradient_suite() {
  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.temporal_layers = 2;
  cfg.global_layers = 2;
  cfg.modes = 2;
  cfg.t_obs = 5;
  cfg.horizon = 4;
  Model model(cfg, 23);

  SynthConfig synth;
  synth.num_agents = 3;
  synth.noise_sigma = 0.05;
  synth.t_obs = 5;
  synth.horizon = 4;
  Scene scene = synth_scene(9, synth);
  SceneFeatures sf = featurize_scene(scene);

  // Pin the discrete choices so the objective is smooth at the test point.
  Prediction p0 = model.forward(sf);
  auto targets = make_targets(scene, p0);
  std::vector<int> fixed_modes = best_modes(p0, targets);
  Tensor fixed_soft = soft_targets(p0, targets);

  auto loss_value = [&]() {
    Prediction p = model.forward(sf);
    return total_loss(p, make_targets(scene, p), &fixed_modes, &fixed_soft)
        .total.value()
        .data[0];
  };

  model.params().zero_grad();
  Prediction p = model.forward(sf);
  LossResult lr = total_loss(p, make_targets(scene, p), &fixed_modes, &fixed_soft);
  backward(lr.total);

  const double h = 1e-5;
  double worst = 0.0;
  std::string worst_name;
  for (auto& [name, param] : model.params().all()) {
    const Tensor& grad = param.grad();
    size_t n = param.value().data.size();
    std::vector<size_t> probes = {0, n / 2, n - 1};
    for (size_t e : probes) {
      double an = grad.data.empty() ? 0.0 : grad.data[e];
      double saved = param.value().data[e];
      param.value_mut().data[e] = saved + h;
      double up = loss_value();
      param.value_mut().data[e] = saved - h;
      double down = loss_value();
      param.value_mut().data[e] = saved;
      double fd = (up - down) / (2.0 * h);
      double rel = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
      if (rel > worst) {
        worst = rel;
        worst_name = name;
      }
    }
  }
  std::fprintf(stderr, "  gradient check: worst rel err %.3g (%s)\n", worst,
               worst_name.c_str());
  return worst < 1e-4;
}

// --- criterion 3: attention against brute-force oracles ----------------------

bool attention_oracles() {
  ModelConfig cfg;
  cfg.hidden = 4;
  cfg.heads = 1;
  Model m1(cfg, 31);
  Tensor zq = random_tensor({2, 4}, 1);
  Tensor zk = random_tensor({4, 4}, 2);

  auto rows_close = [](const Var& got, const ref::Rows& want) {
    for (int64_t i = 0; i < got.rows(); ++i)
      for (int64_t j = 0; j < got.cols(); ++j)
        if (std::abs(got.value().at(i, j) - want[i][j]) > 1e-10) return false;
    return true;
  };

  std::vector<std::vector<bool>> ok(2, std::vector<bool>(4, true));
  Var out = m1.attention_layer("acc", Var(zq), Var(zk), Tensor::zeros({2, 4}));
  if (!rows_close(out, ref::attention_layer(m1.params(), "acc", ref::tensor_rows(zq),
                                            ref::tensor_rows(zk), ok, 1)))
    return false;

  cfg.heads = 2;
  Model m2(cfg, 32);
  Tensor mask = Tensor::zeros({2, 4});
  mask.at(0, 3) = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<bool>> ok2 = {{true, true, true, false},
                                        {true, true, true, true}};
  Var out2 = m2.attention_layer("acc", Var(zq), Var(zk), mask);
  if (!rows_close(out2, ref::attention_layer(m2.params(), "acc", ref::tensor_rows(zq),
                                             ref::tensor_rows(zk), ok2, 2)))
    return false;

  // Weighted keys, renormalized to a convex combination.
  std::vector<double> w = {0.4, 0.3, 0.2, 0.1};
  Tensor logw_t({1, 4}, {std::log(0.4), std::log(0.3), std::log(0.2), std::log(0.1)});
  Var logw(logw_t);
  Var out3 = m2.attention_layer("accw", Var(zq), Var(zk), Tensor::zeros({2, 4}), &logw);
  if (!rows_close(out3, ref::attention_layer(m2.params(), "accw", ref::tensor_rows(zq),
                                             ref::tensor_rows(zk), ok, 2, &w)))
    return false;

  // Empty neighborhood: gated self path only.
  Var out4 = m2.attention_layer("acce", Var(zq), Var(), Tensor::zeros({2, 0}));
  return rows_close(out4,
                    ref::attention_layer(m2.params(), "acce", ref::tensor_rows(zq), {}, {}, 2));
}

// --- criterion 4: temporal causality -----------------------------------------

bool causality() {
  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.temporal_layers = 3;
  Model m(cfg, 41);
  std::vector<Var> seq;
  for (int t = 0; t < 8; ++t) seq.emplace_back(random_tensor({1, 16}, 300 + t));
  std::vector<bool> valid(8, true);
  valid[4] = false;  // include a gap

  auto full = m.temporal("acc.tmp", seq, valid, false);
  for (int cut = 2; cut <= 6; ++cut) {
    std::vector<Var> head(seq.begin(), seq.begin() + cut);
    std::vector<bool> head_valid(valid.begin(), valid.begin() + cut);
    auto part = m.temporal("acc.tmp", head, head_valid, false);
    for (int t = 0; t < cut; ++t)
      for (int j = 0; j < 16; ++j)
        if (std::abs(full[t].value().at(0, j) - part[t].value().at(0, j)) > 1e-9)
          return false;
  }
  return true;
}

// --- criterion 5: losses against brute-force enumeration ---------------------

bool loss_fixtures() {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> pos(-3.0, 3.0), scl(0.5, 2.0);
  Prediction pred;
  pred.agents.resize(2);
  std::vector<AgentTargets> targets(2);
  for (int i = 0; i < 2; ++i) {
    auto& ap = pred.agents[i];
    ap.valid = true;
    ap.rot = Rotation2::from_angle(0.2 * i);
    for (int f = 0; f < 2; ++f) {
      ModePrediction mp;
      Tensor mu = Tensor::zeros({3, 2}), b = Tensor::zeros({3, 2});
      for (auto& v : mu.data) v = pos(rng);
      for (auto& v : b.data) v = scl(rng);
      mp.mu = Var(mu, true);
      mp.b = Var(b, true);
      ap.modes.push_back(std::move(mp));
    }
    ap.pi = Var(Tensor({1, 2}, {0.25 + 0.1 * i, 0.75 - 0.1 * i}), true);
    auto& tg = targets[i];
    tg.valid = true;
    tg.mask = {true, i == 1, true};
    tg.local = Tensor::zeros({3, 2});
    tg.world.assign(3, {});
    for (int t = 0; t < 3; ++t) {
      if (!tg.mask[t]) continue;
      tg.local.at(t, 0) = pos(rng);
      tg.local.at(t, 1) = pos(rng);
      tg.last_step = t;
    }
  }

  // Brute force over all modes and steps.
  double want_reg = 0.0;
  int steps = 0;
  double want_cls = 0.0;
  for (int i = 0; i < 2; ++i) {
    double err[2];
    for (int f = 0; f < 2; ++f) {
      int t = targets[i].last_step;
      double dx = pred.agents[i].modes[f].mu.value().at(t, 0) - targets[i].local.at(t, 0);
      double dy = pred.agents[i].modes[f].mu.value().at(t, 1) - targets[i].local.at(t, 1);
      err[f] = std::sqrt(dx * dx + dy * dy);
    }
    int best = err[0] <= err[1] ? 0 : 1;
    for (int t = 0; t < 3; ++t) {
      if (!targets[i].mask[t]) continue;
      for (int d = 0; d < 2; ++d)
        want_reg -= laplace_logpdf(targets[i].local.at(t, d),
                                   pred.agents[i].modes[best].mu.value().at(t, d),
                                   pred.agents[i].modes[best].b.value().at(t, d));
      ++steps;
    }
    double q0 = std::exp(-err[0]) / (std::exp(-err[0]) + std::exp(-err[1]));
    want_cls -= q0 * std::log(pred.agents[i].pi.value().data[0]) +
                (1 - q0) * std::log(pred.agents[i].pi.value().data[1]);
  }
  want_reg /= steps;
  want_cls /= 2.0;

  LossResult lr = total_loss(pred, targets);
  return std::abs(lr.regression.value().data[0] - want_reg) < 1e-10 &&
         std::abs(lr.classification.value().data[0] - want_cls) < 1e-10 &&
         std::abs(lr.total.value().data[0] - (want_reg + want_cls)) < 1e-10;
}

// --- criterion 6: overfit smoke test ------------------------------------------

bool overfit_smoke() {
  SynthConfig synth;
  synth.num_agents = 1;
  synth.noise_sigma = 0.0;
  Scene scene = synth_scene(7, synth);

  ModelConfig cfg;
  cfg.hidden = 32;
  cfg.heads = 4;
  cfg.temporal_layers = 2;
  cfg.global_layers = 2;
  cfg.modes = 2;
  Model model(cfg, 1);

  TrainConfig tc;
  tc.epochs = 500;  // one scene -> one step per epoch
  tc.base_lr = 1e-2;
  tc.log_every = 0;
  TrainResult r = train(model, {scene}, tc);

  double first = r.loss_history.front();
  double last = r.loss_history.back();
  double ade = r.train_metrics.min_ade;
  std::fprintf(stderr, "  overfit: loss %.3f -> %.3f over %zu steps, minADE %.4f m\n", first,
               last, r.loss_history.size(), ade);
  return r.loss_history.size() == 500 && first > 0.0 && last <= first / 10.0 && ade < 0.1;
}

// --- criterion 7: lane-candidate filter benchmark ------------------------------

bool filter_benchmark() {
  std::vector<Scene> scenes;
  for (int k = 0; k < 20; ++k) {
    SynthConfig synth;
    synth.road = RoadTemplate::kIntersection;
    synth.num_agents = 8;
    synth.noise_sigma = 0.05;
    scenes.push_back(synth_scene(2000 + k, synth));
  }
  ModelConfig cfg;
  cfg.hidden = 64;
  cfg.heads = 4;
  cfg.temporal_layers = 2;
  cfg.global_layers = 2;
  cfg.modes = 2;
  cfg.radius_stage1 = 50.0;
  Model model(cfg, 2);
  BenchReport r = run_filter_bench(model, scenes);
  std::fprintf(stderr,
               "  filter: usage %.3f, lane time %.2fs vs %.2fs, minADE %.3f vs %.3f "
               "(delta %.2f%%)\n",
               r.usage_rate, r.lane_seconds_filtered, r.lane_seconds_unfiltered,
               r.min_ade_filtered, r.min_ade_unfiltered, 100.0 * r.min_ade_rel_delta);
  return r.usage_rate < 1.0 && r.lane_seconds_filtered < r.lane_seconds_unfiltered &&
         r.min_ade_rel_delta < 0.2;
}

// --- criterion 8: displacement metrics ----------------------------------------

bool metrics_checks() {
  Prediction pred;
  pred.agents.resize(1);
  auto& ap = pred.agents[0];
  ap.valid = true;
  ap.rot = Rotation2::from_angle(0.0);
  ModePrediction m0, m1;
  m0.mu = Var(Tensor({2, 2}, {1.0, 0.0, 2.0, 0.0}));
  m0.b = Var(Tensor::full({2, 2}, 1.0));
  m1.mu = Var(Tensor({2, 2}, {1.0, 1.0, 2.0, 3.0}));
  m1.b = Var(Tensor::full({2, 2}, 1.0));
  ap.modes = {m0, m1};
  ap.pi = Var(Tensor({1, 2}, {0.1, 0.9}));

  std::vector<AgentTargets> tg(1);
  tg[0].valid = true;
  tg[0].mask = {true, true};
  tg[0].local = Tensor({2, 2}, {1.0, 0.0, 2.0, 0.0});
  tg[0].world = {{1.0, 0.0}, {2.0, 0.0}};
  tg[0].last_step = 1;

  Metrics both = evaluate(pred, tg, {true}, 2);
  if (std::abs(both.min_ade) > 1e-12 || std::abs(both.min_fde) > 1e-12 ||
      both.miss_rate != 0.0)
    return false;
  Metrics top1 = evaluate(pred, tg, {true}, 1);  // most probable mode is the bad one
  if (std::abs(top1.min_ade - 2.0) > 1e-12 || std::abs(top1.min_fde - 3.0) > 1e-12 ||
      top1.miss_rate != 1.0)
    return false;
  try {
    evaluate(pred, tg, {true}, 3);
    return false;  // k > modes must throw
  } catch (const std::exception&) {
  }
  return true;
}

// --- criterion 9: determinism ---------------------------------------------------

bool determinism() {
  std::vector<Scene> scenes;
  for (int k = 0; k < 2; ++k) {
    SynthConfig synth;
    synth.num_agents = 3;
    synth.noise_sigma = 0.05;
    synth.t_obs = 10;
    synth.horizon = 6;
    scenes.push_back(synth_scene(3000 + k, synth));
  }
  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.temporal_layers = 2;
  cfg.global_layers = 2;
  cfg.modes = 2;
  cfg.t_obs = 10;
  cfg.horizon = 6;

  TrainConfig tc;
  tc.epochs = 15;
  tc.base_lr = 1e-3;
  tc.log_every = 0;

  Model a(cfg, 3);
  Model b(cfg, 3);
  TrainResult ra = train(a, scenes, tc);
  TrainResult rb = train(b, scenes, tc);
  if (ra.loss_history != rb.loss_history) return false;

  Prediction pa = a.forward(featurize_scene(scenes[0]));
  Prediction pb = b.forward(featurize_scene(scenes[0]));
  std::string svg_a = render_scene_svg(scenes[0], &pa);
  std::string svg_b = render_scene_svg(scenes[0], &pb);
  return svg_a == svg_b;
}

}  // namespace

int main() {
  verdict("invariance under rigid motion (50 scenes x 10 transforms, 1e-6)", invariance_suite);
  verdict("end-to-end gradients vs finite differences (rel err < 1e-4)", gradient_suite);
  verdict("attention layers vs brute-force oracles (1e-10)", attention_oracles);
  verdict("temporal causality under truncation (1e-9)", causality);
  verdict("losses vs brute-force enumeration (1e-10)", loss_fixtures);
  verdict("overfit smoke test (500 steps, 10x loss drop, minADE < 0.1 m)", overfit_smoke);
  verdict("lane-filter benchmark (usage < 1, faster, |dminADE| < 20%)", filter_benchmark);
  verdict("displacement metrics fixtures", metrics_checks);
  verdict("bit-exact determinism (loss history and SVG bytes)", determinism);
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
