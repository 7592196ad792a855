#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "reference.hpp"
#include "trajcast/loss.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/model.hpp"
#include "trajcast/synth.hpp"

using namespace trajcast;

namespace {

Tensor random_tensor(std::vector<int64_t> shape, uint64_t seed, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

// Two agents, two modes, three future steps, with one missing step.
struct Fixture {
  Prediction pred;
  std::vector<AgentTargets> targets;

  Fixture() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::uniform_real_distribution<double> scale_d(0.5, 2.0);
    pred.agents.resize(2);
    targets.resize(2);
    for (int i = 0; i < 2; ++i) {
      AgentPrediction& ap = pred.agents[i];
      ap.valid = true;
      ap.origin = {pos(rng), pos(rng)};
      ap.rot = Rotation2::from_angle(0.3 + 0.4 * i);
      for (int f = 0; f < 2; ++f) {
        ModePrediction mp;
        Tensor mu = Tensor::zeros({3, 2});
        Tensor b = Tensor::zeros({3, 2});
        for (auto& v : mu.data) v = pos(rng);
        for (auto& v : b.data) v = scale_d(rng);
        mp.mu = Var(mu, true);
        mp.b = Var(b, true);
        ap.modes.push_back(std::move(mp));
      }
      double p0 = 0.3 + 0.2 * i;
      ap.pi = Var(Tensor({1, 2}, {p0, 1.0 - p0}), true);

      AgentTargets& tg = targets[i];
      tg.valid = true;
      tg.mask = {true, i == 0, true};  // agent 1 misses step 1
      tg.local = Tensor::zeros({3, 2});
      tg.world.assign(3, {});
      for (int t = 0; t < 3; ++t) {
        if (!tg.mask[t]) continue;
        tg.local.at(t, 0) = pos(rng);
        tg.local.at(t, 1) = pos(rng);
        tg.world[t] = ap.origin +
                      ap.rot.out_of_frame({tg.local.at(t, 0), tg.local.at(t, 1)});
        tg.last_step = t;
      }
    }
  }
};

double ref_endpoint(const AgentPrediction& ap, const AgentTargets& tg, int f) {
  int t = tg.last_step;
  double dx = ap.modes[f].mu.value().at(t, 0) - tg.local.at(t, 0);
  double dy = ap.modes[f].mu.value().at(t, 1) - tg.local.at(t, 1);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

TEST_CASE("Laplace log-density closed forms") {
  CHECK(laplace_logpdf(0.0, 0.0, 0.5) == doctest::Approx(-std::log(1.0)).epsilon(1e-15));
  CHECK(laplace_logpdf(1.0, 0.0, 1.0) == doctest::Approx(-std::log(2.0) - 1.0).epsilon(1e-15));
  // b = 2, |x - mu| = 2: -log(4) - 1 = -2 log 2 - 1.
  CHECK(laplace_logpdf(3.0, 1.0, 2.0) ==
        doctest::Approx(-2.0 * std::log(2.0) - 1.0).epsilon(1e-15));
}

TEST_CASE("gru cell matches the scalar recurrence oracle") {
  ModelConfig cfg;
  cfg.hidden = 1;
  cfg.heads = 1;
  cfg.modes = 1;
  Model m(cfg, 5);
  double h = 0.2;
  double x = -0.7;
  Var hv(Tensor({1, 1}, {h}));
  Var xv(Tensor({1, 1}, {x}));
  for (int step = 0; step < 4; ++step) {
    hv = m.gru_cell("g", xv, hv);
    h = ref::gru_scalar(m.params(), "g", x, h);
    CHECK(hv.value().data[0] == doctest::Approx(h).epsilon(1e-14));
  }
}

TEST_CASE("winner-take-all picks the smallest endpoint error") {
  Fixture fx;
  auto modes = best_modes(fx.pred, fx.targets);
  for (int i = 0; i < 2; ++i) {
    double e0 = ref_endpoint(fx.pred.agents[i], fx.targets[i], 0);
    double e1 = ref_endpoint(fx.pred.agents[i], fx.targets[i], 1);
    CHECK(modes[i] == (e0 <= e1 ? 0 : 1));
  }
}

TEST_CASE("regression loss matches brute-force enumeration") {
  Fixture fx;
  Var loss = regression_loss(fx.pred, fx.targets);

  double want = 0.0;
  int steps = 0;
  for (int i = 0; i < 2; ++i) {
    double e0 = ref_endpoint(fx.pred.agents[i], fx.targets[i], 0);
    double e1 = ref_endpoint(fx.pred.agents[i], fx.targets[i], 1);
    int f = e0 <= e1 ? 0 : 1;
    const ModePrediction& mp = fx.pred.agents[i].modes[f];
    for (int t = 0; t < 3; ++t) {
      if (!fx.targets[i].mask[t]) continue;
      for (int d = 0; d < 2; ++d)
        want -= laplace_logpdf(fx.targets[i].local.at(t, d), mp.mu.value().at(t, d),
                               mp.b.value().at(t, d));
      ++steps;
    }
  }
  want /= steps;
  CHECK(loss.value().data[0] == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("classification loss matches brute-force cross entropy") {
  Fixture fx;
  Var loss = classification_loss(fx.pred, fx.targets);

  double want = 0.0;
  for (int i = 0; i < 2; ++i) {
    double e0 = ref_endpoint(fx.pred.agents[i], fx.targets[i], 0);
    double e1 = ref_endpoint(fx.pred.agents[i], fx.targets[i], 1);
    double q0 = std::exp(-e0) / (std::exp(-e0) + std::exp(-e1));
    want -= q0 * std::log(fx.pred.agents[i].pi.value().data[0]) +
            (1.0 - q0) * std::log(fx.pred.agents[i].pi.value().data[1]);
  }
  want /= 2.0;
  CHECK(loss.value().data[0] == doctest::Approx(want).epsilon(1e-10));

  LossResult total = total_loss(fx.pred, fx.targets);
  CHECK(total.total.value().data[0] ==
        doctest::Approx(total.regression.value().data[0] +
                        total.classification.value().data[0])
            .epsilon(1e-12));
}

TEST_CASE("soft targets are a distribution and the gradient skips them") {
  Fixture fx;
  Tensor q = soft_targets(fx.pred, fx.targets);
  for (int i = 0; i < 2; ++i)
    CHECK(q.at(i, 0) + q.at(i, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // The classification loss must not propagate into the locations.
  Var loss = classification_loss(fx.pred, fx.targets);
  backward(loss);
  CHECK(fx.pred.agents[0].modes[0].mu.grad().data.empty());
  CHECK_FALSE(fx.pred.agents[0].pi.grad().data.empty());
}

TEST_CASE("losses and metrics are invariant under mode permutation") {
  Fixture fx;
  Fixture swapped;
  for (int i = 0; i < 2; ++i) {
    std::swap(swapped.pred.agents[i].modes[0], swapped.pred.agents[i].modes[1]);
    double p0 = swapped.pred.agents[i].pi.value().data[0];
    double p1 = swapped.pred.agents[i].pi.value().data[1];
    swapped.pred.agents[i].pi = Var(Tensor({1, 2}, {p1, p0}), true);
  }
  CHECK(regression_loss(fx.pred, fx.targets).value().data[0] ==
        doctest::Approx(regression_loss(swapped.pred, swapped.targets).value().data[0])
            .epsilon(1e-12));
  CHECK(classification_loss(fx.pred, fx.targets).value().data[0] ==
        doctest::Approx(classification_loss(swapped.pred, swapped.targets).value().data[0])
            .epsilon(1e-12));
  std::vector<bool> all(2, true);
  Metrics ma = evaluate(fx.pred, fx.targets, all, 2);
  Metrics mb = evaluate(swapped.pred, swapped.targets, all, 2);
  CHECK(ma.min_ade == doctest::Approx(mb.min_ade).epsilon(1e-12));
  CHECK(ma.min_fde == doctest::Approx(mb.min_fde).epsilon(1e-12));
}

TEST_CASE("metrics on a hand-computed fixture") {
  // One agent, identity frame, two modes; mode probabilities favor mode 0.
  Prediction pred;
  pred.agents.resize(1);
  AgentPrediction& ap = pred.agents[0];
  ap.valid = true;
  ap.origin = {0.0, 0.0};
  ap.rot = Rotation2::from_angle(0.0);
  ModePrediction m0, m1;
  m0.mu = Var(Tensor({2, 2}, {1.0, 0.0, 2.0, 0.0}));   // on the x axis
  m0.b = Var(Tensor::full({2, 2}, 1.0));
  m1.mu = Var(Tensor({2, 2}, {1.0, 1.0, 2.0, 3.0}));   // 1 m then 3 m off in y
  m1.b = Var(Tensor::full({2, 2}, 1.0));
  ap.modes = {m0, m1};
  ap.pi = Var(Tensor({1, 2}, {0.9, 0.1}));

  std::vector<AgentTargets> tg(1);
  tg[0].valid = true;
  tg[0].mask = {true, true};
  tg[0].local = Tensor({2, 2}, {1.0, 0.0, 2.0, 0.0});
  tg[0].world = {{1.0, 0.0}, {2.0, 0.0}};
  tg[0].last_step = 1;

  Metrics both = evaluate(pred, tg, {true}, 2);
  CHECK(both.min_ade == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(both.min_fde == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(both.miss_rate == 0.0);

  // k = 1 keeps only the most probable mode (mode 0, exact).
  Metrics top1 = evaluate(pred, tg, {true}, 1);
  CHECK(top1.min_ade == doctest::Approx(0.0).epsilon(1e-12));

  // Flip probabilities: top-1 is now the bad mode, ADE = (1+3)/2, FDE = 3.
  ap.pi = Var(Tensor({1, 2}, {0.1, 0.9}));
  Metrics bad = evaluate(pred, tg, {true}, 1);
  CHECK(bad.min_ade == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(bad.min_fde == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(bad.miss_rate == 1.0);  // 3 m > 2 m threshold

  CHECK_THROWS(evaluate(pred, tg, {true}, 3));  // k > modes
}

TEST_CASE("metrics use the world frame") {
  // A rotated frame with a translation must give the same distances.
  Prediction pred;
  pred.agents.resize(1);
  AgentPrediction& ap = pred.agents[0];
  ap.valid = true;
  ap.origin = {10.0, -5.0};
  ap.rot = Rotation2::from_angle(1.1);
  ModePrediction m0;
  m0.mu = Var(Tensor({1, 2}, {3.0, 4.0}));
  m0.b = Var(Tensor::full({1, 2}, 1.0));
  ap.modes = {m0};
  ap.pi = Var(Tensor({1, 1}, {1.0}));

  std::vector<AgentTargets> tg(1);
  tg[0].valid = true;
  tg[0].mask = {true};
  tg[0].local = Tensor({1, 2}, {0.0, 0.0});
  tg[0].world = {ap.origin};
  tg[0].last_step = 0;

  Metrics m = evaluate(pred, tg, {true}, 1);
  CHECK(m.min_fde == doctest::Approx(5.0).epsilon(1e-12));  // |(3,4)| preserved
}

TEST_CASE("decoder emits positive scales and a mode distribution") {
  SynthConfig sc;
  sc.num_agents = 3;
  sc.noise_sigma = 0.05;
  sc.t_obs = 5;
  sc.horizon = 4;
  Scene s = synth_scene(4, sc);
  ModelConfig cfg;
  cfg.hidden = 8;
  cfg.heads = 2;
  cfg.temporal_layers = 2;
  cfg.global_layers = 2;
  cfg.modes = 2;
  cfg.t_obs = 5;
  cfg.horizon = 4;
  Model m(cfg, 6);
  Prediction pred = m.forward(featurize_scene(s));
  REQUIRE(pred.agents.size() == 3);
  for (const auto& ap : pred.agents) {
    REQUIRE(ap.valid);
    REQUIRE(ap.modes.size() == 2);
    double total = 0.0;
    for (double p : ap.pi.value().data) {
      CHECK(p > 0.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& mp : ap.modes) {
      CHECK(mp.mu.shape() == std::vector<int64_t>{4, 2});
      CHECK(mp.b.shape() == std::vector<int64_t>{4, 2});
      for (double b : mp.b.value().data) CHECK(b > 0.0);
    }
  }
}
