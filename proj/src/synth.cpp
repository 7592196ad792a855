#include "trajcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace trajcast {

void SynthConfig::validate() const {
  if (num_agents < 1 || num_agents > 16)
    throw std::invalid_argument("synth: num_agents must be in [1,16]");
  if (noise_sigma < 0.0) throw std::invalid_argument("synth: noise_sigma must be >= 0");
  if (timestamp_jitter < 0.0 || timestamp_jitter >= 0.05)
    throw std::invalid_argument("synth: timestamp_jitter must be in [0, 0.05)");
  if (t_obs < 2) throw std::invalid_argument("synth: t_obs must be >= 2");
  if (horizon < 0) throw std::invalid_argument("synth: horizon must be >= 0");
}

namespace {

constexpr double kStep = 0.1;  // nominal sampling period, seconds

Lanelet make_lanelet(std::string id, const std::vector<Vec2>& pts, SemanticAttributes sem) {
  Lanelet l;
  l.lanelet_id = std::move(id);
  l.centerline = pts;
  l.semantics = sem;
  return l;
}

/// Evenly spaced 10-point lanelet between two points.
Lanelet straight_lanelet(std::string id, Vec2 a, Vec2 b, SemanticAttributes sem = {}) {
  std::vector<Vec2> pts;
  for (int k = 0; k < Lanelet::kCenterlinePoints; ++k) {
    double u = static_cast<double>(k) / (Lanelet::kCenterlinePoints - 1);
    pts.push_back({a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u});
  }
  return make_lanelet(std::move(id), pts, sem);
}

struct Route {
  std::vector<Vec2> polyline;  // concatenated centerlines, duplicates removed
  double speed_lo = 4.0, speed_hi = 8.0;

  double length() const {
    double len = 0.0;
    for (size_t k = 0; k + 1 < polyline.size(); ++k) len += (polyline[k + 1] - polyline[k]).norm();
    return len;
  }

  Vec2 at(double s) const {
    if (s <= 0.0) return polyline.front();
    for (size_t k = 0; k + 1 < polyline.size(); ++k) {
      double seg = (polyline[k + 1] - polyline[k]).norm();
      if (s <= seg) return polyline[k] + (polyline[k + 1] - polyline[k]) * (s / seg);
      s -= seg;
    }
    return polyline.back();
  }
};

Route route_from(const std::vector<const Lanelet*>& chain) {
  Route r;
  for (const auto* l : chain) {
    for (const auto& p : l->centerline) {
      if (!r.polyline.empty() && (p - r.polyline.back()).norm() < 1e-12) continue;
      r.polyline.push_back(p);
    }
  }
  return r;
}

struct Layout {
  std::vector<Lanelet> lanelets;
  std::vector<Route> routes;
  double offset_base = 2.0, offset_spacing = 6.5;
};

Layout straight_layout() {
  Layout out;
  for (int lane = 0; lane < 2; ++lane) {
    double y = lane == 0 ? 0.0 : 3.5;
    std::string p = lane == 0 ? "st_a" : "st_b";
    out.lanelets.push_back(straight_lanelet(p + "0", {-54, y}, {-18, y}));
    out.lanelets.push_back(straight_lanelet(p + "1", {-18, y}, {18, y}));
    out.lanelets.push_back(straight_lanelet(p + "2", {18, y}, {54, y}));
  }
  out.routes.push_back(route_from({&out.lanelets[0], &out.lanelets[1], &out.lanelets[2]}));
  out.routes.push_back(route_from({&out.lanelets[3], &out.lanelets[4], &out.lanelets[5]}));
  return out;
}

Layout curve_layout() {
  Layout out;
  constexpr double r = 40.0;
  SemanticAttributes sem;
  sem.turn = TurnDirection::kLeft;
  // Quarter arc split into 3 lanelets of 9 chords each.
  for (int l = 0; l < 3; ++l) {
    std::vector<Vec2> pts;
    for (int k = 0; k <= 9; ++k) {
      double theta = -M_PI / 2.0 + (M_PI / 2.0) * (l * 9 + k) / 27.0;
      pts.push_back({r * std::cos(theta), r * std::sin(theta)});
    }
    out.lanelets.push_back(make_lanelet("cv" + std::to_string(l), pts, sem));
  }
  out.routes.push_back(route_from({&out.lanelets[0], &out.lanelets[1], &out.lanelets[2]}));
  out.routes[0].speed_lo = 2.0;
  out.routes[0].speed_hi = 4.0;
  out.offset_base = 1.0;
  out.offset_spacing = 2.4;
  return out;
}

Layout intersection_layout() {
  Layout out;
  SemanticAttributes box;
  box.is_intersection = true;
  box.traffic_control = true;
  const double lane_off = 1.75, edge = 6.0, arm = 42.0;
  // Four crossing routes, right-hand traffic: in-arm, crossing box, out-arm.
  struct Arm {
    std::string id;
    Vec2 in0, in1, x1, out1;
  };
  std::vector<Arm> arms = {
      {"eb", {-arm, -lane_off}, {-edge, -lane_off}, {edge, -lane_off}, {arm, -lane_off}},
      {"wb", {arm, lane_off}, {edge, lane_off}, {-edge, lane_off}, {-arm, lane_off}},
      {"nb", {lane_off, -arm}, {lane_off, -edge}, {lane_off, edge}, {lane_off, arm}},
      {"sb", {-lane_off, arm}, {-lane_off, edge}, {-lane_off, -edge}, {-lane_off, -arm}},
  };
  for (const auto& a : arms) {
    out.lanelets.push_back(straight_lanelet(a.id + "_in", a.in0, a.in1));
    out.lanelets.push_back(straight_lanelet(a.id + "_x", a.in1, a.x1, box));
    out.lanelets.push_back(straight_lanelet(a.id + "_out", a.x1, a.out1));
  }
  for (int r = 0; r < 4; ++r) {
    out.routes.push_back(
        route_from({&out.lanelets[r * 3], &out.lanelets[r * 3 + 1], &out.lanelets[r * 3 + 2]}));
    out.routes.back().speed_lo = 4.0;
    out.routes.back().speed_hi = 7.0;
  }
  out.offset_spacing = 8.0;
  return out;
}

}  // namespace

std::string road_template_name(RoadTemplate t) {
  switch (t) {
    case RoadTemplate::kStraight: return "straight";
    case RoadTemplate::kCurve: return "curve";
    case RoadTemplate::kIntersection: return "intersection";
  }
  return "straight";
}

RoadTemplate road_template_from_name(const std::string& s) {
  if (s == "straight") return RoadTemplate::kStraight;
  if (s == "curve") return RoadTemplate::kCurve;
  if (s == "intersection") return RoadTemplate::kIntersection;
  throw std::invalid_argument("unknown road template '" + s + "'");
}

Scene synth_scene(uint64_t seed, const SynthConfig& config) {
  config.validate();
  Layout layout;
  switch (config.road) {
    case RoadTemplate::kStraight: layout = straight_layout(); break;
    case RoadTemplate::kCurve: layout = curve_layout(); break;
    case RoadTemplate::kIntersection: layout = intersection_layout(); break;
  }

  std::mt19937_64 rng(seed);
  Scene scene;
  scene.scene_id = road_template_name(config.road) + "_" + std::to_string(seed);
  scene.t_obs = config.t_obs;
  scene.horizon = config.horizon;
  scene.lanelets = layout.lanelets;

  std::vector<int> per_route(layout.routes.size(), 0);
  int steps = config.t_obs + config.horizon;
  for (int i = 0; i < config.num_agents; ++i) {
    const size_t ri = i % layout.routes.size();
    const Route& route = layout.routes[ri];
    double offset = layout.offset_base + layout.offset_spacing * per_route[ri]++;
    std::uniform_real_distribution<double> speed_dist(route.speed_lo, route.speed_hi);
    double v0 = speed_dist(rng);

    AgentTrack a;
    a.agent_id = "a" + std::to_string(i);
    a.object_type = ObjectType::kVehicle;
    a.is_target = i == 0;

    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double s = offset, v = v0, accel = 0.0;
    for (int k = 0; k < steps; ++k) {
      double jitter = config.timestamp_jitter > 0.0 ? config.timestamp_jitter * unit(rng) : 0.0;
      Vec2 p = route.at(s);
      if (config.noise_sigma > 0.0) {
        p.x += config.noise_sigma * noise(rng);
        p.y += config.noise_sigma * noise(rng);
      }
      a.samples.push_back({kStep * k + jitter, p.x, p.y});
      a.observed.push_back(true);
      // Smoothed speed profile; bounded so the track stays on the route.
      accel = std::clamp(0.9 * accel + 0.5 * unit(rng), -1.5, 1.5);
      v = std::clamp(v + accel * kStep, 0.8 * v0, 1.1 * v0);
      s += v * kStep;
    }
    scene.agents.push_back(std::move(a));
  }
  validate_scene(scene);
  return scene;
}

}  // namespace trajcast
