#include "trajcast/scene.hpp"

#include <algorithm>

namespace trajcast {

std::vector<LaneSegment> Lanelet::segments() const {
  std::vector<LaneSegment> out;
  out.reserve(centerline.size() - 1);
  for (size_t k = 0; k + 1 < centerline.size(); ++k) {
    LaneSegment s;
    s.segment_id = lanelet_id + "#" + std::to_string(k);
    s.start = centerline[k];
    s.end = centerline[k + 1];
    s.parent_lanelet = lanelet_id;
    s.semantics = semantics;
    out.push_back(std::move(s));
  }
  return out;
}

const AgentTrack& Scene::target() const {
  for (const auto& a : agents)
    if (a.is_target) return a;
  throw ValidationError("scene '" + scene_id + "' has no target agent");
}

void validate_scene(const Scene& scene) {
  if (scene.t_obs < 1) throw ValidationError("t_obs must be >= 1");
  if (scene.horizon < 0) throw ValidationError("horizon must be >= 0");
  int targets = 0;
  for (const auto& a : scene.agents) {
    if (a.is_target) ++targets;
    if (a.samples.size() != a.observed.size())
      throw ValidationError("agent '" + a.agent_id + "': samples/observed length mismatch");
    if (static_cast<int>(a.samples.size()) > scene.total_steps())
      throw ValidationError("agent '" + a.agent_id + "': more samples than scene steps");
    double prev_t = -1.0;
    bool have_prev = false;
    for (size_t k = 0; k < a.samples.size(); ++k) {
      if (!a.observed[k]) continue;
      if (have_prev && a.samples[k].t <= prev_t)
        throw ValidationError("agent '" + a.agent_id +
                              "': timestamps not strictly increasing at step " +
                              std::to_string(k));
      prev_t = a.samples[k].t;
      have_prev = true;
    }
    if (a.observed_count() < 2)
      throw ValidationError("agent '" + a.agent_id + "': fewer than 2 observed samples");
    if (!a.observed_at(scene.current_step()))
      throw ValidationError("agent '" + a.agent_id + "' absent at the current timestamp");
  }
  if (targets != 1)
    throw ValidationError("scene '" + scene.scene_id + "' must have exactly one target agent, has " +
                          std::to_string(targets));
  for (const auto& l : scene.lanelets) {
    if (static_cast<int>(l.centerline.size()) != Lanelet::kCenterlinePoints)
      throw ValidationError("lanelet '" + l.lanelet_id + "': expected " +
                            std::to_string(Lanelet::kCenterlinePoints) + " centerline points, got " +
                            std::to_string(l.centerline.size()));
    for (size_t k = 0; k + 1 < l.centerline.size(); ++k) {
      if ((l.centerline[k + 1] - l.centerline[k]).norm() == 0.0)
        throw ValidationError("lanelet '" + l.lanelet_id + "': zero-length segment at index " +
                              std::to_string(k));
    }
  }
}

double observed_path_length(const AgentTrack& track, int t_obs) {
  double len = 0.0;
  bool have_prev = false;
  Vec2 prev;
  int n = std::min<int>(t_obs, static_cast<int>(track.samples.size()));
  for (int k = 0; k < n; ++k) {
    if (!track.observed[k]) continue;
    Vec2 p{track.samples[k].x, track.samples[k].y};
    if (have_prev) len += (p - prev).norm();
    prev = p;
    have_prev = true;
  }
  return len;
}

Scene drop_static_agents(const Scene& scene) {
  Scene out = scene;
  out.agents.clear();
  for (const auto& a : scene.agents) {
    if (a.is_target || observed_path_length(a, scene.t_obs) >= kStaticAgentThreshold)
      out.agents.push_back(a);
  }
  return out;
}

SplitScene split_observed_future(const Scene& scene) {
  SplitScene out;
  out.observed = scene;
  out.observed.horizon = 0;
  for (auto& a : out.observed.agents) {
    if (static_cast<int>(a.samples.size()) > scene.t_obs) {
      a.samples.resize(scene.t_obs);
      a.observed.resize(scene.t_obs);
    }
  }
  for (const auto& a : scene.agents) {
    AgentFuture f;
    f.agent_id = a.agent_id;
    f.samples.resize(scene.horizon);
    f.observed.assign(scene.horizon, false);
    for (int k = 0; k < scene.horizon; ++k) {
      int step = scene.t_obs + k;
      if (a.observed_at(step)) {
        f.samples[k] = a.samples[step];
        f.observed[k] = true;
        f.has_future = true;
      }
    }
    out.future.push_back(std::move(f));
  }
  return out;
}

std::string object_type_name(ObjectType t) {
  switch (t) {
    case ObjectType::kVehicle: return "vehicle";
    case ObjectType::kPedestrian: return "pedestrian";
    case ObjectType::kOther: return "other";
  }
  return "other";
}

ObjectType object_type_from_name(const std::string& s) {
  if (s == "vehicle") return ObjectType::kVehicle;
  if (s == "pedestrian") return ObjectType::kPedestrian;
  if (s == "other") return ObjectType::kOther;
  throw ParseError("unknown object type '" + s + "'");
}

std::string turn_name(TurnDirection t) {
  switch (t) {
    case TurnDirection::kNone: return "none";
    case TurnDirection::kLeft: return "left";
    case TurnDirection::kRight: return "right";
  }
  return "none";
}

TurnDirection turn_from_name(const std::string& s) {
  if (s == "none") return TurnDirection::kNone;
  if (s == "left") return TurnDirection::kLeft;
  if (s == "right") return TurnDirection::kRight;
  throw ParseError("unknown turn direction '" + s + "'");
}

}  // namespace trajcast
