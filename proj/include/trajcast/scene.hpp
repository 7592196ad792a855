#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "trajcast/errors.hpp"

namespace trajcast {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
};

enum class ObjectType { kVehicle, kPedestrian, kOther };
enum class TurnDirection { kNone, kLeft, kRight };

struct SemanticAttributes {
  TurnDirection turn = TurnDirection::kNone;
  bool traffic_control = false;
  bool is_intersection = false;
};

struct TrackSample {
  double t = 0.0;  // seconds
  double x = 0.0;  // meters
  double y = 0.0;
};

/// One agent's track. Samples are aligned to the scene's step grid; a step
/// where the agent was not observed has observed[k] == false (the sample
/// payload is meaningless there). Steps past samples.size() are unobserved.
struct AgentTrack {
  std::string agent_id;
  ObjectType object_type = ObjectType::kVehicle;
  bool is_target = false;
  std::vector<TrackSample> samples;
  std::vector<bool> observed;

  bool observed_at(int step) const {
    return step >= 0 && step < static_cast<int>(samples.size()) && observed[step];
  }
  int observed_count() const {
    int n = 0;
    for (bool b : observed) n += b ? 1 : 0;
    return n;
  }
};

struct LaneSegment {
  std::string segment_id;
  Vec2 start;  // p0
  Vec2 end;    // p1
  std::string parent_lanelet;
  SemanticAttributes semantics;
};

/// Fixed-size run of 10 centerline points, i.e. 9 segments.
struct Lanelet {
  static constexpr int kCenterlinePoints = 10;

  std::string lanelet_id;
  std::vector<Vec2> centerline;
  SemanticAttributes semantics;

  std::vector<LaneSegment> segments() const;
};

struct Scene {
  std::string scene_id;
  std::vector<AgentTrack> agents;
  std::vector<Lanelet> lanelets;
  int t_obs = 20;    // observed steps, indices 0..t_obs-1
  int horizon = 30;  // future steps

  int current_step() const { return t_obs - 1; }
  int total_steps() const { return t_obs + horizon; }
  const AgentTrack& target() const;
};

/// Checks all scene invariants; throws ValidationError on the first failure.
void validate_scene(const Scene& scene);

/// Removes every non-target agent whose observed path length is below 6 m.
/// Path length is the sum of displacement norms between consecutive observed
/// samples within the observed window.
Scene drop_static_agents(const Scene& scene);
constexpr double kStaticAgentThreshold = 6.0;

double observed_path_length(const AgentTrack& track, int t_obs);

struct AgentFuture {
  std::string agent_id;
  std::vector<TrackSample> samples;  // index 0 = step t_obs
  std::vector<bool> observed;
  bool has_future = false;  // false => excluded from regression targets
};

struct SplitScene {
  Scene observed;  // steps 0..t_obs-1, horizon set to 0
  std::vector<AgentFuture> future;
};

SplitScene split_observed_future(const Scene& scene);

std::string object_type_name(ObjectType t);
ObjectType object_type_from_name(const std::string& s);
std::string turn_name(TurnDirection t);
TurnDirection turn_from_name(const std::string& s);

}  // namespace trajcast
