#pragma once

#include <optional>
#include <vector>

#include "trajcast/scene.hpp"

namespace trajcast {

/// Planar rotation stored as (cos, sin) of the angle.
struct Rotation2 {
  double c = 1.0;
  double s = 0.0;

  static Rotation2 from_angle(double alpha) { return {std::cos(alpha), std::sin(alpha)}; }

  /// R^T x: rotates a world vector into this heading's frame.
  Vec2 into_frame(Vec2 x) const { return {c * x.x + s * x.y, -s * x.x + c * x.y}; }
  /// R x: rotates a frame vector back into world coordinates.
  Vec2 out_of_frame(Vec2 x) const { return {c * x.x - s * x.y, s * x.x + c * x.y}; }
};

struct Heading {
  double alpha = 0.0;
  Vec2 a{1.0, 0.0};  // (cos, sin)
  bool valid = false;
};

/// Heading of a displacement. Zero displacement falls back to `prior`
/// (carry-forward rule); with no prior the result is (1,0) flagged invalid.
Heading heading_of(Vec2 d, const std::optional<Heading>& prior = std::nullopt);

/// Per-timestep kinematic state of one agent over the observed window.
struct AgentStates {
  std::vector<bool> present;        // sample observed at step t
  std::vector<bool> valid;          // displacement defined (t-1 and t observed)
  std::vector<Vec2> pos, d, v, a;   // a = heading vector
  std::vector<double> speed, dt, alpha;
  std::vector<bool> heading_valid;
  std::vector<double> semantics;    // object-type one-hot, width 3

  Vec2 current_pos;
  double current_alpha = 0.0;
  bool current_heading_valid = false;
  Rotation2 current_rot;  // heading frame at the current timestamp

  Heading heading_at(int t) const {
    return {alpha[t], a[t], heading_valid[t]};
  }
};

AgentStates agent_node_features(const AgentTrack& track, int t_obs);

struct LaneNodeFeatures {
  Vec2 d;        // end - start
  Vec2 a;        // heading vector
  double l = 0;  // length
  double alpha = 0;
};

LaneNodeFeatures lane_node_features(const LaneSegment& seg);

struct AgentAgentEdge {
  Vec2 d_ij;   // p_j - p_i
  double l_ij; // distance
  Vec2 v_ij;   // v_j - v_i
  double s_ij; // relative speed
  Vec2 d_j2i;  // relative position in i's heading frame at t
  Vec2 v_j2i;
  Vec2 a_j2i;  // (cos, sin) of alpha_j - alpha_i
};

/// Neighbor-minus-center convention throughout. Requires i != j and both
/// agents valid at t.
AgentAgentEdge agent_agent_edge(const AgentStates& center, const AgentStates& nbr, int t);

struct AgentLaneEdge {
  Vec2 d_il;   // p0 - p_i
  double l_il;
  Vec2 d_i2l;  // in the lane heading frame
  Vec2 v_i2l;  // agent velocity in the lane heading frame
  Vec2 a_i2l;  // (cos, sin) of alpha_lane - alpha_agent
};

AgentLaneEdge agent_lane_edge(const AgentStates& agent, int t, Vec2 lane_p0, double lane_alpha);

struct LaneletFeatures {
  Vec2 p;        // mean of member-segment midpoints
  Vec2 d;        // mean of member-segment displacements
  Vec2 a;        // heading vector of d
  double alpha = 0;
};

LaneletFeatures lanelet_features(const Lanelet& lanelet);

/// Flattened, canonically ordered feature view of one scene's observed window.
struct SceneFeatures {
  int t_obs = 0;
  std::vector<AgentStates> agents;            // scene order
  std::vector<std::string> agent_ids;
  std::vector<bool> is_target;

  std::vector<LaneSegment> segments;          // sorted by (lanelet_id, index)
  std::vector<LaneNodeFeatures> segment_feats;
  std::vector<int> segment_lanelet;           // segment -> lanelet index
  std::vector<std::vector<double>> segment_semantics;  // width 5

  std::vector<std::string> lanelet_ids;       // sorted
  std::vector<LaneletFeatures> lanelet_feats;
  std::vector<std::vector<int>> lanelet_segments;
  std::vector<std::vector<double>> lanelet_semantics;  // width 5
};

SceneFeatures featurize_scene(const Scene& scene);

std::vector<double> object_type_onehot(ObjectType t);
std::vector<double> lane_semantics_vector(const SemanticAttributes& s);

/// Entities within `radius` (inclusive) of one center agent, per timestep.
struct LocalRegion {
  int center = -1;
  double radius = 0.0;
  std::vector<std::vector<int>> neighbors;  // per t, agent indices sorted by id
  std::vector<std::vector<int>> segments;   // per t, by distance to segment start
  std::vector<std::vector<int>> lanelets;   // per t, by distance to lanelet position
};

std::vector<LocalRegion> build_local_regions(const SceneFeatures& sf, double radius,
                                             int t_begin, int t_end);

}  // namespace trajcast
