#include "trajcast/geometry.hpp"

#include <algorithm>
#include <numeric>

namespace trajcast {

Heading heading_of(Vec2 d, const std::optional<Heading>& prior) {
  if (d.x == 0.0 && d.y == 0.0) {
    if (prior && prior->valid) return *prior;
    return {0.0, {1.0, 0.0}, false};
  }
  double alpha = std::atan2(d.y, d.x);
  return {alpha, {std::cos(alpha), std::sin(alpha)}, true};
}

AgentStates agent_node_features(const AgentTrack& track, int t_obs) {
  AgentStates st;
  st.present.assign(t_obs, false);
  st.valid.assign(t_obs, false);
  st.pos.assign(t_obs, {});
  st.d.assign(t_obs, {});
  st.v.assign(t_obs, {});
  st.a.assign(t_obs, {1.0, 0.0});
  st.speed.assign(t_obs, 0.0);
  st.dt.assign(t_obs, 0.0);
  st.alpha.assign(t_obs, 0.0);
  st.heading_valid.assign(t_obs, false);
  st.semantics = object_type_onehot(track.object_type);

  std::optional<Heading> carried;
  for (int t = 0; t < t_obs; ++t) {
    if (!track.observed_at(t)) continue;
    st.present[t] = true;
    st.pos[t] = {track.samples[t].x, track.samples[t].y};
    if (t > 0 && track.observed_at(t - 1)) {
      st.valid[t] = true;
      Vec2 prev{track.samples[t - 1].x, track.samples[t - 1].y};
      st.d[t] = st.pos[t] - prev;
      st.dt[t] = track.samples[t].t - track.samples[t - 1].t;
      st.v[t] = st.d[t] * (1.0 / st.dt[t]);
      st.speed[t] = st.v[t].norm();
      Heading h = heading_of(st.d[t], carried);
      st.alpha[t] = h.alpha;
      st.a[t] = h.a;
      st.heading_valid[t] = h.valid;
      if (h.valid) carried = h;
    } else if (carried) {
      st.alpha[t] = carried->alpha;
      st.a[t] = carried->a;
      st.heading_valid[t] = true;
    }
  }

  int cur = t_obs - 1;
  st.current_pos = st.pos[cur];
  if (st.heading_valid[cur]) {
    st.current_alpha = st.alpha[cur];
    st.current_heading_valid = true;
  } else if (carried) {
    st.current_alpha = carried->alpha;
    st.current_heading_valid = true;
  } else {
    st.current_alpha = 0.0;
    st.current_heading_valid = false;
  }
  st.current_rot = Rotation2::from_angle(st.current_alpha);
  return st;
}

LaneNodeFeatures lane_node_features(const LaneSegment& seg) {
  LaneNodeFeatures f;
  f.d = seg.end - seg.start;
  f.l = f.d.norm();
  Heading h = heading_of(f.d);
  f.a = h.a;
  f.alpha = h.alpha;
  return f;
}

AgentAgentEdge agent_agent_edge(const AgentStates& center, const AgentStates& nbr, int t) {
  if (&center == &nbr) throw std::invalid_argument("agent_agent_edge: i == j");
  if (!center.valid[t] || !nbr.valid[t])
    throw std::invalid_argument("agent_agent_edge: both agents must be valid at t");
  AgentAgentEdge e;
  e.d_ij = nbr.pos[t] - center.pos[t];
  e.l_ij = e.d_ij.norm();
  e.v_ij = nbr.v[t] - center.v[t];
  e.s_ij = e.v_ij.norm();
  Rotation2 r = Rotation2::from_angle(center.alpha[t]);
  e.d_j2i = r.into_frame(e.d_ij);
  e.v_j2i = r.into_frame(e.v_ij);
  double alpha_ij = nbr.alpha[t] - center.alpha[t];
  e.a_j2i = {std::cos(alpha_ij), std::sin(alpha_ij)};
  return e;
}

AgentLaneEdge agent_lane_edge(const AgentStates& agent, int t, Vec2 lane_p0, double lane_alpha) {
  AgentLaneEdge e;
  e.d_il = lane_p0 - agent.pos[t];
  e.l_il = e.d_il.norm();
  Rotation2 r = Rotation2::from_angle(lane_alpha);
  e.d_i2l = r.into_frame(e.d_il);
  e.v_i2l = r.into_frame(agent.v[t]);
  double alpha_il = lane_alpha - agent.alpha[t];
  e.a_i2l = {std::cos(alpha_il), std::sin(alpha_il)};
  return e;
}

LaneletFeatures lanelet_features(const Lanelet& lanelet) {
  LaneletFeatures f;
  auto segs = lanelet.segments();
  if (segs.empty()) throw std::invalid_argument("lanelet_features: no segments");
  for (const auto& s : segs) {
    f.p = f.p + (s.start + s.end) * 0.5;
    f.d = f.d + (s.end - s.start);
  }
  double inv = 1.0 / static_cast<double>(segs.size());
  f.p = f.p * inv;
  f.d = f.d * inv;
  Heading h = heading_of(f.d);
  f.a = h.a;
  f.alpha = h.alpha;
  return f;
}

std::vector<double> object_type_onehot(ObjectType t) {
  std::vector<double> v(3, 0.0);
  v[static_cast<int>(t)] = 1.0;
  return v;
}

std::vector<double> lane_semantics_vector(const SemanticAttributes& s) {
  std::vector<double> v(5, 0.0);
  v[static_cast<int>(s.turn)] = 1.0;
  v[3] = s.traffic_control ? 1.0 : 0.0;
  v[4] = s.is_intersection ? 1.0 : 0.0;
  return v;
}

SceneFeatures featurize_scene(const Scene& scene) {
  SceneFeatures sf;
  sf.t_obs = scene.t_obs;
  for (const auto& a : scene.agents) {
    sf.agents.push_back(agent_node_features(a, scene.t_obs));
    sf.agent_ids.push_back(a.agent_id);
    sf.is_target.push_back(a.is_target);
  }
  // Canonical lanelet order by id so downstream reductions do not depend on
  // document order.
  std::vector<int> order(scene.lanelets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return scene.lanelets[a].lanelet_id < scene.lanelets[b].lanelet_id;
  });
  for (int li : order) {
    const Lanelet& l = scene.lanelets[li];
    int lanelet_idx = static_cast<int>(sf.lanelet_ids.size());
    sf.lanelet_ids.push_back(l.lanelet_id);
    sf.lanelet_feats.push_back(lanelet_features(l));
    sf.lanelet_semantics.push_back(lane_semantics_vector(l.semantics));
    std::vector<int> members;
    for (auto& seg : l.segments()) {
      members.push_back(static_cast<int>(sf.segments.size()));
      sf.segment_feats.push_back(lane_node_features(seg));
      sf.segment_lanelet.push_back(lanelet_idx);
      sf.segment_semantics.push_back(lane_semantics_vector(seg.semantics));
      sf.segments.push_back(std::move(seg));
    }
    sf.lanelet_segments.push_back(std::move(members));
  }
  return sf;
}

std::vector<LocalRegion> build_local_regions(const SceneFeatures& sf, double radius,
                                             int t_begin, int t_end) {
  if (radius <= 0.0) throw std::invalid_argument("build_local_regions: radius must be > 0");
  int n = static_cast<int>(sf.agents.size());
  // Neighbor iteration order is canonical: sorted by agent id.
  std::vector<int> id_order(n);
  std::iota(id_order.begin(), id_order.end(), 0);
  std::sort(id_order.begin(), id_order.end(),
            [&](int a, int b) { return sf.agent_ids[a] < sf.agent_ids[b]; });

  std::vector<LocalRegion> out(n);
  for (int i = 0; i < n; ++i) {
    LocalRegion& reg = out[i];
    reg.center = i;
    reg.radius = radius;
    reg.neighbors.resize(sf.t_obs);
    reg.segments.resize(sf.t_obs);
    reg.lanelets.resize(sf.t_obs);
    const AgentStates& ci = sf.agents[i];
    for (int t = t_begin; t < t_end; ++t) {
      if (!ci.valid[t]) continue;
      for (int j : id_order) {
        if (j == i || !sf.agents[j].valid[t]) continue;
        if ((sf.agents[j].pos[t] - ci.pos[t]).norm() <= radius) reg.neighbors[t].push_back(j);
      }
      for (size_t s = 0; s < sf.segments.size(); ++s) {
        if ((sf.segments[s].start - ci.pos[t]).norm() <= radius)
          reg.segments[t].push_back(static_cast<int>(s));
      }
      for (size_t l = 0; l < sf.lanelet_feats.size(); ++l) {
        if ((sf.lanelet_feats[l].p - ci.pos[t]).norm() <= radius)
          reg.lanelets[t].push_back(static_cast<int>(l));
      }
    }
  }
  return out;
}

}  // namespace trajcast
