#include "trajcast/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace trajcast {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Tensor rows_tensor(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("rows_tensor: no rows");
  int64_t m = static_cast<int64_t>(rows.size());
  int64_t n = static_cast<int64_t>(rows[0].size());
  Tensor t = Tensor::zeros({m, n});
  for (int64_t i = 0; i < m; ++i) {
    if (static_cast<int64_t>(rows[i].size()) != n)
      throw std::invalid_argument("rows_tensor: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), t.data.begin() + i * n);
  }
  return t;
}

std::vector<int> select_above_mean(const std::vector<double>& scores, double factor) {
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  std::vector<int> out;
  for (size_t k = 0; k < scores.size(); ++k)
    if (scores[k] > factor * mean) out.push_back(static_cast<int>(k));
  return out;
}

std::vector<double> center_input(const AgentStates& a, int t) {
  Rotation2 r = Rotation2::from_angle(a.alpha[t]);
  Vec2 dl = r.into_frame(a.d[t]);
  Vec2 vl = r.into_frame(a.v[t]);
  std::vector<double> row{dl.x, dl.y, vl.x, vl.y, a.speed[t], a.dt[t],
                          a.heading_valid[t] ? 1.0 : 0.0};
  row.insert(row.end(), a.semantics.begin(), a.semantics.end());
  return row;
}

std::vector<double> neighbor_input(const AgentStates& c, const AgentStates& n, int t) {
  AgentAgentEdge e = agent_agent_edge(c, n, t);
  Rotation2 r = Rotation2::from_angle(c.alpha[t]);
  Vec2 dj = r.into_frame(n.d[t]);
  Vec2 vj = r.into_frame(n.v[t]);
  std::vector<double> row{e.d_j2i.x, e.d_j2i.y, e.l_ij,   e.v_j2i.x, e.v_j2i.y,
                          e.s_ij,    e.a_j2i.x, e.a_j2i.y, dj.x,      dj.y,
                          vj.x,      vj.y,      n.speed[t], n.dt[t]};
  row.insert(row.end(), n.semantics.begin(), n.semantics.end());
  return row;
}

std::vector<double> segment_input(const AgentStates& a, int t, const LaneNodeFeatures& f,
                                  Vec2 seg_start, const std::vector<double>& sem) {
  AgentLaneEdge e = agent_lane_edge(a, t, seg_start, f.alpha);
  Rotation2 r = Rotation2::from_angle(a.alpha[t]);
  Vec2 da = r.into_frame(e.d_il);
  std::vector<double> row{e.d_i2l.x, e.d_i2l.y, e.l_il, e.v_i2l.x, e.v_i2l.y,
                          e.a_i2l.x, e.a_i2l.y, da.x,   da.y,      f.l,
                          a.heading_valid[t] ? 1.0 : 0.0};
  row.insert(row.end(), sem.begin(), sem.end());
  return row;
}

std::vector<double> lanelet_input(const AgentStates& a, int t, const LaneletFeatures& f,
                                  const std::vector<double>& sem) {
  AgentLaneEdge e = agent_lane_edge(a, t, f.p, f.alpha);
  Rotation2 r = Rotation2::from_angle(a.alpha[t]);
  Vec2 da = r.into_frame(e.d_il);
  std::vector<double> row{e.d_i2l.x, e.d_i2l.y, e.l_il,       e.v_i2l.x, e.v_i2l.y,
                          e.a_i2l.x, e.a_i2l.y, da.x,         da.y,      f.d.norm(),
                          a.heading_valid[t] ? 1.0 : 0.0};
  row.insert(row.end(), sem.begin(), sem.end());
  return row;
}

std::vector<double> rel_input(const AgentStates& c, const AgentStates& n, int t) {
  AgentAgentEdge e = agent_agent_edge(c, n, t);
  Rotation2 r = Rotation2::from_angle(c.alpha[t]);
  Vec2 dj = r.into_frame(n.d[t]);
  Vec2 vj = r.into_frame(n.v[t]);
  return {e.d_j2i.x, e.d_j2i.y, e.l_ij,   e.v_j2i.x, e.v_j2i.y, e.s_ij,
          e.a_j2i.x, e.a_j2i.y, dj.x,     dj.y,      vj.x,      vj.y};
}

Model::Model(ModelConfig config, uint64_t seed) : config_(std::move(config)), params_(seed) {
  config_.validate();
}

Var Model::linear(const std::string& name, const Var& x, int64_t in, int64_t out) {
  Var w = params_.get(name + ".w", {in, out}, Init::kLinearWeight);
  Var b = params_.get(name + ".b", {1, out}, Init::kZero);
  return add(matmul(x, w), b);
}

Var Model::lnorm(const std::string& name, const Var& x) {
  int64_t n = x.cols();
  Var gain = params_.get(name + ".gain", {1, n}, Init::kLinearWeight);
  Var bias = params_.get(name + ".bias", {1, n}, Init::kZero);
  return layer_norm(x, gain, bias);
}

Var Model::ffn(const std::string& name, const Var& x) {
  int64_t d = x.cols();
  Var h = linear(name + ".fc1", x, d, d);
  h = lnorm(name + ".ln", h);
  h = relu(h);
  return linear(name + ".fc2", h, d, d);
}

Var Model::embed(const std::string& name, const Var& x, int64_t in_dim) {
  int64_t d = config_.hidden;
  Var h = linear(name + ".fc1", x, in_dim, d);
  h = lnorm(name + ".ln", h);
  h = relu(h);
  return linear(name + ".fc2", h, d, d);
}

Var Model::attention_layer(const std::string& name, const Var& zq, const Var& zk,
                           const Tensor& mask, const Var* log_key_weights) {
  const int64_t d = config_.hidden;
  const int heads = config_.heads;
  const int64_t dh = d / heads;
  const int64_t nq = zq.rows();
  const int64_t nk = zk.defined() ? zk.rows() : 0;

  Var zqn = lnorm(name + ".lnq", zq);
  Var m;
  if (nk > 0) {
    Var zkn = lnorm(name + ".lnk", zk);
    Var q = matmul(zqn, params_.get(name + ".wq", {d, d}, Init::kLinearWeight));
    Var k = matmul(zkn, params_.get(name + ".wk", {d, d}, Init::kLinearWeight));
    Var v = matmul(zkn, params_.get(name + ".wv", {d, d}, Init::kLinearWeight));
    std::vector<Var> head_out;
    for (int h = 0; h < heads; ++h) {
      Var qh = slice_cols(q, h * dh, (h + 1) * dh);
      Var kh = slice_cols(k, h * dh, (h + 1) * dh);
      Var vh = slice_cols(v, h * dh, (h + 1) * dh);
      Var scores = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(double(dh)));
      // Key weights enter as a log bias, so softmax yields the weighted,
      // renormalized attention distribution.
      if (log_key_weights) scores = add(scores, *log_key_weights);
      Var alpha = softmax_rows(scores, mask);
      head_out.push_back(matmul(alpha, vh));
    }
    m = heads == 1 ? head_out[0] : concat_cols(head_out);
  } else {
    m = constant(Tensor::zeros({nq, d}));
  }

  Var self_path = matmul(zqn, params_.get(name + ".wself", {d, d}, Init::kLinearWeight));
  Var g = sigmoid(add(matmul(concat_cols({zqn, m}),
                             params_.get(name + ".wg", {2 * d, d}, Init::kLinearWeight)),
                      params_.get(name + ".bg", {1, d}, Init::kZero)));
  // g * self + (1 - g) * m, written as m + g * (self - m).
  Var zhat = add(m, mul(g, sub(self_path, m)));
  Var z1 = add(zq, zhat);
  return add(z1, ffn(name + ".ffn", z1));
}

Var Model::attention_stack(const std::string& name, int layers, Var zq, const Var& zk,
                           const Tensor& mask, const Var* log_key_weights) {
  for (int l = 0; l < layers; ++l)
    zq = attention_layer(name + ".l" + std::to_string(l), zq, zk, mask, log_key_weights);
  return zq;
}

std::vector<Var> Model::temporal(const std::string& name, const std::vector<Var>& seq,
                                 const std::vector<bool>& valid, bool with_cls) {
  const int64_t d = config_.hidden;
  const int t_len = static_cast<int>(seq.size());
  if (t_len > config_.t_obs)
    throw std::invalid_argument("temporal: sequence longer than configured window");
  if (static_cast<int>(valid.size()) != t_len)
    throw std::invalid_argument("temporal: valid mask size mismatch");

  Var pos = params_.get(name + ".pos", {config_.t_obs + 1, d}, Init::kEmbedding);
  std::vector<Var> rows;
  for (int t = 0; t < t_len; ++t) {
    if (valid[t])
      rows.push_back(add(seq[t], slice_rows(pos, t, t + 1)));
    else
      rows.push_back(constant(Tensor::zeros({1, d})));
  }
  if (with_cls) rows.push_back(params_.get(name + ".cls", {1, d}, Init::kEmbedding));

  const int r = static_cast<int>(rows.size());
  Tensor mask = Tensor::zeros({r, r});
  for (int u = 0; u < r; ++u) {
    bool cls_row = with_cls && u == r - 1;
    for (int v = 0; v < r; ++v) {
      bool cls_col = with_cls && v == r - 1;
      bool ok;
      if (cls_col)
        ok = cls_row;  // only the summary token sees itself
      else
        ok = valid[v] && (cls_row || v <= u);
      if (!ok) mask.data[u * r + v] = kNegInf;
    }
  }

  Var x = concat_rows(rows);
  for (int l = 0; l < config_.temporal_layers; ++l)
    x = attention_layer(name + ".l" + std::to_string(l), x, x, mask);

  std::vector<Var> out;
  for (int u = 0; u < r; ++u) out.push_back(slice_rows(x, u, u + 1));
  return out;
}

Var Model::lanelet_scores(const Var& z, const Var& lanelet_keys) {
  const int64_t d = config_.hidden;
  Var q = matmul(lnorm("s1.score.lnq", z),
                 params_.get("s1.score.wq", {d, d}, Init::kLinearWeight));
  Var k = matmul(lnorm("s1.score.lnk", lanelet_keys),
                 params_.get("s1.score.wk", {d, d}, Init::kLinearWeight));
  // Unscaled dot product: the score head is a relevance measure, and the
  // wider logit range keeps the threshold selective.
  return softmax_rows(matmul(q, transpose(k)));
}

Var Model::gru_cell(const std::string& name, const Var& x, const Var& h) {
  const int64_t d = config_.hidden;
  auto w = [&](const std::string& n) {
    return params_.get(name + "." + n, {d, d}, Init::kLinearWeight);
  };
  auto b = [&](const std::string& n) {
    return params_.get(name + "." + n, {1, d}, Init::kZero);
  };
  Var r = sigmoid(add(add(matmul(x, w("wxr")), matmul(h, w("whr"))), b("br")));
  Var z = sigmoid(add(add(matmul(x, w("wxz")), matmul(h, w("whz"))), b("bz")));
  Var n = tanh_v(add(add(matmul(x, w("wxn")), mul(r, matmul(h, w("whn")))), b("bn")));
  // h' = (1 - z) * n + z * h = n + z * (h - n)
  return add(n, mul(z, sub(h, n)));
}

EncoderOutput Model::encode(const SceneFeatures& sf) {
  const int64_t d = config_.hidden;
  const int t_obs = sf.t_obs;
  const int cur = t_obs - 1;
  const int n_agents = static_cast<int>(sf.agents.size());
  if (t_obs != config_.t_obs)
    throw std::invalid_argument("encode: scene window does not match model config");

  EncoderOutput out;
  out.agents.resize(n_agents);

  auto regions1 = build_local_regions(sf, config_.radius_stage1, 0, t_obs);
  auto regions2 = build_local_regions(sf, config_.radius_stage2, 0, t_obs);

  // Canonical processing order for neighbors in the global module.
  std::vector<int> id_order(n_agents);
  std::iota(id_order.begin(), id_order.end(), 0);
  std::sort(id_order.begin(), id_order.end(),
            [&](int a, int b) { return sf.agent_ids[a] < sf.agent_ids[b]; });

  // Stage 1: local per-timestep encoding, then causal temporal fusion.
  std::vector<std::vector<Var>> s1(n_agents);  // per agent, per t
  for (int i = 0; i < n_agents; ++i) {
    const AgentStates& st = sf.agents[i];
    std::vector<Var> z_t(t_obs);
    for (int t = 0; t < t_obs; ++t) {
      if (!st.valid[t]) continue;
      Var z = embed("s1.center", constant(rows_tensor({center_input(st, t)})),
                    kCenterInputDim);

      const auto& nbrs = regions1[i].neighbors[t];
      if (!nbrs.empty()) {
        std::vector<std::vector<double>> rows;
        for (int j : nbrs) rows.push_back(neighbor_input(st, sf.agents[j], t));
        Var keys = embed("s1.nbr", constant(rows_tensor(rows)), kNeighborInputDim);
        z = attention_stack("s1.aa", config_.aa_layers, z, keys,
                            Tensor::zeros({1, (int64_t)nbrs.size()}));
      }

      const auto& lts = regions1[i].lanelets[t];
      if (!lts.empty()) {
        std::vector<std::vector<double>> lrows;
        for (int l : lts)
          lrows.push_back(lanelet_input(st, t, sf.lanelet_feats[l], sf.lanelet_semantics[l]));
        Var lkeys = embed("s1.lanelet", constant(rows_tensor(lrows)), kLaneletInputDim);
        Var scores = lanelet_scores(z, lkeys);
        z = attention_stack("s1.lanelet_attn", config_.lanelet_layers, z, lkeys,
                            Tensor::zeros({1, (int64_t)lts.size()}));

        std::vector<int> chosen =
            select_above_mean(scores.value().data, config_.lanelet_threshold);
        out.stats.lanelet_candidates += static_cast<int64_t>(lts.size());
        out.stats.lanelets_selected += static_cast<int64_t>(chosen.size());
        for (int l : lts)
          out.stats.segment_candidates +=
              static_cast<int64_t>(sf.lanelet_segments[l].size());

        std::vector<int> active = config_.lanelet_filter ? chosen : std::vector<int>{};
        if (!config_.lanelet_filter) {
          active.resize(lts.size());
          std::iota(active.begin(), active.end(), 0);
        }

        auto t0 = std::chrono::steady_clock::now();
        std::vector<std::vector<double>> srows;
        std::vector<Var> wcols;
        for (int k : active) {
          int l = lts[k];
          Var score_k = slice_cols(scores, k, k + 1);
          for (int s : sf.lanelet_segments[l]) {
            srows.push_back(segment_input(st, t, sf.segment_feats[s],
                                          sf.segments[s].start, sf.segment_semantics[s]));
            wcols.push_back(score_k);
          }
        }
        if (!srows.empty()) {
          out.stats.segments_attended += static_cast<int64_t>(srows.size());
          Var skeys = embed("s1.lane", constant(rows_tensor(srows)), kSegmentInputDim);
          Var logw = log_v(wcols.size() == 1 ? wcols[0] : concat_cols(wcols));
          z = attention_stack("s1.al", config_.al_layers, z, skeys,
                              Tensor::zeros({1, (int64_t)srows.size()}), &logw);
        }
        out.stats.lane_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      z_t[t] = z;
    }
    s1[i] = temporal("s1.temp", z_t, std::vector<bool>(st.valid.begin(), st.valid.end()),
                     false);
  }

  // Stage 2: interaction-refreshed encoding with a summary token, then the
  // lane context at the current timestep.
  std::vector<Var> h(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    const AgentStates& st = sf.agents[i];
    if (!st.valid[cur]) continue;
    std::vector<Var> z_t(t_obs);
    for (int t = 0; t < t_obs; ++t) {
      if (!st.valid[t]) continue;
      Var z = s1[i][t];
      const auto& nbrs = regions2[i].neighbors[t];
      if (!nbrs.empty()) {
        std::vector<Var> keyrows;
        for (int j : nbrs) {
          Var e = embed("s2.edge", constant(rows_tensor({neighbor_input(st, sf.agents[j], t)})),
                        kNeighborInputDim);
          keyrows.push_back(linear("s2.nbr", concat_cols({s1[j][t], e}), 2 * d, d));
        }
        Var keys = keyrows.size() == 1 ? keyrows[0] : concat_rows(keyrows);
        z = attention_stack("s2.aa", config_.aa_layers, z, keys,
                            Tensor::zeros({1, (int64_t)nbrs.size()}));
      }
      z_t[t] = z;
    }
    auto seq = temporal("s2.temp", z_t, std::vector<bool>(st.valid.begin(), st.valid.end()),
                        true);
    Var sbar = seq.back();

    const auto& segs = regions2[i].segments[cur];
    if (!segs.empty()) {
      std::vector<std::vector<double>> srows;
      for (int s : segs)
        srows.push_back(segment_input(st, cur, sf.segment_feats[s], sf.segments[s].start,
                                      sf.segment_semantics[s]));
      Var keys = embed("s2.lane", constant(rows_tensor(srows)), kSegmentInputDim);
      sbar = attention_stack("s2.al", config_.al_layers, sbar, keys,
                             Tensor::zeros({1, (int64_t)segs.size()}));
    }
    h[i] = sbar;
  }

  // Global interaction across all agent pairs at the current timestep.
  for (int i = 0; i < n_agents; ++i) {
    AgentEncoding& enc = out.agents[i];
    const AgentStates& st = sf.agents[i];
    enc.origin = st.current_pos;
    enc.rot = st.current_rot;
    if (!st.valid[cur]) continue;
    enc.valid = true;

    std::vector<Var> keyrows;
    for (int j : id_order) {
      if (j == i || !sf.agents[j].valid[cur]) continue;
      Var rel = embed("g.rel", constant(rows_tensor({rel_input(st, sf.agents[j], cur)})),
                      kRelInputDim);
      keyrows.push_back(
          linear("g.key", concat_cols({lnorm("g.lnh", h[j]), rel}), 2 * d, d));
    }
    Var hg = h[i];
    if (!keyrows.empty()) {
      Var keys = keyrows.size() == 1 ? keyrows[0] : concat_rows(keyrows);
      hg = attention_stack("g.attn", config_.global_layers, hg, keys,
                           Tensor::zeros({1, (int64_t)keyrows.size()}));
    }
    enc.h = hg;

    Var hm = linear("g.modes", hg, d, config_.modes * d);
    Var hm_r = reshape(hm, {config_.modes, d});
    for (int f = 0; f < config_.modes; ++f)
      enc.h_modes.push_back(slice_rows(hm_r, f, f + 1));
  }
  return out;
}

Prediction Model::decode(const EncoderOutput& enc, int horizon) {
  const int64_t d = config_.hidden;
  const int f_modes = config_.modes;
  Prediction pred;
  pred.agents.resize(enc.agents.size());
  for (size_t i = 0; i < enc.agents.size(); ++i) {
    const AgentEncoding& e = enc.agents[i];
    AgentPrediction& ap = pred.agents[i];
    ap.origin = e.origin;
    ap.rot = e.rot;
    if (!e.valid) continue;
    ap.valid = true;

    Var x = concat_rows(e.h_modes);                        // [F,D]
    Var hidden = concat_rows(std::vector<Var>(f_modes, e.h));  // [F,D]
    Var hidden0 = hidden;
    std::vector<Var> mu_steps, b_steps;
    for (int t = 0; t < horizon; ++t) {
      hidden = gru_cell("dec.gru", x, hidden);
      // Locations span tens of meters; the fixed gain keeps the head's
      // weights (and optimizer steps) at order one.
      mu_steps.push_back(scale(linear("dec.loc", hidden, d, 2), 10.0));  // [F,2]
      b_steps.push_back(exp_v(linear("dec.unc", hidden, d, 2)));
    }
    for (int f = 0; f < f_modes; ++f) {
      ModePrediction mp;
      std::vector<Var> mu_rows, b_rows;
      for (int t = 0; t < horizon; ++t) {
        mu_rows.push_back(slice_rows(mu_steps[t], f, f + 1));
        b_rows.push_back(slice_rows(b_steps[t], f, f + 1));
      }
      mp.mu = horizon > 0 ? concat_rows(mu_rows) : constant(Tensor::zeros({0, 2}));
      mp.b = horizon > 0 ? concat_rows(b_rows) : constant(Tensor::zeros({0, 2}));
      ap.modes.push_back(std::move(mp));
    }
    Var logits = linear("dec.prob", concat_cols({x, hidden0}), 2 * d, 1);  // [F,1]
    ap.pi = softmax_rows(transpose(logits));
  }
  return pred;
}

Prediction Model::forward(const SceneFeatures& sf) {
  return decode(encode(sf), config_.horizon);
}

}  // namespace trajcast
