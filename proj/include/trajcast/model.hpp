#pragma once

#include <string>
#include <vector>

#include "trajcast/geometry.hpp"
#include "trajcast/model_config.hpp"
#include "trajcast/params.hpp"

namespace trajcast {

// Raw input rows fed to the embedding layers. Exposed so tests can build the
// exact inputs independently. All entries are invariant under rigid motions
// of the scene.
std::vector<double> center_input(const AgentStates& a, int t);                       // 10
std::vector<double> neighbor_input(const AgentStates& c, const AgentStates& n, int t);  // 17
std::vector<double> segment_input(const AgentStates& a, int t, const LaneNodeFeatures& f,
                                  Vec2 seg_start, const std::vector<double>& sem);   // 16
std::vector<double> lanelet_input(const AgentStates& a, int t, const LaneletFeatures& f,
                                  const std::vector<double>& sem);                   // 16
std::vector<double> rel_input(const AgentStates& c, const AgentStates& n, int t);    // 12

constexpr int kCenterInputDim = 10;
constexpr int kNeighborInputDim = 17;
constexpr int kSegmentInputDim = 16;
constexpr int kLaneletInputDim = 16;
constexpr int kRelInputDim = 12;

struct EncoderStats {
  int64_t lanelet_candidates = 0;  // lanelets in range, summed over (agent, t)
  int64_t lanelets_selected = 0;   // lanelets passing the score threshold
  int64_t segment_candidates = 0;  // member segments of all in-range lanelets
  int64_t segments_attended = 0;   // segments actually attended to
  double lane_seconds = 0.0;  // wall clock spent in segment-level attention
};

struct AgentEncoding {
  bool valid = false;
  Var h;                     // [1,D] interaction-aware context
  std::vector<Var> h_modes;  // F entries, each [1,D]
  Vec2 origin;               // current position (world)
  Rotation2 rot;             // current heading frame
};

struct EncoderOutput {
  std::vector<AgentEncoding> agents;
  EncoderStats stats;
};

struct ModePrediction {
  Var mu;  // [H,2] location, agent's current heading frame
  Var b;   // [H,2] Laplace scale, strictly positive
};

struct AgentPrediction {
  bool valid = false;
  std::vector<ModePrediction> modes;  // F
  Var pi;                             // [1,F] mode probabilities
  Vec2 origin;
  Rotation2 rot;

  /// World-frame location of mode f at step t.
  Vec2 world_point(int f, int t) const {
    Vec2 local{modes[f].mu.value().at(t, 0), modes[f].mu.value().at(t, 1)};
    return origin + rot.out_of_frame(local);
  }
};

struct Prediction {
  std::vector<AgentPrediction> agents;
};

class Model {
 public:
  Model(ModelConfig config, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  void set_lanelet_filter(bool on) { config_.lanelet_filter = on; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  EncoderOutput encode(const SceneFeatures& sf);
  Prediction decode(const EncoderOutput& enc, int horizon);
  Prediction forward(const SceneFeatures& sf);

  // Building blocks, public so tests can drive them in isolation.

  /// One pre-norm multi-head attention layer with output gating and a
  /// row-wise feed-forward block. `mask` is additive ([Nq,Nk], 0 or -inf);
  /// a fully masked query row degrades to the gated self path.
  /// `log_key_weights` ([1,Nk]) biases the attention logits, which weights
  /// each key and renormalizes per row.
  Var attention_layer(const std::string& name, const Var& zq, const Var& zk,
                      const Tensor& mask, const Var* log_key_weights = nullptr);

  /// Stack of attention layers with fixed keys.
  Var attention_stack(const std::string& name, int layers, Var zq, const Var& zk,
                      const Tensor& mask, const Var* log_key_weights = nullptr);

  /// Causal self-attention over a per-timestep sequence. Entries with
  /// valid[t] == false are zeroed and masked out as keys. With `with_cls`
  /// a learned summary token is appended that attends to every valid step;
  /// the returned vector then has seq.size() + 1 entries.
  std::vector<Var> temporal(const std::string& name, const std::vector<Var>& seq,
                            const std::vector<bool>& valid, bool with_cls);

  /// Lanelet scores ([1,L] softmax) for one query against lanelet embeddings.
  Var lanelet_scores(const Var& z, const Var& lanelet_keys);

  Var embed(const std::string& name, const Var& x, int64_t in_dim);
  Var gru_cell(const std::string& name, const Var& x, const Var& h);

 private:
  Var linear(const std::string& name, const Var& x, int64_t in, int64_t out);
  Var lnorm(const std::string& name, const Var& x);
  Var ffn(const std::string& name, const Var& x);

  ModelConfig config_;
  ParamStore params_;
};

/// Builds a constant [rows.size(), rows[0].size()] tensor from row vectors.
Tensor rows_tensor(const std::vector<std::vector<double>>& rows);

/// Indices whose score is strictly above factor * mean(scores).
std::vector<int> select_above_mean(const std::vector<double>& scores, double factor);

}  // namespace trajcast
