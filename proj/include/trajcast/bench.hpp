#pragma once

#include <string>
#include <vector>

#include "trajcast/model.hpp"
#include "trajcast/scene.hpp"

namespace trajcast {

struct BenchReport {
  int scenes = 0;
  int64_t segment_candidates = 0;  // with filtering enabled
  int64_t segments_attended = 0;
  double usage_rate = 0.0;         // attended / candidates
  double lane_seconds_filtered = 0.0;
  double lane_seconds_unfiltered = 0.0;
  double min_ade_filtered = 0.0;
  double min_ade_unfiltered = 0.0;
  double min_ade_rel_delta = 0.0;  // |filtered - unfiltered| / unfiltered

  std::string to_json() const;
};

/// Runs the same model over the scenes with lane-candidate filtering on and
/// off, comparing lane-module wall clock, candidate usage, and minADE.
/// The model's filter flag is restored afterwards.
BenchReport run_filter_bench(Model& model, const std::vector<Scene>& scenes);

}  // namespace trajcast
