#pragma once

#include <string>

namespace trajcast {

struct ModelConfig {
  int hidden = 128;
  int heads = 8;
  int aa_layers = 1;
  int al_layers = 1;
  int lanelet_layers = 1;
  int temporal_layers = 4;
  int global_layers = 3;
  int modes = 6;  // F
  double radius_stage1 = 20.0;
  double radius_stage2 = 50.0;
  double lanelet_threshold = 0.75;  // select score > factor * mean
  bool lanelet_filter = true;
  int t_obs = 20;
  int horizon = 30;

  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
  static ModelConfig load(const std::string& path);
};

}  // namespace trajcast
