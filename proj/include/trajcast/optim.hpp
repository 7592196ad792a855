#pragma once

#include <map>
#include <string>

#include "trajcast/params.hpp"

namespace trajcast {

/// Cosine annealing: lr(step) = base * (1 + cos(pi * step / total)) / 2.
double cosine_lr(double base_lr, int64_t step, int64_t total_steps);

struct AdamWConfig {
  double base_lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

/// AdamW with decoupled weight decay. Moment buffers are keyed by parameter
/// name and allocated on first step.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  /// Applies one update from the gradients currently stored on the parameters.
  /// Throws if any gradient is non-finite, naming the parameter.
  void step(ParamStore& params, double lr);

  int64_t step_count() const { return step_count_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  AdamWConfig cfg_;
  int64_t step_count_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

}  // namespace trajcast
