#include "trajcast/optim.hpp"

#include <cmath>

namespace trajcast {

double cosine_lr(double base_lr, int64_t step, int64_t total_steps) {
  if (step < 0 || step > total_steps)
    throw std::invalid_argument("cosine_lr: step " + std::to_string(step) +
                                " outside [0," + std::to_string(total_steps) + "]");
  double x = M_PI * static_cast<double>(step) / static_cast<double>(total_steps);
  return base_lr * (1.0 + std::cos(x)) / 2.0;
}

void AdamW::step(ParamStore& params, double lr) {
  ++step_count_;
  double t = static_cast<double>(step_count_);
  double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  double bc2 = 1.0 - std::pow(cfg_.beta2, t);
  for (auto& [name, p] : params.all()) {
    const Tensor& g = p.grad();
    if (g.data.empty()) continue;  // parameter unused in this graph
    auto& m = m_.try_emplace(name, Tensor::zeros(p.shape())).first->second;
    auto& v = v_.try_emplace(name, Tensor::zeros(p.shape())).first->second;
    Tensor& val = p.value_mut();
    for (size_t i = 0; i < val.data.size(); ++i) {
      double gi = g.data[i];
      if (!std::isfinite(gi))
        throw std::runtime_error("AdamW: non-finite gradient in parameter '" + name + "'");
      m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * gi;
      v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * gi * gi;
      double mhat = m.data[i] / bc1;
      double vhat = v.data[i] / bc2;
      val.data[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * val.data[i]);
    }
  }
}

}  // namespace trajcast
