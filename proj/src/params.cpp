#include "trajcast/params.hpp"

#include <cmath>
#include <random>

namespace trajcast {

namespace {

uint64_t fnv1a(const std::string& s, uint64_t seed) {
  uint64_t h = 1469598103934665603ull ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Var ParamStore::get(const std::string& name, std::vector<int64_t> shape, Init init) {
  auto it = params_.find(name);
  if (it != params_.end()) {
    if (it->second.shape() != shape) {
      throw std::invalid_argument("ParamStore: shape conflict for '" + name + "': " +
                                  Tensor::shape_str(it->second.shape()) + " vs " +
                                  Tensor::shape_str(shape));
    }
    return it->second;
  }
  Tensor t = Tensor::zeros(shape);
  std::mt19937_64 rng(fnv1a(name, seed_));
  switch (init) {
    case Init::kZero:
      break;
    case Init::kLinearWeight: {
      // fan_in is the first dimension: y = x W with W [in, out].
      double bound = 1.0 / std::sqrt(static_cast<double>(shape[0]));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : t.data) v = dist(rng);
      break;
    }
    case Init::kEmbedding: {
      std::normal_distribution<double> dist(0.0, 0.02);
      for (auto& v : t.data) v = dist(rng);
      break;
    }
  }
  Var p(std::move(t), /*requires_grad=*/true);
  params_.emplace(name, p);
  return p;
}

Var ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

}  // namespace trajcast
