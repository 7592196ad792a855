#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "trajcast/autodiff.hpp"

namespace trajcast {

enum class Init { kLinearWeight, kZero, kEmbedding };

/// Named collection of learnable tensors. Each parameter is initialized from
/// an RNG stream derived from (seed, name), so values do not depend on the
/// order in which modules request their parameters.
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed = 0) : seed_(seed) {}

  /// Returns the named parameter, creating and initializing it on first use.
  Var get(const std::string& name, std::vector<int64_t> shape, Init init);

  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  Var at(const std::string& name) const;

  std::map<std::string, Var>& all() { return params_; }
  const std::map<std::string, Var>& all() const { return params_; }

  void zero_grad();
  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::map<std::string, Var> params_;
};

}  // namespace trajcast
