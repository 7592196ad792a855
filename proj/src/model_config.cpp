#include "trajcast/model_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "trajcast/errors.hpp"

namespace trajcast {

using nlohmann::json;

void ModelConfig::validate() const {
  if (hidden < 1 || heads < 1 || hidden % heads != 0)
    throw ValidationError("model config: hidden must be a positive multiple of heads");
  if (modes < 1) throw ValidationError("model config: modes must be >= 1");
  if (radius_stage1 <= 0.0 || radius_stage2 <= 0.0)
    throw ValidationError("model config: radii must be > 0");
  if (t_obs < 2 || horizon < 0) throw ValidationError("model config: bad t_obs/horizon");
  if (aa_layers < 1 || al_layers < 1 || lanelet_layers < 1 || temporal_layers < 1 ||
      global_layers < 1)
    throw ValidationError("model config: layer counts must be >= 1");
}

std::string ModelConfig::to_json() const {
  json j;
  j["hidden"] = hidden;
  j["heads"] = heads;
  j["aa_layers"] = aa_layers;
  j["al_layers"] = al_layers;
  j["lanelet_layers"] = lanelet_layers;
  j["temporal_layers"] = temporal_layers;
  j["global_layers"] = global_layers;
  j["modes"] = modes;
  j["radius_stage1"] = radius_stage1;
  j["radius_stage2"] = radius_stage2;
  j["lanelet_threshold"] = lanelet_threshold;
  j["lanelet_filter"] = lanelet_filter;
  j["t_obs"] = t_obs;
  j["horizon"] = horizon;
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("model config: invalid JSON");
  ModelConfig c;
  auto read = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("hidden", c.hidden);
  read("heads", c.heads);
  read("aa_layers", c.aa_layers);
  read("al_layers", c.al_layers);
  read("lanelet_layers", c.lanelet_layers);
  read("temporal_layers", c.temporal_layers);
  read("global_layers", c.global_layers);
  read("modes", c.modes);
  read("radius_stage1", c.radius_stage1);
  read("radius_stage2", c.radius_stage2);
  read("lanelet_threshold", c.lanelet_threshold);
  read("lanelet_filter", c.lanelet_filter);
  read("t_obs", c.t_obs);
  read("horizon", c.horizon);
  c.validate();
  return c;
}

ModelConfig ModelConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

}  // namespace trajcast
