#include "trajcast/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace trajcast {

using nlohmann::json;

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

Scene scene_from_json(const json& j) {
  Scene scene;
  try {
    scene.scene_id = j.at("scene_id").get<std::string>();
    scene.t_obs = j.at("t_obs").get<int>();
    scene.horizon = j.at("horizon").get<int>();
    for (const auto& ja : j.at("agents")) {
      AgentTrack a;
      a.agent_id = ja.at("id").get<std::string>();
      a.object_type = object_type_from_name(ja.at("type").get<std::string>());
      a.is_target = ja.at("is_target").get<bool>();
      for (const auto& js : ja.at("samples")) {
        if (js.is_null()) {
          a.samples.push_back({});
          a.observed.push_back(false);
        } else {
          if (!js.is_array() || js.size() != 3)
            throw ParseError("agent '" + a.agent_id + "': sample must be [t,x,y] or null");
          a.samples.push_back({js[0].get<double>(), js[1].get<double>(), js[2].get<double>()});
          a.observed.push_back(true);
        }
      }
      scene.agents.push_back(std::move(a));
    }
    for (const auto& jl : j.at("lanelets")) {
      Lanelet l;
      l.lanelet_id = jl.at("id").get<std::string>();
      for (const auto& jp : jl.at("centerline")) {
        if (!jp.is_array() || jp.size() != 2)
          throw ParseError("lanelet '" + l.lanelet_id + "': centerline point must be [x,y]");
        l.centerline.push_back({jp[0].get<double>(), jp[1].get<double>()});
      }
      l.semantics.turn = turn_from_name(jl.at("turn").get<std::string>());
      l.semantics.traffic_control = jl.at("traffic_control").get<bool>();
      l.semantics.is_intersection = jl.at("intersection").get<bool>();
      scene.lanelets.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario file: ") + e.what());
  }
  validate_scene(scene);
  return scene;
}

void append_sample(std::string& out, const TrackSample& s) {
  out += '[';
  out += format_float(s.t);
  out += ',';
  out += format_float(s.x);
  out += ',';
  out += format_float(s.y);
  out += ']';
}

}  // namespace

Scene parse_scene(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ParseError("invalid JSON");
  return scene_from_json(j);
}

Scene load_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scene(ss.str());
}

std::string scene_to_json(const Scene& scene) {
  std::string out;
  out += "{\n";
  out += "  \"scene_id\": " + json(scene.scene_id).dump() + ",\n";
  out += "  \"t_obs\": " + std::to_string(scene.t_obs) + ",\n";
  out += "  \"horizon\": " + std::to_string(scene.horizon) + ",\n";
  out += "  \"agents\": [\n";
  for (size_t i = 0; i < scene.agents.size(); ++i) {
    const auto& a = scene.agents[i];
    out += "    {\"id\": " + json(a.agent_id).dump() + ", \"type\": \"" +
           object_type_name(a.object_type) + "\", \"is_target\": " +
           (a.is_target ? "true" : "false") + ", \"samples\": [";
    for (size_t k = 0; k < a.samples.size(); ++k) {
      if (k) out += ',';
      if (a.observed[k])
        append_sample(out, a.samples[k]);
      else
        out += "null";
    }
    out += "]}";
    out += (i + 1 < scene.agents.size()) ? ",\n" : "\n";
  }
  out += "  ],\n";
  out += "  \"lanelets\": [\n";
  for (size_t i = 0; i < scene.lanelets.size(); ++i) {
    const auto& l = scene.lanelets[i];
    out += "    {\"id\": " + json(l.lanelet_id).dump() + ", \"centerline\": [";
    for (size_t k = 0; k < l.centerline.size(); ++k) {
      if (k) out += ',';
      out += '[' + format_float(l.centerline[k].x) + ',' + format_float(l.centerline[k].y) + ']';
    }
    out += "], \"turn\": \"" + turn_name(l.semantics.turn) + "\", \"traffic_control\": " +
           (l.semantics.traffic_control ? "true" : "false") + ", \"intersection\": " +
           (l.semantics.is_intersection ? "true" : "false") + "}";
    out += (i + 1 < scene.lanelets.size()) ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

void save_scene(const std::string& path, const Scene& scene) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open file for writing: " + path);
  os << scene_to_json(scene);
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace trajcast
