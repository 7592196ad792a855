#pragma once

#include <string>

#include "trajcast/scene.hpp"

namespace trajcast {

/// Formats a double with 9 significant digits, the convention used by every
/// file this tool reads or writes.
std::string format_float(double v);

Scene parse_scene(const std::string& json_text);
Scene load_scene(const std::string& path);

/// Canonical serialization: fixed key order, 9-significant-digit floats,
/// arrays in document order. save(load(f)) is a fixed point.
std::string scene_to_json(const Scene& scene);
void save_scene(const std::string& path, const Scene& scene);

}  // namespace trajcast
