#pragma once

#include <string>

#include "trajcast/model.hpp"
#include "trajcast/scene.hpp"

namespace trajcast {

/// Deterministic SVG rendering of a scene: lane centerlines, observed
/// tracks, ground-truth futures, and (optionally) predicted modes with
/// their probabilities in a legend. Identical inputs yield identical bytes.
std::string render_scene_svg(const Scene& scene, const Prediction* pred = nullptr);

void save_svg(const std::string& path, const std::string& svg);

}  // namespace trajcast
