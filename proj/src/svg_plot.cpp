#include "trajcast/svg_plot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "trajcast/scene_io.hpp"

namespace trajcast {

namespace {

constexpr double kCanvas = 800.0;
constexpr double kMargin = 40.0;

struct Mapper {
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;

  void include(Vec2 p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }

  double scale() const {
    double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
    return (kCanvas - 2.0 * kMargin) / span;
  }

  // SVG y axis points down; flip it.
  double sx(double x) const { return kMargin + (x - min_x) * scale(); }
  double sy(double y) const { return kCanvas - kMargin - (y - min_y) * scale(); }
};

void polyline(std::ostringstream& os, const Mapper& m, const std::vector<Vec2>& pts,
              const std::string& style) {
  if (pts.size() < 2) return;
  os << "<polyline fill=\"none\" " << style << " points=\"";
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) os << " ";
    os << format_float(m.sx(pts[i].x)) << "," << format_float(m.sy(pts[i].y));
  }
  os << "\"/>\n";
}

const char* kModeColors[] = {"#d62728", "#ff7f0e", "#9467bd",
                             "#8c564b", "#e377c2", "#bcbd22"};

}  // namespace

std::string render_scene_svg(const Scene& scene, const Prediction* pred) {
  Mapper m;
  for (const auto& l : scene.lanelets)
    for (const auto& p : l.centerline) m.include(p);
  for (const auto& a : scene.agents)
    for (size_t k = 0; k < a.samples.size(); ++k)
      if (a.observed[k]) m.include({a.samples[k].x, a.samples[k].y});

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (int)kCanvas
     << "\" height=\"" << (int)kCanvas << "\" viewBox=\"0 0 " << (int)kCanvas << " "
     << (int)kCanvas << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  os << "<g id=\"lanes\">\n";
  for (const auto& l : scene.lanelets)
    polyline(os, m, l.centerline, "stroke=\"#bbbbbb\" stroke-width=\"2\"");
  os << "</g>\n";

  os << "<g id=\"observed\">\n";
  for (const auto& a : scene.agents) {
    std::vector<Vec2> pts;
    for (int t = 0; t < scene.t_obs; ++t)
      if (a.observed_at(t)) pts.push_back({a.samples[t].x, a.samples[t].y});
    polyline(os, m, pts,
             a.is_target ? "stroke=\"#1f77b4\" stroke-width=\"3\""
                         : "stroke=\"#7fb3d5\" stroke-width=\"2\"");
  }
  os << "</g>\n";

  os << "<g id=\"future\">\n";
  for (const auto& a : scene.agents) {
    std::vector<Vec2> pts;
    for (int t = scene.t_obs; t < scene.total_steps(); ++t)
      if (a.observed_at(t)) pts.push_back({a.samples[t].x, a.samples[t].y});
    polyline(os, m, pts, "stroke=\"#2ca02c\" stroke-width=\"2\" stroke-dasharray=\"6,3\"");
  }
  os << "</g>\n";

  if (pred) {
    if (pred->agents.size() != scene.agents.size())
      throw std::invalid_argument("render_scene_svg: prediction size mismatch");
    os << "<g id=\"prediction\">\n";
    for (size_t i = 0; i < scene.agents.size(); ++i) {
      const AgentPrediction& ap = pred->agents[i];
      if (!scene.agents[i].is_target || !ap.valid) continue;
      for (size_t f = 0; f < ap.modes.size(); ++f) {
        std::vector<Vec2> pts{ap.origin};
        int h = static_cast<int>(ap.modes[f].mu.rows());
        for (int t = 0; t < h; ++t) pts.push_back(ap.world_point(static_cast<int>(f), t));
        std::string color = kModeColors[f % 6];
        polyline(os, m, pts,
                 "stroke=\"" + color + "\" stroke-width=\"2\" opacity=\"0.8\"");
      }
      os << "<g id=\"legend\" font-family=\"monospace\" font-size=\"14\">\n";
      for (size_t f = 0; f < ap.modes.size(); ++f) {
        double y = 20.0 + 18.0 * static_cast<double>(f);
        os << "<text x=\"12\" y=\"" << format_float(y) << "\" fill=\"" << kModeColors[f % 6]
           << "\">mode " << f << " p=" << format_float(ap.pi.value().data[f])
           << "</text>\n";
      }
      os << "</g>\n";
    }
    os << "</g>\n";
  }

  os << "</svg>\n";
  return os.str();
}

void save_svg(const std::string& path, const std::string& svg) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << svg;
}

}  // namespace trajcast
