#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajcast/bench.hpp"
#include "trajcast/checkpoint.hpp"
#include "trajcast/loss.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/model.hpp"
#include "trajcast/scene_io.hpp"
#include "trajcast/svg_plot.hpp"
#include "trajcast/synth.hpp"
#include "trajcast/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trajcast;

namespace {

std::vector<Scene> load_scenes(const std::vector<std::string>& files, const std::string& dir) {
  std::vector<std::string> paths = files;
  if (!dir.empty()) {
    std::vector<std::string> found;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") found.push_back(e.path().string());
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw std::runtime_error("no scene files given");
  std::vector<Scene> scenes;
  for (const auto& p : paths) scenes.push_back(load_scene(p));
  return scenes;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  f << text;
}

Model model_from_checkpoint(const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  Model model(ModelConfig::from_json(ckpt.config_json), /*seed=*/0);
  restore_params(model.params(), ckpt);
  return model;
}

json metrics_json(const Metrics& m) {
  return {{"min_ade", m.min_ade},
          {"min_fde", m.min_fde},
          {"miss_rate", m.miss_rate},
          {"agents", m.agents}};
}

json prediction_json(const Scene& scene, const Prediction& pred) {
  json agents = json::array();
  for (size_t i = 0; i < scene.agents.size(); ++i) {
    const AgentPrediction& ap = pred.agents[i];
    if (!ap.valid) continue;
    json modes = json::array();
    for (size_t f = 0; f < ap.modes.size(); ++f) {
      json pts = json::array();
      int h = static_cast<int>(ap.modes[f].mu.rows());
      for (int t = 0; t < h; ++t) {
        Vec2 p = ap.world_point(static_cast<int>(f), t);
        pts.push_back({p.x, p.y});
      }
      modes.push_back({{"probability", ap.pi.value().data[f]}, {"points", pts}});
    }
    agents.push_back({{"agent_id", scene.agents[i].agent_id},
                      {"is_target", static_cast<bool>(scene.agents[i].is_target)},
                      {"modes", modes}});
  }
  return {{"scene_id", scene.scene_id}, {"agents", agents}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent trajectory prediction over lane graphs"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  uint64_t synth_seed = 0;
  std::string road = "straight", synth_out;
  SynthConfig synth_cfg;
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--road", road, "straight|curve|intersection");
  synth->add_option("--agents", synth_cfg.num_agents, "number of agents (1-16)");
  synth->add_option("--noise", synth_cfg.noise_sigma, "position noise sigma (m)");
  synth->add_option("--jitter", synth_cfg.timestamp_jitter, "timestamp jitter (s)");
  synth->add_option("--t-obs", synth_cfg.t_obs, "observed steps");
  synth->add_option("--horizon", synth_cfg.horizon, "future steps");
  synth->add_option("-o,--out", synth_out, "output file (default stdout)");

  // featurize
  auto* feat = app.add_subcommand("featurize", "Dump invariant features of a scene");
  std::string feat_scene, feat_out;
  feat->add_option("--scene", feat_scene, "scene JSON file")->required();
  feat->add_option("-o,--out", feat_out, "output file (default stdout)");

  // shared train/eval/bench inputs
  auto add_scene_opts = [](CLI::App* cmd, std::vector<std::string>& files, std::string& dir) {
    cmd->add_option("--scene", files, "scene JSON file (repeatable)");
    cmd->add_option("--scene-dir", dir, "directory of scene JSON files");
  };

  // train
  auto* tr = app.add_subcommand("train", "Train a model");
  std::vector<std::string> train_files;
  std::string train_dir, train_model_cfg, train_out = "model.ckpt", history_out;
  uint64_t train_seed = 0;
  TrainConfig train_cfg;
  add_scene_opts(tr, train_files, train_dir);
  tr->add_option("--config", train_model_cfg, "model config JSON file");
  tr->add_option("--epochs", train_cfg.epochs, "training epochs");
  tr->add_option("--lr", train_cfg.base_lr, "base learning rate");
  tr->add_option("--weight-decay", train_cfg.weight_decay, "decoupled weight decay");
  tr->add_option("--seed", train_seed, "parameter init seed");
  bool keep_static = false;
  tr->add_flag("--keep-static", keep_static, "keep low-motion agents");
  tr->add_option("-o,--out", train_out, "checkpoint output path");
  tr->add_option("--history", history_out, "write per-step loss history JSON");

  // predict
  auto* pr = app.add_subcommand("predict", "Predict futures for one scene");
  std::string pr_scene, pr_ckpt, pr_out;
  pr->add_option("--scene", pr_scene, "scene JSON file")->required();
  pr->add_option("--checkpoint", pr_ckpt, "model checkpoint")->required();
  pr->add_option("-o,--out", pr_out, "output file (default stdout)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on scenes");
  std::vector<std::string> ev_files;
  std::string ev_dir, ev_ckpt, ev_out;
  bool ev_all_agents = false;
  add_scene_opts(ev, ev_files, ev_dir);
  ev->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
  ev->add_flag("--all-agents", ev_all_agents, "evaluate every agent, not just targets");
  ev->add_option("-o,--out", ev_out, "output file (default stdout)");

  // bench
  auto* be = app.add_subcommand("bench", "Compare lane filtering on and off");
  std::vector<std::string> be_files;
  std::string be_dir, be_ckpt, be_out, be_model_cfg;
  uint64_t be_seed = 0;
  add_scene_opts(be, be_files, be_dir);
  be->add_option("--checkpoint", be_ckpt, "model checkpoint (default: fresh init)");
  be->add_option("--config", be_model_cfg, "model config JSON (when no checkpoint)");
  be->add_option("--seed", be_seed, "init seed when no checkpoint is given");
  be->add_option("-o,--out", be_out, "output file (default stdout)");

  // plot
  auto* pl = app.add_subcommand("plot", "Render a scene (and prediction) as SVG");
  std::string pl_scene, pl_ckpt, pl_out;
  pl->add_option("--scene", pl_scene, "scene JSON file")->required();
  pl->add_option("--checkpoint", pl_ckpt, "overlay predictions from this checkpoint");
  pl->add_option("-o,--out", pl_out, "output SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      synth_cfg.road = road_template_from_name(road);
      Scene scene = synth_scene(synth_seed, synth_cfg);
      write_output(synth_out, scene_to_json(scene));
    } else if (*feat) {
      Scene scene = load_scene(feat_scene);
      SceneFeatures sf = featurize_scene(scene);
      json agents = json::array();
      for (size_t i = 0; i < sf.agents.size(); ++i) {
        json steps = json::array();
        for (int t = 0; t < sf.t_obs; ++t) {
          if (!sf.agents[i].valid[t]) {
            steps.push_back(nullptr);
            continue;
          }
          steps.push_back(center_input(sf.agents[i], t));
        }
        agents.push_back({{"agent_id", sf.agent_ids[i]},
                          {"is_target", static_cast<bool>(sf.is_target[i])},
                          {"center_features", steps}});
      }
      json lanelets = json::array();
      for (size_t l = 0; l < sf.lanelet_ids.size(); ++l) {
        lanelets.push_back({{"lanelet_id", sf.lanelet_ids[l]},
                            {"position", {sf.lanelet_feats[l].p.x, sf.lanelet_feats[l].p.y}},
                            {"heading", sf.lanelet_feats[l].alpha},
                            {"segments", sf.lanelet_segments[l].size()}});
      }
      json out = {{"scene_id", scene.scene_id},
                  {"t_obs", sf.t_obs},
                  {"agents", agents},
                  {"lanelets", lanelets},
                  {"segments", sf.segments.size()}};
      write_output(feat_out, out.dump(2) + "\n");
    } else if (*tr) {
      train_cfg.drop_static = !keep_static;
      auto scenes = load_scenes(train_files, train_dir);
      ModelConfig mc =
          train_model_cfg.empty() ? ModelConfig{} : ModelConfig::load(train_model_cfg);
      if (!scenes.empty()) mc.t_obs = scenes[0].t_obs, mc.horizon = scenes[0].horizon;
      mc.validate();
      Model model(mc, train_seed);
      TrainResult res = train(model, scenes, train_cfg, &std::cerr);
      save_checkpoint(train_out, model.params(), model.config().to_json());
      if (!history_out.empty()) {
        json h = res.loss_history;
        std::ofstream f(history_out);
        f << h.dump() << "\n";
      }
      json out = {{"steps", res.loss_history.size()},
                  {"final_loss", res.loss_history.back()},
                  {"train_metrics", metrics_json(res.train_metrics)},
                  {"checkpoint", train_out}};
      std::cout << out.dump(2) << "\n";
    } else if (*pr) {
      Model model = model_from_checkpoint(pr_ckpt);
      Scene scene = load_scene(pr_scene);
      Prediction pred = model.forward(featurize_scene(scene));
      write_output(pr_out, prediction_json(scene, pred).dump(2) + "\n");
    } else if (*ev) {
      Model model = model_from_checkpoint(ev_ckpt);
      auto scenes = load_scenes(ev_files, ev_dir);
      MetricsAccumulator acc;
      for (const auto& scene : scenes) {
        Prediction pred = model.forward(featurize_scene(scene));
        auto targets = make_targets(scene, pred);
        std::vector<bool> flags;
        for (const auto& a : scene.agents)
          flags.push_back(ev_all_agents || a.is_target);
        acc.add(evaluate(pred, targets, flags, std::min(6, model.config().modes)));
      }
      json out = metrics_json(acc.result());
      out["scenes"] = scenes.size();
      write_output(ev_out, out.dump(2) + "\n");
    } else if (*be) {
      auto scenes = load_scenes(be_files, be_dir);
      std::optional<Model> model;
      if (!be_ckpt.empty()) {
        model.emplace(model_from_checkpoint(be_ckpt));
      } else {
        ModelConfig mc =
            be_model_cfg.empty() ? ModelConfig{} : ModelConfig::load(be_model_cfg);
        mc.t_obs = scenes[0].t_obs;
        mc.horizon = scenes[0].horizon;
        mc.validate();
        model.emplace(mc, be_seed);
      }
      BenchReport report = run_filter_bench(*model, scenes);
      write_output(be_out, report.to_json());
    } else if (*pl) {
      Scene scene = load_scene(pl_scene);
      std::string svg;
      if (!pl_ckpt.empty()) {
        Model model = model_from_checkpoint(pl_ckpt);
        Prediction pred = model.forward(featurize_scene(scene));
        svg = render_scene_svg(scene, &pred);
      } else {
        svg = render_scene_svg(scene);
      }
      save_svg(pl_out, svg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
