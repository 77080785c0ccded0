#pragma once

// Run configuration read from line-oriented "section.key = value" text.
// Blank lines and '#' comments are skipped; unknown keys are rejected.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "nvote/bev_grid.hpp"
#include "nvote/error.hpp"
#include "nvote/evaluation.hpp"
#include "nvote/numeric_kernels.hpp"
#include "nvote/scene_sim.hpp"
#include "nvote/text.hpp"

namespace nvote {

struct RenderConfig {
  int pixels_per_cell = 1;

  void validate() const {
    if (pixels_per_cell < 1) throw ValidationError("render.pixels_per_cell must be >= 1");
  }
};

struct RunConfig {
  GridConfig grid;
  VoteParams vote;
  bool nms_enabled = true;
  double nms_iou = kDefaultNmsIou;
  EvalConfig eval;
  NoiseConfig noise;
  SceneConfig scene;
  LossWeights loss;
  RenderConfig render;
  std::map<std::string, std::string> paths;
  std::uint64_t seed = 0;

  void validate() const {
    grid.validate();
    vote.validate();
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw ValidationError("vote.nms_iou must be in (0, 1]");
    eval.validate();
    noise.validate();
    scene.validate_against(grid);
    loss.validate();
    render.validate();
  }
};

namespace detail {

inline bool to_bool(std::string_view v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ParseError("expected a boolean, got '" + std::string(v) + "'");
}

inline int to_int(std::string_view v) { return static_cast<int>(text::to_integer(v)); }

using Setter = std::function<void(RunConfig&, std::string_view)>;

inline const std::map<std::string, Setter, std::less<>>& config_setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto real = [&t](const char* key, auto member) {
      t[key] = [member](RunConfig& c, std::string_view v) { std::invoke(member, c) = text::to_real(v, "config value"); };
    };
    auto integer = [&t](const char* key, auto member) {
      t[key] = [member](RunConfig& c, std::string_view v) { std::invoke(member, c) = to_int(v); };
    };
    real("grid.x_min", [](RunConfig& c) -> double& { return c.grid.x_min; });
    real("grid.x_max", [](RunConfig& c) -> double& { return c.grid.x_max; });
    real("grid.z_min", [](RunConfig& c) -> double& { return c.grid.z_min; });
    real("grid.z_max", [](RunConfig& c) -> double& { return c.grid.z_max; });
    real("grid.y_min", [](RunConfig& c) -> double& { return c.grid.y_min; });
    real("grid.y_max", [](RunConfig& c) -> double& { return c.grid.y_max; });
    real("grid.cell_x", [](RunConfig& c) -> double& { return c.grid.cell_x; });
    real("grid.cell_z", [](RunConfig& c) -> double& { return c.grid.cell_z; });
    integer("grid.max_points_per_pillar", [](RunConfig& c) -> int& { return c.grid.max_points_per_pillar; });
    integer("grid.downsample_rate", [](RunConfig& c) -> int& { return c.grid.downsample_rate; });
    t["grid.n_x"] = [](RunConfig& c, std::string_view v) { c.grid.n_x_override = to_int(v); };
    t["grid.n_z"] = [](RunConfig& c, std::string_view v) { c.grid.n_z_override = to_int(v); };

    real("vote.r_valid", [](RunConfig& c) -> double& { return c.vote.r_valid; });
    real("vote.r_voter", [](RunConfig& c) -> double& { return c.vote.r_voter; });
    real("vote.r_assign", [](RunConfig& c) -> double& { return c.vote.r_assign; });
    real("vote.tau", [](RunConfig& c) -> double& { return c.vote.tau; });
    real("vote.nms_iou", [](RunConfig& c) -> double& { return c.nms_iou; });
    t["vote.nms"] = [](RunConfig& c, std::string_view v) { c.nms_enabled = to_bool(v); };

    real("eval.iou_threshold", [](RunConfig& c) -> double& { return c.eval.iou_threshold; });
    integer("eval.recall_points", [](RunConfig& c) -> int& { return c.eval.recall_points; });
    t["eval.difficulty"] = [](RunConfig& c, std::string_view v) { c.eval.difficulty = parse_difficulty(v); };
    t["eval.class"] = [](RunConfig& c, std::string_view v) { c.eval.class_name = std::string(v); };

    real("noise.sigma0", [](RunConfig& c) -> double& { return c.noise.sigma0; });
    real("noise.sigma1", [](RunConfig& c) -> double& { return c.noise.sigma1; });
    real("noise.p_edge", [](RunConfig& c) -> double& { return c.noise.p_edge; });
    real("noise.tail_length", [](RunConfig& c) -> double& { return c.noise.tail_length; });
    real("noise.slice_step", [](RunConfig& c) -> double& { return c.noise.slice_step; });
    real("noise.det_jitter", [](RunConfig& c) -> double& { return c.noise.det_jitter; });
    real("noise.fp_rate", [](RunConfig& c) -> double& { return c.noise.fp_rate; });
    real("noise.vote_sigma", [](RunConfig& c) -> double& { return c.noise.vote_sigma; });
    real("noise.edge_band", [](RunConfig& c) -> double& { return c.noise.edge_band; });
    real("noise.fp_clearance", [](RunConfig& c) -> double& { return c.noise.fp_clearance; });

    integer("scene.min_objects", [](RunConfig& c) -> int& { return c.scene.min_objects; });
    integer("scene.max_objects", [](RunConfig& c) -> int& { return c.scene.max_objects; });
    real("scene.x_lo", [](RunConfig& c) -> double& { return c.scene.x_lo; });
    real("scene.x_hi", [](RunConfig& c) -> double& { return c.scene.x_hi; });
    real("scene.z_lo", [](RunConfig& c) -> double& { return c.scene.z_lo; });
    real("scene.z_hi", [](RunConfig& c) -> double& { return c.scene.z_hi; });
    real("scene.length_lo", [](RunConfig& c) -> double& { return c.scene.length_lo; });
    real("scene.length_hi", [](RunConfig& c) -> double& { return c.scene.length_hi; });
    real("scene.width_lo", [](RunConfig& c) -> double& { return c.scene.width_lo; });
    real("scene.width_hi", [](RunConfig& c) -> double& { return c.scene.width_hi; });
    real("scene.car_height", [](RunConfig& c) -> double& { return c.scene.car_height; });
    real("scene.camera_height", [](RunConfig& c) -> double& { return c.scene.camera_height; });
    real("scene.min_separation", [](RunConfig& c) -> double& { return c.scene.min_separation; });
    real("scene.point_spacing", [](RunConfig& c) -> double& { return c.scene.point_spacing; });
    integer("scene.max_retries", [](RunConfig& c) -> int& { return c.scene.max_retries; });

    real("loss.lambda_det", [](RunConfig& c) -> double& { return c.loss.lambda_det; });
    real("loss.lambda_nv", [](RunConfig& c) -> double& { return c.loss.lambda_nv; });
    real("loss.alpha", [](RunConfig& c) -> double& { return c.loss.alpha; });
    real("loss.beta", [](RunConfig& c) -> double& { return c.loss.beta; });
    real("loss.gamma", [](RunConfig& c) -> double& { return c.loss.gamma; });
    real("loss.w_dist", [](RunConfig& c) -> double& { return c.loss.w_dist; });
    real("loss.w_ang", [](RunConfig& c) -> double& { return c.loss.w_ang; });
    real("loss.focal_alpha", [](RunConfig& c) -> double& { return c.loss.focal_alpha; });
    real("loss.focal_gamma", [](RunConfig& c) -> double& { return c.loss.focal_gamma; });

    integer("render.pixels_per_cell", [](RunConfig& c) -> int& { return c.render.pixels_per_cell; });
    t["seed"] = [](RunConfig& c, std::string_view v) {
      const auto s = text::to_integer(v, "seed");
      if (s < 0) throw ParseError("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    };
    return t;
  }();
  return table;
}

}  // namespace detail

// Applies assignments on top of `base`; does not validate the result.
inline RunConfig apply_config_text(std::string_view content, RunConfig base = {}) {
  const auto& setters = detail::config_setters();
  std::size_t line_no = 0;
  for (auto raw : text::split_lines(content)) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ParseError(where + "expected 'key = value'");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(where + "expected 'key = value'");
    if (key.starts_with("paths.")) {
      base.paths[std::string(key.substr(6))] = std::string(value);
      continue;
    }
    const auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError(where + "unknown key '" + std::string(key) + "'");
    try {
      it->second(base, value);
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return base;
}

inline RunConfig parse_run_config(std::string_view content) {
  RunConfig cfg = apply_config_text(content);
  cfg.validate();
  return cfg;
}

}  // namespace nvote
