// nvote: command-line front end for the neighbor-voting pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 validation error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "nvote/nvote.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitValidation = 3;

nvote::RunConfig load_config(const std::string& path) {
  if (path.empty()) {
    nvote::RunConfig cfg;
    cfg.validate();
    return cfg;
  }
  return nvote::parse_run_config(nvote::text::read_file(path));
}

std::string_view as_chars(const std::vector<std::uint8_t>& bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

unsigned default_threads() {
  if (const char* env = std::getenv("NVOTE_THREADS")) {
    try {
      const auto n = nvote::text::to_integer(env, "NVOTE_THREADS");
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const nvote::ParseError&) {
    }
    std::cerr << "warning: ignoring invalid NVOTE_THREADS='" << env << "'\n";
  }
  return 1;
}

std::string frame_id(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
}

// Label/detection files keyed by filename stem.
std::map<std::string, fs::path> frames_in(const fs::path& p) {
  std::map<std::string, fs::path> out;
  if (fs::is_regular_file(p)) {
    out[p.stem().string()] = p;
    return out;
  }
  if (!fs::is_directory(p)) throw nvote::ParseError("no such file or directory: " + p.string());
  for (const auto& e : fs::directory_iterator(p)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") out[e.path().stem().string()] = e.path();
  }
  return out;
}

std::vector<std::pair<double, double>> parse_buckets(const std::string& spec) {
  std::vector<std::pair<double, double>> out;
  std::size_t start = 0;
  while (start < spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string::npos) end = spec.size();
    const std::string_view item(spec.data() + start, end - start);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw nvote::ParseError("bucket must look like lo:hi, got '" + std::string(item) + "'");
    out.emplace_back(nvote::text::to_real(item.substr(0, colon), "bucket bound"),
                     nvote::text::to_real(item.substr(colon + 1), "bucket bound"));
    start = end + 1;
  }
  return out;
}

int run_backproject(const std::string& depth_path, const std::string& calib_path, const std::string& out_path,
                    const std::string& boxes_path, int factor, std::uint64_t seed, bool crop,
                    const std::string& config_path) {
  const auto cfg = load_config(config_path);
  const auto intr = nvote::parse_calib(nvote::text::read_file(calib_path));
  const auto depth = nvote::load_depth_map(nvote::read_gray_image(depth_path));
  // Geometry in double so ROI association sees exact pixel coordinates;
  // narrowed to float storage only when writing.
  auto cloud = nvote::backproject<double>(depth, intr);
  if (!boxes_path.empty()) {
    const auto boxes = nvote::parse_boxes2d(nvote::text::read_file(boxes_path));
    cloud = nvote::associate_roi_scores(std::move(cloud), intr, boxes);
  }
  if (crop) {
    const auto& g = cfg.grid;
    cloud = nvote::crop_range(cloud, {g.x_min, g.x_hi()}, {g.y_min, g.y_max}, {g.z_min, g.z_hi()});
  }
  cloud = nvote::downsample(cloud, factor, seed);
  nvote::text::write_file_atomic(out_path, as_chars(nvote::write_point_cloud(nvote::cloud_cast<float>(cloud))));
  std::cout << "points=" << cloud.size() << "\n";
  return kExitOk;
}

int run_vote_filter(const std::string& det_path, const std::string& config_path, const std::string& out_path,
                    const std::string& votes_path) {
  const auto cfg = load_config(config_path);
  const auto dets = nvote::parse_detections(nvote::text::read_file(det_path));
  const auto voters = nvote::make_voter_grid(cfg.grid);
  const auto candidates = nvote::centers_of(dets);

  nvote::NeighborDistanceMap map;
  if (votes_path.empty()) {
    map = nvote::compute_vote_targets(voters, candidates, nvote::VoteMode::inference);
  } else {
    map = nvote::read_distance_map(nvote::text::read_file(votes_path));
    if (map.size() != voters.size()) {
      throw nvote::ValidationError("vote map has " + std::to_string(map.size()) + " voters, grid has " +
                                   std::to_string(voters.size()));
    }
  }
  const auto tally = nvote::tally_votes(map, voters, candidates, cfg.vote.r_voter, cfg.vote.r_assign);

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (tally.candidates[i].support >= cfg.vote.tau) kept.push_back(i);
  }
  if (cfg.nms_enabled) {
    std::vector<nvote::OrientedBox> boxes;
    std::vector<double> scores;
    for (auto i : kept) {
      boxes.push_back(nvote::bev_box(dets[i]));
      scores.push_back(dets[i].score);
    }
    std::vector<std::size_t> survivors;
    for (auto k : nvote::nms_indices(boxes, scores, cfg.nms_iou)) survivors.push_back(kept[k]);
    std::sort(survivors.begin(), survivors.end());
    kept = std::move(survivors);
  }

  std::string out;
  for (auto i : kept) out += nvote::format_detection(dets[i]) + "\n";
  nvote::text::write_file_atomic(out_path, out);
  std::cout << "input=" << dets.size() << "\nkept=" << kept.size() << "\n";
  return kExitOk;
}

int run_eval(const std::string& det_path, const std::string& label_path, double iou, int recall_points,
             const std::string& difficulty, const std::string& buckets_spec, const std::string& class_name) {
  nvote::EvalConfig cfg;
  cfg.iou_threshold = iou;
  cfg.recall_points = recall_points;
  cfg.difficulty = nvote::parse_difficulty(difficulty);
  cfg.class_name = class_name;
  cfg.validate();

  const auto det_files = frames_in(det_path);
  const auto label_files = frames_in(label_path);
  std::vector<nvote::FrameData> frames;
  if (fs::is_regular_file(det_path) && fs::is_regular_file(label_path)) {
    frames.push_back({nvote::parse_detections(nvote::text::read_file(det_path)),
                      nvote::parse_labels(nvote::text::read_file(label_path))});
  } else {
    std::vector<std::string> missing;
    for (const auto& [id, _] : label_files) {
      if (!det_files.count(id)) missing.push_back("detections/" + id);
    }
    for (const auto& [id, _] : det_files) {
      if (!label_files.count(id)) missing.push_back("labels/" + id);
    }
    if (!missing.empty()) {
      std::string msg = "frame sets differ; missing:";
      for (const auto& m : missing) msg += " " + m;
      throw nvote::ParseError(msg);
    }
    for (const auto& [id, lp] : label_files) {
      try {
        frames.push_back({nvote::parse_detections(nvote::text::read_file(det_files.at(id))),
                          nvote::parse_labels(nvote::text::read_file(lp))});
      } catch (const nvote::ParseError& e) {
        throw nvote::ParseError("frame " + id + ": " + e.what());
      }
    }
  }

  const auto report = nvote::average_precision(frames, cfg);
  std::vector<nvote::BucketReport> buckets;
  if (!buckets_spec.empty()) {
    const auto b = parse_buckets(buckets_spec);
    buckets = nvote::distance_bucket_eval(frames, b, cfg);
  }
  std::cout << nvote::format_eval_report(report, cfg, buckets);
  return kExitOk;
}

void write_scene_files(const fs::path& dir, const nvote::SceneRun& run, const nvote::SceneConfig& scene_cfg,
                       std::size_t id) {
  const auto name = frame_id(id);
  for (const char* sub : {"detections", "labels", "votes", "clouds", "meta"}) fs::create_directories(dir / sub);
  const auto dets = run.plain_detections();
  nvote::text::write_file_atomic(dir / "detections" / (name + ".txt"),
                                 nvote::join_lines(dets, [](const nvote::Detection& d) { return nvote::format_detection(d); }));
  nvote::text::write_file_atomic(
      dir / "labels" / (name + ".txt"),
      nvote::join_lines(run.labels(scene_cfg), [](const nvote::GroundTruthObject& o) { return nvote::format_label(o); }));
  nvote::text::write_file_atomic(dir / "votes" / (name + ".nvdm"), as_chars(nvote::write_distance_map(run.votes)));
  nvote::text::write_file_atomic(dir / "clouds" / (name + ".nvpc"),
                                 as_chars(nvote::write_point_cloud(nvote::cloud_cast<float>(run.noisy))));
  std::string meta = "# detection_index kind support\n";
  for (std::size_t i = 0; i < run.detections.size(); ++i) {
    meta += std::to_string(i) + (run.detections[i].is_fp() ? " fp " : " tp ") +
            nvote::text::format_fixed(run.tally.candidates[i].support, 6) + "\n";
  }
  nvote::text::write_file_atomic(dir / "meta" / (name + ".txt"), meta);
}

int run_simulate(const std::string& config_path, std::size_t scenes, std::uint64_t seed, const std::string& report_path,
                 const std::string& csv_path, const std::string& scene_dir, unsigned threads, bool sweep) {
  const auto cfg = load_config(config_path);
  const auto report = nvote::run_voting_experiment(cfg.scene, cfg.noise, cfg.vote, cfg.grid, scenes, seed, threads);
  std::string text = nvote::format_experiment_report(report);
  if (sweep) {
    std::vector<double> taus;
    for (int i = 0; i <= 9; ++i) taus.push_back(i / 10.0);
    for (const auto& p : nvote::retention_curve(report, taus)) {
      const auto key = "sweep_tau_" + nvote::text::format_fixed(p.tau, 1);
      text += key + "_tp_retention=" + (p.tp_retention ? nvote::text::format_fixed(*p.tp_retention, 6) : "none") + "\n";
      text += key + "_fp_removal=" + (p.fp_removal ? nvote::text::format_fixed(*p.fp_removal, 6) : "none") + "\n";
    }
  }
  nvote::text::write_file_atomic(report_path, text);
  if (!csv_path.empty()) nvote::text::write_file_atomic(csv_path, nvote::format_experiment_csv(report));
  if (!scene_dir.empty()) {
    const auto voters = nvote::make_voter_grid(cfg.grid);
    for (std::size_t i = 0; i < scenes; ++i) {
      const auto run = nvote::simulate_scene(cfg.scene, cfg.noise, cfg.vote, voters, nvote::scene_seed(seed, i));
      write_scene_files(scene_dir, run, cfg.scene, i);
    }
  }
  std::cout << text;
  return kExitOk;
}

int run_render(const std::string& cloud_path, const std::string& det_path, const std::string& label_path,
               const std::string& out_path, const std::string& config_path, int ppc) {
  const auto cfg = load_config(config_path);
  const auto cloud = nvote::read_point_cloud(nvote::text::read_file(cloud_path));
  std::vector<nvote::OrientedBox> preds, gts;
  if (!det_path.empty()) {
    for (const auto& d : nvote::parse_detections(nvote::text::read_file(det_path))) preds.push_back(nvote::bev_box(d));
  }
  if (!label_path.empty()) {
    for (const auto& o : nvote::parse_labels(nvote::text::read_file(label_path))) {
      if (!o.is_dont_care()) gts.push_back(nvote::bev_box(o));
    }
  }
  nvote::RenderStyle style;
  style.pixels_per_cell = ppc > 0 ? ppc : cfg.render.pixels_per_cell;
  const auto image = nvote::render_bev(cloud, preds, gts, cfg.grid, style);
  nvote::text::write_file_atomic(out_path, nvote::encode_ppm(image));
  std::cout << "width=" << image.width << "\nheight=" << image.height << "\n";
  return kExitOk;
}

int run_kernels_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    failures += ok ? 0 : 1;
  };
  auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

  nvote::FeatureMatrix q(2, 1), k(2, 1);
  q << 1, 2;
  k << 1, 0;
  const auto w = nvote::attention_weights(q, k);
  check("attention hand case",
        near(w(0, 0), 0.7311, 1e-4) && near(w(0, 1), 0.2689, 1e-4) && near(w(1, 0), 0.8808, 1e-4) &&
            near(w(1, 1), 0.1192, 1e-4));
  nvote::FeatureMatrix v(2, 1);
  v << 1, -1;
  const auto o = nvote::attention_context(w, v);
  check("attention context hand case", near(o(0, 0), 0.4622, 1e-4) && near(o(1, 0), 0.7616, 1e-4));

  nvote::FusionInputs f;
  f.p_local = nvote::FeatureMatrix::Constant(1, 1, 0.8);
  f.p_vote = nvote::FeatureMatrix::Constant(1, 1, 0.2);
  f.w_local = Eigen::VectorXd::Constant(1, 0.3);
  f.w_vote = Eigen::VectorXd::Constant(1, 0.7);
  check("fusion hand case", near(nvote::fuse_scores(f)(0, 0), 0.38, 1e-12));

  check("focal loss hand case", near(nvote::focal_loss(0.5, 0.25, 2.0), 0.043322, 1e-6));
  check("smooth l1 hand cases", nvote::smooth_l1(0.5) == 0.125 && nvote::smooth_l1(2.0) == 1.5);
  const auto loss = nvote::total_loss({0.1, 0.2, 0.3, 0.0, 1.0, 1.0}, nvote::LossWeights{});
  check("classification loss hand case", near(loss.cls, 0.9, 1e-12));
  check("voting loss hand case", near(loss.nv, 0.26, 1e-12));
  return failures == 0 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighbor-voting pseudo-LiDAR toolkit"};
  app.require_subcommand(1);

  std::string depth, calib, out, boxes2d, config, detections, labels, votes, report, csv, scene_dir, cloud, buckets;
  std::string difficulty = "moderate", class_name = "Car";
  int factor = 1, recall_points = 11, ppc = 0;
  std::uint64_t seed = 0;
  std::size_t scenes = 200;
  double iou = 0.7;
  bool crop = false, sweep = false;
  unsigned threads = default_threads();

  auto* bp = app.add_subcommand("backproject", "Lift a depth map into an NVPC pseudo-LiDAR cloud");
  bp->add_option("--depth", depth, "16-bit depth image (PNG or PGM)")->required();
  bp->add_option("--calib", calib, "KITTI calibration file")->required();
  bp->add_option("--out", out, "Output NVPC file")->required();
  bp->add_option("--boxes2d", boxes2d, "2D boxes with scores for ROI association");
  bp->add_option("--downsample", factor, "Keep one point in k")->check(CLI::PositiveNumber);
  bp->add_option("--seed", seed, "Sampling seed");
  bp->add_flag("--crop", crop, "Crop to the configured grid range");
  bp->add_option("--config", config, "Run configuration file");

  auto* vf = app.add_subcommand("vote-filter", "Filter detections by neighbor-vote support, then NMS");
  vf->add_option("--detections", detections, "KITTI result file")->required();
  vf->add_option("--config", config, "Run configuration file")->required();
  vf->add_option("--out", out, "Output KITTI result file")->required();
  vf->add_option("--votes", votes, "Neighbor distance map (NVDM); defaults to targets from the detections");

  auto* ev = app.add_subcommand("eval", "BEV average precision");
  ev->add_option("--detections", detections, "Result directory or file")->required();
  ev->add_option("--labels", labels, "Label directory or file")->required();
  ev->add_option("--iou", iou, "IoU threshold");
  ev->add_option("--recall-points", recall_points, "11 or 40");
  ev->add_option("--difficulty", difficulty, "easy | moderate | hard");
  ev->add_option("--buckets", buckets, "Distance buckets, e.g. 0:40,40:70");
  ev->add_option("--class", class_name, "Object class to evaluate");

  auto* sim = app.add_subcommand("simulate", "Run the synthetic voting experiment");
  sim->add_option("--config", config, "Run configuration file");
  sim->add_option("--scenes", scenes, "Number of scenes");
  sim->add_option("--seed", seed, "Base seed");
  sim->add_option("--report", report, "Output key=value report")->required();
  sim->add_option("--csv", csv, "Optional per-scene CSV");
  sim->add_option("--scene-dir", scene_dir, "Optional directory for per-scene files");
  sim->add_option("--threads", threads, "Worker threads (default from NVOTE_THREADS)")->check(CLI::PositiveNumber);
  sim->add_flag("--tau-sweep", sweep, "Append retention figures for tau = 0, 0.1, ..., 0.9");

  auto* rd = app.add_subcommand("render", "Render a BEV raster (PPM)");
  rd->add_option("--cloud", cloud, "NVPC point cloud")->required();
  rd->add_option("--detections", detections, "KITTI result file");
  rd->add_option("--labels", labels, "KITTI label file");
  rd->add_option("--out", out, "Output PPM image")->required();
  rd->add_option("--config", config, "Run configuration file");
  rd->add_option("--pixels-per-cell", ppc, "Raster scale")->check(CLI::PositiveNumber);

  auto* kt = app.add_subcommand("kernels-selftest", "Check the numeric kernels against hand-computed cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*bp) return run_backproject(depth, calib, out, boxes2d, factor, seed, crop, config);
    if (*vf) return run_vote_filter(detections, config, out, votes);
    if (*ev) return run_eval(detections, labels, iou, recall_points, difficulty, buckets, class_name);
    if (*sim) return run_simulate(config, scenes, seed, report, csv, scene_dir, threads, sweep);
    if (*rd) return run_render(cloud, detections, labels, out, config, ppc);
    if (*kt) return run_kernels_selftest();
  } catch (const nvote::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nvote::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nvote::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
