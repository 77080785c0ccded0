#pragma once

// Synthetic BEV scenes for exercising the voting filter without trained
// networks.
//
// A scene is a set of non-overlapping cars with ideal surface samples on
// their camera-facing sides. Pseudo-LiDAR artifacts are layered on top:
// depth noise growing with range, long tails behind silhouette edges, and
// depth slicing. A detector model jitters every car and injects background
// false positives.
//
// Votes stand in for a trained vote head. Each voter sees the objects where
// the deformed point cloud puts them (true center shifted by the mean
// displacement of that car's points) and reports them with independent,
// zero-mean per-voter error. Errors are random rather than systematic, so
// true objects collect consistent votes while injected false positives,
// which have no points behind them, collect few.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "nvote/bev_grid.hpp"
#include "nvote/error.hpp"
#include "nvote/evaluation.hpp"
#include "nvote/geometry.hpp"
#include "nvote/kitti_io.hpp"
#include "nvote/neighbor_vote.hpp"
#include "nvote/point_cloud.hpp"
#include "nvote/text.hpp"

namespace nvote {

class GenerationError : public Error {
 public:
  using Error::Error;
};

struct SceneConfig {
  int min_objects = 3;
  int max_objects = 8;
  // Placement rectangle for car centers (meters).
  double x_lo = -30.0;
  double x_hi = 30.0;
  double z_lo = 5.0;
  double z_hi = 65.0;
  double length_lo = 3.6;
  double length_hi = 4.6;
  double width_lo = 1.5;
  double width_hi = 1.9;
  double car_height = 1.5;
  double camera_height = 1.65;
  double min_separation = 8.0;
  double point_spacing = 0.1;
  int max_retries = 2000;
  std::uint64_t seed = 0;

  void validate() const {
    if (min_objects < 0 || max_objects < min_objects) throw ValidationError("bad object count range");
    if (!(x_lo < x_hi) || !(z_lo < z_hi)) throw ValidationError("placement region must satisfy lo < hi");
    if (!(length_lo > 0.0 && length_lo <= length_hi) || !(width_lo > 0.0 && width_lo <= width_hi)) {
      throw ValidationError("bad car footprint range");
    }
    if (!(min_separation > 0.0)) throw ValidationError("min separation must be positive");
    if (!(point_spacing > 0.0)) throw ValidationError("point spacing must be positive");
  }

  // The placement region has to sit inside the voxel grid's BEV range.
  void validate_against(const GridConfig& grid) const {
    validate();
    if (x_lo < grid.x_min || x_hi > grid.x_hi() || z_lo < grid.z_min || z_hi > grid.z_hi()) {
      throw ValidationError("placement region leaves the grid range");
    }
  }
};

struct NoiseConfig {
  double sigma0 = 0.1;       // depth noise std at z = 0 (m)
  double sigma1 = 0.01;      // depth noise growth per meter
  double p_edge = 0.1;       // chance a silhouette point is smeared
  double tail_length = 3.0;  // smear extent behind the point (m)
  double slice_step = 0.4;   // depth quantization (0 disables)
  double det_jitter = 0.5;   // detection center std per axis (m)
  double fp_rate = 0.5;      // mean injected false positives per scene
  double vote_sigma = 0.5;   // per-voter vote error std per axis (m)
  double edge_band = 0.1;    // silhouette = within this of a car's extreme x (m)
  double fp_clearance = 4.0; // injected FPs stay this far from every car (m)

  void validate() const {
    for (double v : {sigma0, sigma1, tail_length, slice_step, det_jitter, fp_rate, vote_sigma, edge_band}) {
      if (!(v >= 0.0)) throw ValidationError("noise parameters must be non-negative");
    }
    if (!(p_edge >= 0.0 && p_edge <= 1.0)) throw ValidationError("p_edge must lie in [0, 1]");
    if (!(fp_clearance >= 0.0)) throw ValidationError("fp_clearance must be non-negative");
  }

  double depth_sigma(double z) const { return sigma0 + sigma1 * z; }

  static NoiseConfig none() {
    return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 4.0};
  }
};

// KITTI-like left color camera, used to give simulated labels 2D boxes.
inline constexpr CameraIntrinsics kSimCamera{721.5377, 721.5377, 609.5593, 172.854};
inline constexpr int kSimImageWidth = 1242;
inline constexpr int kSimImageHeight = 375;

struct Scene {
  std::vector<OrientedBox> cars;
  PointCloudD cloud;       // ideal surface samples
  std::vector<int> owner;  // car index per point

  ObjectSet centers() const {
    ObjectSet s;
    for (const auto& c : cars) s.centers.push_back(c.center);
    return s;
  }
};

namespace detail {

inline double sep(BevPoint a, BevPoint b) { return std::hypot(a.x - b.x, a.z - b.z); }

// Samples the sides whose outward normal faces the camera at the origin.
inline void sample_visible_faces(const OrientedBox& car, int owner, const SceneConfig& cfg, Scene& scene) {
  const auto c = car.corners();
  const double y_top = cfg.camera_height - cfg.car_height;
  const int n_y = std::max(1, static_cast<int>(std::floor(cfg.car_height / cfg.point_spacing)) + 1);
  for (std::size_t e = 0; e < 4; ++e) {
    const BevPoint a = c[e];
    const BevPoint b = c[(e + 1) % 4];
    const double ex = b.x - a.x, ez = b.z - a.z;
    const double mid_x = 0.5 * (a.x + b.x), mid_z = 0.5 * (a.z + b.z);
    // Outward normal of a CCW edge is (ez, -ex).
    if (ez * mid_x - ex * mid_z >= 0.0) continue;
    const double len = std::hypot(ex, ez);
    const int n_s = std::max(1, static_cast<int>(std::floor(len / cfg.point_spacing)));
    for (int i = 0; i < n_s; ++i) {  // corner shared with the next face is left to it
      const double t = static_cast<double>(i) / n_s;
      for (int k = 0; k < n_y; ++k) {
        const double y = std::min(cfg.camera_height, y_top + k * cfg.point_spacing);
        scene.cloud.points.push_back({a.x + t * ex, y, a.z + t * ez, 1.0});
        scene.owner.push_back(owner);
      }
    }
  }
}

}  // namespace detail

inline Scene generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> count(cfg.min_objects, cfg.max_objects);
  std::uniform_real_distribution<double> ux(cfg.x_lo, cfg.x_hi), uz(cfg.z_lo, cfg.z_hi);
  std::uniform_real_distribution<double> ul(cfg.length_lo, cfg.length_hi), uw(cfg.width_lo, cfg.width_hi);
  std::uniform_real_distribution<double> uyaw(-std::numbers::pi, std::numbers::pi);

  Scene scene;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_retries && !placed; ++attempt) {
      const BevPoint c{ux(rng), uz(rng)};
      const bool clear = std::all_of(scene.cars.begin(), scene.cars.end(),
                                     [&](const OrientedBox& o) { return detail::sep(o.center, c) >= cfg.min_separation; });
      if (!clear) continue;
      const double l = ul(rng), w = uw(rng), yaw = uyaw(rng);
      scene.cars.push_back({c, l, w, yaw});
      placed = true;
    }
    if (!placed) {
      throw GenerationError("could not place car " + std::to_string(k + 1) + " of " + std::to_string(n) + " after " +
                            std::to_string(cfg.max_retries) + " attempts");
    }
  }
  for (std::size_t k = 0; k < scene.cars.size(); ++k) {
    detail::sample_visible_faces(scene.cars[k], static_cast<int>(k), cfg, scene);
  }
  return scene;
}

// Depth noise z += N(0, (sigma0 + sigma1 z)^2); silhouette points (within
// edge_band of their car's extreme x) get a uniform smear of up to
// tail_length with probability p_edge; finally z snaps to slice_step.
inline PointCloudD apply_pseudolidar_noise(const PointCloudD& cloud, std::span<const int> owner,
                                           const NoiseConfig& noise, std::uint64_t seed) {
  noise.validate();
  if (owner.size() != cloud.size()) throw ValidationError("owner labels are not aligned with the cloud");
  int n_owners = 0;
  for (int o : owner) n_owners = std::max(n_owners, o + 1);
  std::vector<double> lo(n_owners, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n_owners, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (owner[i] < 0) continue;
    lo[owner[i]] = std::min(lo[owner[i]], cloud.points[i].x);
    hi[owner[i]] = std::max(hi[owner[i]], cloud.points[i].x);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PointCloudD out = cloud;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& p = out.points[i];
    const double z0 = p.z;
    const double eps = unit(rng) * noise.depth_sigma(z0);
    const double coin = u01(rng);
    const double tail = u01(rng) * noise.tail_length;
    p.z = z0 + eps;
    const int o = owner[i];
    const bool silhouette = o >= 0 && (p.x <= lo[o] + noise.edge_band || p.x >= hi[o] - noise.edge_band);
    if (silhouette && coin < noise.p_edge) p.z += tail;
    if (noise.slice_step > 0.0) p.z = std::round(p.z / noise.slice_step) * noise.slice_step;
  }
  return out;
}

inline PointCloudD apply_pseudolidar_noise(const PointCloudD& cloud, const NoiseConfig& noise, std::uint64_t seed) {
  const std::vector<int> owner(cloud.size(), 0);
  return apply_pseudolidar_noise(cloud, owner, noise, seed);
}

// 2D box of the car's 3D hull in the simulated camera, clipped to the image.
inline Box2DExtent project_box_2d(const OrientedBox& car, const SceneConfig& cfg) {
  Box2DExtent e{1e300, 1e300, -1e300, -1e300};
  for (const auto& c : car.corners()) {
    for (double y : {cfg.camera_height - cfg.car_height, cfg.camera_height}) {
      const double z = std::max(c.z, 0.1);
      const double u = kSimCamera.fx * c.x / z + kSimCamera.cx;
      const double v = kSimCamera.fy * y / z + kSimCamera.cy;
      e.left = std::min(e.left, u);
      e.right = std::max(e.right, u);
      e.top = std::min(e.top, v);
      e.bottom = std::max(e.bottom, v);
    }
  }
  e.left = std::clamp(e.left, 0.0, kSimImageWidth - 2.0);
  e.top = std::clamp(e.top, 0.0, kSimImageHeight - 2.0);
  e.right = std::clamp(e.right, e.left + 1.0, kSimImageWidth - 1.0);
  e.bottom = std::clamp(e.bottom, e.top + 1.0, kSimImageHeight - 1.0);
  return e;
}

inline GroundTruthObject to_label(const OrientedBox& car, const SceneConfig& cfg) {
  GroundTruthObject o;
  o.type = "Car";
  o.bbox = project_box_2d(car, cfg);
  o.h = cfg.car_height;
  o.w = car.width;
  o.l = car.length;
  o.x = car.center.x;
  o.y = cfg.camera_height;
  o.z = car.center.z;
  o.rotation_y = -car.yaw;
  o.alpha = o.rotation_y - std::atan2(o.x, o.z);
  return o;
}

struct SimDetection {
  Detection det;
  int gt_index = -1;  // -1 for injected false positives

  bool is_fp() const { return gt_index < 0; }
};

// One jittered detection per car, then Poisson(fp_rate) background false
// positives at least fp_clearance from every car center.
inline std::vector<SimDetection> simulate_detections(std::span<const OrientedBox> cars, const NoiseConfig& noise,
                                                     const SceneConfig& cfg, std::uint64_t seed) {
  noise.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> tp_score(0.7, 1.0), fp_score(0.5, 0.9);
  std::vector<SimDetection> out;
  for (std::size_t k = 0; k < cars.size(); ++k) {
    OrientedBox box = cars[k];
    box.center.x += unit(rng) * noise.det_jitter;
    box.center.z += unit(rng) * noise.det_jitter;
    SimDetection d;
    static_cast<GroundTruthObject&>(d.det) = to_label(box, cfg);
    d.det.score = tp_score(rng);
    d.gt_index = static_cast<int>(k);
    out.push_back(std::move(d));
  }

  std::poisson_distribution<int> n_fp(noise.fp_rate > 0.0 ? noise.fp_rate : 1.0);
  const int fps = noise.fp_rate > 0.0 ? n_fp(rng) : 0;
  std::uniform_real_distribution<double> ux(cfg.x_lo, cfg.x_hi), uz(cfg.z_lo, cfg.z_hi);
  std::uniform_real_distribution<double> ul(cfg.length_lo, cfg.length_hi), uw(cfg.width_lo, cfg.width_hi);
  std::uniform_real_distribution<double> uyaw(-std::numbers::pi, std::numbers::pi);
  for (int f = 0; f < fps; ++f) {
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
      const BevPoint c{ux(rng), uz(rng)};
      const bool clear = std::all_of(cars.begin(), cars.end(), [&](const OrientedBox& car) {
        return detail::sep(car.center, c) >= noise.fp_clearance;
      });
      if (!clear) continue;
      SimDetection d;
      static_cast<GroundTruthObject&>(d.det) = to_label({c, ul(rng), uw(rng), uyaw(rng)}, cfg);
      d.det.score = fp_score(rng);
      out.push_back(std::move(d));
      break;
    }
  }
  return out;
}

struct VoteParams {
  double r_valid = kDefaultValidRadius;
  double r_voter = kDefaultVoterRadius;
  double r_assign = kDefaultAssignRadius;
  double tau = 0.3;

  void validate() const {
    if (!(r_valid > 0.0) || !(r_voter > 0.0) || !(r_assign > 0.0)) throw ValidationError("vote radii must be positive");
    if (!(tau >= 0.0)) throw ValidationError("tau must be non-negative");
  }
};

// Where the deformed cloud puts each car: true center plus the mean BEV
// displacement of that car's points.
inline ObjectSet perceived_centers(const Scene& scene, const PointCloudD& noisy) {
  const std::size_t n = scene.cars.size();
  std::vector<double> dx(n, 0.0), dz(n, 0.0);
  std::vector<int> cnt(n, 0);
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const int o = scene.owner[i];
    dx[o] += noisy.points[i].x - scene.cloud.points[i].x;
    dz[o] += noisy.points[i].z - scene.cloud.points[i].z;
    ++cnt[o];
  }
  ObjectSet set;
  for (std::size_t k = 0; k < n; ++k) {
    const auto c = scene.cars[k].center;
    set.centers.push_back(cnt[k] ? BevPoint{c.x + dx[k] / cnt[k], c.z + dz[k] / cnt[k]} : c);
  }
  return set;
}

// Inference-mode targets against `objects`, each present side re-aimed at
// the chosen center plus N(0, sigma^2) per axis drawn for that voter.
inline NeighborDistanceMap noisy_vote_map(const VoterGrid& voters, const ObjectSet& objects, double sigma,
                                          std::uint64_t seed) {
  auto map = compute_vote_targets(voters, objects, VoteMode::inference);
  if (sigma <= 0.0) return map;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t v = 0; v < map.size(); ++v) {
    for (auto* side : {&map.records[v].front, &map.records[v].back}) {
      const double ex = unit(rng) * sigma, ez = unit(rng) * sigma;
      if (!side->has_value()) continue;
      const BevPoint target = objects.centers[(*side)->object];
      **side = encode_vote_side(voters.positions[v], {target.x + ex, target.z + ez}, (*side)->object);
    }
  }
  return map;
}

// Derived per-scene seeds keep results independent of scheduling.
inline std::uint64_t scene_seed(std::uint64_t seed, std::size_t scene) {
  return seed + scene;
}

struct SceneRun {
  Scene scene;
  PointCloudD noisy;
  std::vector<SimDetection> detections;
  NeighborDistanceMap votes;
  VoteTally tally;

  std::vector<Detection> plain_detections() const {
    std::vector<Detection> d;
    for (const auto& s : detections) d.push_back(s.det);
    return d;
  }

  std::vector<GroundTruthObject> labels(const SceneConfig& cfg) const {
    std::vector<GroundTruthObject> l;
    for (const auto& c : scene.cars) l.push_back(to_label(c, cfg));
    return l;
  }
};

inline SceneRun simulate_scene(const SceneConfig& scene_cfg, const NoiseConfig& noise, const VoteParams& vote,
                               const VoterGrid& voters, std::uint64_t seed) {
  // Independent streams for each stage.
  std::seed_seq seq{seed, std::uint64_t{0x6e766f7465}};
  std::array<std::uint64_t, 4> s{};
  {
    std::array<std::uint32_t, 8> raw{};
    seq.generate(raw.begin(), raw.end());
    for (int i = 0; i < 4; ++i) s[i] = (std::uint64_t{raw[2 * i]} << 32) | raw[2 * i + 1];
  }
  SceneRun run;
  SceneConfig cfg = scene_cfg;
  cfg.seed = s[0];
  run.scene = generate_scene(cfg);
  run.noisy = apply_pseudolidar_noise(run.scene.cloud, run.scene.owner, noise, s[1]);
  run.detections = simulate_detections(run.scene.cars, noise, cfg, s[2]);
  run.votes = noisy_vote_map(voters, perceived_centers(run.scene, run.noisy), noise.vote_sigma, s[3]);
  const auto dets = run.plain_detections();
  run.tally = tally_votes(run.votes, voters, centers_of(dets), vote.r_voter, vote.r_assign);
  return run;
}

struct SceneResult {
  std::size_t scene_id = 0;
  std::vector<double> supports;  // per detection
  std::vector<bool> is_tp;       // per detection
  TpFpCounts before_05, after_05, before_07, after_07;

  int n_tp() const { return static_cast<int>(std::count(is_tp.begin(), is_tp.end(), true)); }
  int n_fp() const { return static_cast<int>(is_tp.size()) - n_tp(); }

  std::optional<double> mean_support(bool tp) const {
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < supports.size(); ++i) {
      if (is_tp[i] == tp) sum += supports[i], ++n;
    }
    return n ? std::optional<double>(sum / n) : std::nullopt;
  }

  int removed(bool tp, double tau) const {
    int n = 0;
    for (std::size_t i = 0; i < supports.size(); ++i) n += (is_tp[i] == tp && supports[i] < tau);
    return n;
  }
};

struct ExperimentReport {
  double tau = 0.0;
  std::vector<SceneResult> scenes;
};

inline SceneResult summarize_scene(const SceneRun& run, std::size_t id, const SceneConfig& cfg, double tau) {
  SceneResult r;
  r.scene_id = id;
  r.supports = run.tally.supports();
  for (const auto& d : run.detections) r.is_tp.push_back(!d.is_fp());
  const auto dets = run.plain_detections();
  const auto labels = run.labels(cfg);
  std::vector<Detection> kept;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (r.supports[i] >= tau) kept.push_back(dets[i]);
  }
  r.before_05 = tp_fp_counts(dets, labels, 0.5);
  r.after_05 = tp_fp_counts(kept, labels, 0.5);
  r.before_07 = tp_fp_counts(dets, labels, 0.7);
  r.after_07 = tp_fp_counts(kept, labels, 0.7);
  return r;
}

inline ExperimentReport run_voting_experiment(const SceneConfig& scene_cfg, const NoiseConfig& noise,
                                              const VoteParams& vote, const GridConfig& grid, std::size_t n_scenes,
                                              std::uint64_t seed, unsigned threads = 1) {
  scene_cfg.validate_against(grid);
  noise.validate();
  vote.validate();
  const VoterGrid voters = make_voter_grid(grid);
  ExperimentReport rep;
  rep.tau = vote.tau;
  rep.scenes.resize(n_scenes);
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < n_scenes; i += step) {
      const auto run = simulate_scene(scene_cfg, noise, vote, voters, scene_seed(seed, i));
      rep.scenes[i] = summarize_scene(run, i, scene_cfg, vote.tau);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_scenes, 1))));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  return rep;
}

struct ExperimentSummary {
  int n_scenes = 0;
  int n_tp = 0;
  int n_fp = 0;
  std::optional<double> mean_tp_support;
  std::optional<double> mean_fp_support;
  int scenes_with_fp = 0;
  int scenes_tp_above_fp = 0;  // among scenes with both TPs and FPs
  int scenes_with_both = 0;
  int removed_fp = 0;
  int removed_tp = 0;
  std::optional<double> fp_removal_rate;
  std::optional<double> tp_retention_rate;
  TpFpCounts before_05, after_05, before_07, after_07;
};

inline ExperimentSummary summarize(const ExperimentReport& rep, std::optional<double> tau_override = std::nullopt) {
  const double tau = tau_override.value_or(rep.tau);
  ExperimentSummary s;
  s.n_scenes = static_cast<int>(rep.scenes.size());
  double tp_sum = 0.0, fp_sum = 0.0;
  for (const auto& r : rep.scenes) {
    for (std::size_t i = 0; i < r.supports.size(); ++i) (r.is_tp[i] ? tp_sum : fp_sum) += r.supports[i];
    s.n_tp += r.n_tp();
    s.n_fp += r.n_fp();
    s.removed_fp += r.removed(false, tau);
    s.removed_tp += r.removed(true, tau);
    if (r.n_fp() > 0) ++s.scenes_with_fp;
    const auto tp = r.mean_support(true), fp = r.mean_support(false);
    if (tp && fp) {
      ++s.scenes_with_both;
      if (*tp > *fp) ++s.scenes_tp_above_fp;
    }
    for (auto [acc, add] : {std::pair{&s.before_05, &r.before_05}, std::pair{&s.after_05, &r.after_05},
                            std::pair{&s.before_07, &r.before_07}, std::pair{&s.after_07, &r.after_07}}) {
      acc->n_tp += add->n_tp;
      acc->n_fp += add->n_fp;
    }
  }
  if (s.n_tp) s.mean_tp_support = tp_sum / s.n_tp;
  if (s.n_fp) s.mean_fp_support = fp_sum / s.n_fp;
  if (s.n_fp) s.fp_removal_rate = static_cast<double>(s.removed_fp) / s.n_fp;
  if (s.n_tp) s.tp_retention_rate = 1.0 - static_cast<double>(s.removed_tp) / s.n_tp;
  return s;
}

struct RetentionPoint {
  double tau = 0.0;
  std::optional<double> tp_retention;
  std::optional<double> fp_removal;
};

inline std::vector<RetentionPoint> retention_curve(const ExperimentReport& rep, std::span<const double> taus) {
  std::vector<RetentionPoint> out;
  for (double t : taus) {
    const auto s = summarize(rep, t);
    out.push_back({t, s.tp_retention_rate, s.fp_removal_rate});
  }
  return out;
}

inline std::string format_experiment_report(const ExperimentReport& rep) {
  const auto s = summarize(rep);
  auto opt = [](const std::optional<double>& v) { return v ? text::format_fixed(*v, 6) : std::string("none"); };
  std::string out;
  out += "n_scenes=" + std::to_string(s.n_scenes) + "\n";
  out += "tau=" + text::format_real(rep.tau) + "\n";
  out += "n_tp=" + std::to_string(s.n_tp) + "\n";
  out += "n_fp=" + std::to_string(s.n_fp) + "\n";
  out += "mean_tp_support=" + opt(s.mean_tp_support) + "\n";
  out += "mean_fp_support=" + opt(s.mean_fp_support) + "\n";
  out += "scenes_with_fp=" + std::to_string(s.scenes_with_fp) + "\n";
  out += "scenes_tp_above_fp=" + std::to_string(s.scenes_tp_above_fp) + "\n";
  out += "scenes_with_tp_and_fp=" + std::to_string(s.scenes_with_both) + "\n";
  out += "removed_fp=" + std::to_string(s.removed_fp) + "\n";
  out += "removed_tp=" + std::to_string(s.removed_tp) + "\n";
  out += "fp_removal_rate=" + opt(s.fp_removal_rate) + "\n";
  out += "tp_retention_rate=" + opt(s.tp_retention_rate) + "\n";
  for (auto [name, c] : {std::pair{"iou05_before", s.before_05}, std::pair{"iou05_after", s.after_05},
                         std::pair{"iou07_before", s.before_07}, std::pair{"iou07_after", s.after_07}}) {
    out += std::string(name) + "_tp=" + std::to_string(c.n_tp) + "\n";
    out += std::string(name) + "_fp=" + std::to_string(c.n_fp) + "\n";
  }
  return out;
}

inline std::string format_experiment_csv(const ExperimentReport& rep) {
  auto opt = [](const std::optional<double>& v) { return v ? text::format_fixed(*v, 6) : std::string(); };
  std::string out = "scene_id,n_tp,n_fp,mean_tp_support,mean_fp_support,removed_fp,removed_tp\n";
  for (const auto& r : rep.scenes) {
    out += std::to_string(r.scene_id) + ',' + std::to_string(r.n_tp()) + ',' + std::to_string(r.n_fp()) + ',' +
           opt(r.mean_support(true)) + ',' + opt(r.mean_support(false)) + ',' +
           std::to_string(r.removed(false, rep.tau)) + ',' + std::to_string(r.removed(true, rep.tau)) + '\n';
  }
  return out;
}

}  // namespace nvote
