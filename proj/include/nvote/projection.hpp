#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <iterator>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "nvote/error.hpp"
#include "nvote/kitti_io.hpp"
#include "nvote/point_cloud.hpp"
#include "nvote/text.hpp"

namespace nvote {

// 2D region of interest with detector confidence.
struct Box2D {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;
  double score = 0.0;

  bool contains(double u, double v) const { return u >= left && u <= right && v >= top && v <= bottom; }
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

// Lifts every valid pixel (depth > 0) to camera coordinates, row-major:
//   x = (u - cx) z / fx,  y = (v - cy) z / fy,  z = depth(u, v).
template <std::floating_point T = float>
BasicPointCloud<T> backproject(const DepthMap& depth, const CameraIntrinsics& intr) {
  intr.validate();
  if (depth.empty() || depth.width <= 0 || depth.height <= 0) throw ValidationError("empty depth map");
  BasicPointCloud<T> cloud;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const float d = depth.at(u, v);
      if (!(d > 0.0f)) continue;
      const double z = d;
      cloud.points.push_back({static_cast<T>((u - intr.cx) * z / intr.fx),
                              static_cast<T>((v - intr.cy) * z / intr.fy), static_cast<T>(d), T{0}});
    }
  }
  return cloud;
}

template <std::floating_point T>
PixelCoord project_to_pixel(const BasicPseudoPoint<T>& p, const CameraIntrinsics& intr) {
  if (!(p.z > T{0})) throw DomainError("cannot project a point with z <= 0");
  const double x = p.x, y = p.y, z = p.z;
  return {intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy};
}

// sigma = highest score among boxes containing the projected pixel (bounds
// inclusive), 0 when none does. Geometry is left untouched.
template <std::floating_point T>
BasicPointCloud<T> associate_roi_scores(BasicPointCloud<T> cloud, const CameraIntrinsics& intr,
                                        std::span<const Box2D> boxes) {
  for (auto& p : cloud.points) {
    const auto px = project_to_pixel(p, intr);
    double best = 0.0;
    for (const auto& b : boxes) {
      if (b.contains(px.u, px.v)) best = std::max(best, b.score);
    }
    p.sigma = static_cast<T>(best);
  }
  return cloud;
}

struct Range {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const { return v >= min && v < max; }
};

// Half-open crop on every axis; relative order is kept.
template <std::floating_point T>
BasicPointCloud<T> crop_range(const BasicPointCloud<T>& cloud, Range x, Range y, Range z) {
  for (const auto& r : {x, y, z}) {
    if (!(r.min < r.max)) throw ValidationError("crop range must satisfy min < max");
  }
  BasicPointCloud<T> out;
  std::copy_if(cloud.points.begin(), cloud.points.end(), std::back_inserter(out.points),
               [&](const auto& p) { return x.contains(p.x) && y.contains(p.y) && z.contains(p.z); });
  return out;
}

// Keeps floor(n / factor) points drawn uniformly without replacement. The
// selection preserves input order.
template <std::floating_point T>
BasicPointCloud<T> downsample(const BasicPointCloud<T>& cloud, int factor, std::uint64_t seed) {
  if (factor < 1) throw ValidationError("downsample factor must be >= 1");
  if (factor == 1) return cloud;
  BasicPointCloud<T> out;
  const std::size_t keep = cloud.size() / static_cast<std::size_t>(factor);
  out.points.reserve(keep);
  std::mt19937_64 rng(seed);
  std::sample(cloud.points.begin(), cloud.points.end(), std::back_inserter(out.points), keep, rng);
  return out;
}

// Accepts either "left top right bottom score" rows or full KITTI result rows.
inline std::vector<Box2D> parse_boxes2d(std::string_view content) {
  std::vector<Box2D> boxes;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(content)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    auto tokens = text::split_ws(line);
    Box2D b;
    try {
      if (tokens.size() == 5) {
        b = {text::to_real(tokens[0]), text::to_real(tokens[1]), text::to_real(tokens[2]),
             text::to_real(tokens[3]), text::to_real(tokens[4])};
      } else if (tokens.size() == 16) {
        auto d = parse_detections(line);
        const auto& e = d.front().bbox;
        b = {e.left, e.top, e.right, e.bottom, d.front().score};
      } else {
        throw ParseError("expected 5 or 16 fields, found " + std::to_string(tokens.size()));
      }
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!(b.right > b.left) || !(b.bottom > b.top)) {
      throw ValidationError("line " + std::to_string(line_no) + ": degenerate 2D box");
    }
    if (!(b.score >= 0.0 && b.score <= 1.0)) {
      throw ValidationError("line " + std::to_string(line_no) + ": score outside [0, 1]");
    }
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace nvote
