#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "nvote/kitti_io.hpp"
#include "nvote/point_cloud.hpp"

namespace nvote {

// Rotated rectangle in the (x, z) plane. `length` runs along the heading
// (cos yaw, sin yaw); `width` along its left normal.
struct OrientedBox {
  BevPoint center;
  double length = 0.0;
  double width = 0.0;
  double yaw = 0.0;

  double area() const { return length * width; }

  // Counter-clockwise in (x, z).
  std::array<BevPoint, 4> corners() const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double hl = 0.5 * length, hw = 0.5 * width;
    auto at = [&](double a, double b) {
      return BevPoint{center.x + a * c - b * s, center.z + a * s + b * c};
    };
    return {at(hl, hw), at(-hl, hw), at(-hl, -hw), at(hl, -hw)};
  }
};

// KITTI objects rotate about camera Y (pointing down); their heading in the
// (x, z) plane is (cos ry, -sin ry), i.e. yaw = -ry.
inline OrientedBox bev_box(const GroundTruthObject& o) { return {{o.x, o.z}, o.l, o.w, -o.rotation_y}; }

namespace detail {

inline double cross(BevPoint o, BevPoint a, BevPoint b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

inline double polygon_area(const std::vector<BevPoint>& poly) {
  double acc = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    acc += p.x * q.z - q.x * p.z;
  }
  return 0.5 * std::abs(acc);
}

// Sutherland-Hodgman clip of `subject` against a convex CCW `clip` polygon.
inline std::vector<BevPoint> clip_convex(std::vector<BevPoint> subject, const std::array<BevPoint, 4>& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const BevPoint a = clip[e];
    const BevPoint b = clip[(e + 1) % clip.size()];
    std::vector<BevPoint> out;
    out.reserve(subject.size() + 2);
    for (std::size_t i = 0, n = subject.size(); i < n; ++i) {
      const BevPoint p = subject[i];
      const BevPoint q = subject[(i + 1) % n];
      const double cp = cross(a, b, p);
      const double cq = cross(a, b, q);
      if (cp >= 0.0) out.push_back(p);
      if ((cp >= 0.0) != (cq >= 0.0)) {
        const double t = cp / (cp - cq);
        out.push_back({p.x + t * (q.x - p.x), p.z + t * (q.z - p.z)});
      }
    }
    subject = std::move(out);
  }
  return subject;
}

}  // namespace detail

inline double intersection_area(const OrientedBox& a, const OrientedBox& b) {
  const double reach = 0.5 * (std::hypot(a.length, a.width) + std::hypot(b.length, b.width));
  if (std::hypot(a.center.x - b.center.x, a.center.z - b.center.z) > reach) return 0.0;
  const auto ca = a.corners();
  std::vector<BevPoint> subject(ca.begin(), ca.end());
  const auto poly = detail::clip_convex(std::move(subject), b.corners());
  return poly.size() < 3 ? 0.0 : detail::polygon_area(poly);
}

inline double rotated_iou(const OrientedBox& a, const OrientedBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

// Point-in-rectangle test used by rendering and by sampling oracles.
inline bool contains(const OrientedBox& box, BevPoint p) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const double dx = p.x - box.center.x, dz = p.z - box.center.z;
  const double along = dx * c + dz * s;
  const double across = -dx * s + dz * c;
  return std::abs(along) <= 0.5 * box.length && std::abs(across) <= 0.5 * box.width;
}

}  // namespace nvote
