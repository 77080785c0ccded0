#pragma once

#include <concepts>
#include <cstddef>
#include <vector>

namespace nvote {

// Camera-frame pseudo-LiDAR point: X right, Y down, Z forward (meters).
// `sigma` is the foreground likelihood taken from 2D ROI scores.
template <std::floating_point T>
struct BasicPseudoPoint {
  using scalar_type = T;

  T x{0};
  T y{0};
  T z{0};
  T sigma{0};

  friend bool operator==(const BasicPseudoPoint&, const BasicPseudoPoint&) = default;
};

// Ordered point list. Backprojected clouds are in row-major pixel order.
template <std::floating_point T>
struct BasicPointCloud {
  using scalar_type = T;
  using point_type = BasicPseudoPoint<T>;

  std::vector<point_type> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  friend bool operator==(const BasicPointCloud&, const BasicPointCloud&) = default;
};

// Single precision matches the on-disk NVPC layout; double is for geometry
// that has to survive pixel round trips at sub-nanopixel accuracy.
using PseudoPoint = BasicPseudoPoint<float>;
using PointCloud = BasicPointCloud<float>;
using PseudoPointD = BasicPseudoPoint<double>;
using PointCloudD = BasicPointCloud<double>;

template <std::floating_point To, std::floating_point From>
BasicPointCloud<To> cloud_cast(const BasicPointCloud<From>& in) {
  BasicPointCloud<To> out;
  out.points.reserve(in.size());
  for (const auto& p : in.points) {
    out.points.push_back({static_cast<To>(p.x), static_cast<To>(p.y), static_cast<To>(p.z),
                          static_cast<To>(p.sigma)});
  }
  return out;
}

// Planar position in the bird's-eye-view (x, z) plane.
struct BevPoint {
  double x = 0.0;
  double z = 0.0;

  friend bool operator==(const BevPoint&, const BevPoint&) = default;
};

}  // namespace nvote
