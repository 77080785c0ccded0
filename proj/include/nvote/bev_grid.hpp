#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <concepts>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "nvote/error.hpp"
#include "nvote/point_cloud.hpp"

namespace nvote {

// BEV pillar grid. Height is not binned (a single pillar spans y_min..y_max).
struct GridConfig {
  double x_min = -40.0;
  double x_max = 40.0;
  double z_min = 0.0;
  double z_max = 70.4;
  double y_min = -1.0;
  double y_max = 3.0;
  double cell_x = 0.16;
  double cell_z = 0.16;
  int max_points_per_pillar = 128;
  int downsample_rate = 4;  // feature-map stride
  // Optional cell-count overrides, e.g. 496 x 432. When set, the usable
  // extent becomes min + n * cell.
  std::optional<int> n_x_override;
  std::optional<int> n_z_override;

  int n_x() const { return n_x_override ? *n_x_override : static_cast<int>(std::lround((x_max - x_min) / cell_x)); }
  int n_z() const { return n_z_override ? *n_z_override : static_cast<int>(std::lround((z_max - z_min) / cell_z)); }

  double x_hi() const { return n_x_override ? x_min + *n_x_override * cell_x : x_max; }
  double z_hi() const { return n_z_override ? z_min + *n_z_override * cell_z : z_max; }

  // Feature map size at the configured stride.
  int feature_n_x() const { return n_x() / downsample_rate; }
  int feature_n_z() const { return n_z() / downsample_rate; }

  void validate() const {
    if (!(cell_x > 0.0) || !(cell_z > 0.0)) throw ValidationError("grid cells must have positive size");
    if (!(x_max > x_min) || !(z_max > z_min) || !(y_max > y_min)) {
      throw ValidationError("grid ranges must satisfy min < max");
    }
    if (n_x() < 1 || n_z() < 1) throw ValidationError("grid must have at least one cell per axis");
    if (max_points_per_pillar < 1) throw ValidationError("max_points_per_pillar must be >= 1");
    if (downsample_rate < 1) throw ValidationError("downsample_rate must be >= 1");
  }
};

struct CellIndex {
  int ix = 0;
  int iz = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Floor binning over the half-open range [min, hi). Returns nullopt outside.
inline std::optional<CellIndex> cell_index(double x, double z, const GridConfig& cfg) {
  if (!(x >= cfg.x_min && x < cfg.x_hi() && z >= cfg.z_min && z < cfg.z_hi())) return std::nullopt;
  // Division can round up to n for points a hair below the upper bound.
  const int ix = std::min(static_cast<int>(std::floor((x - cfg.x_min) / cfg.cell_x)), cfg.n_x() - 1);
  const int iz = std::min(static_cast<int>(std::floor((z - cfg.z_min) / cfg.cell_z)), cfg.n_z() - 1);
  return CellIndex{ix, iz};
}

template <std::floating_point T>
std::optional<CellIndex> cell_index(const BasicPseudoPoint<T>& p, const GridConfig& cfg) {
  return cell_index(static_cast<double>(p.x), static_cast<double>(p.z), cfg);
}

inline BevPoint cell_center(CellIndex c, const GridConfig& cfg) {
  return {cfg.x_min + (c.ix + 0.5) * cfg.cell_x, cfg.z_min + (c.iz + 0.5) * cfg.cell_z};
}

inline CellIndex feature_coords(CellIndex cell, int stride) {
  if (stride < 1) throw ValidationError("stride must be >= 1");
  auto floor_div = [stride](int i) { return i >= 0 ? i / stride : -((-i + stride - 1) / stride); };
  return {floor_div(cell.ix), floor_div(cell.iz)};
}

template <std::floating_point T>
struct BasicPillarGrid {
  GridConfig config;
  std::map<CellIndex, std::vector<BasicPseudoPoint<T>>> cells;

  std::size_t occupied() const { return cells.size(); }

  std::size_t point_count() const {
    std::size_t n = 0;
    for (const auto& [_, pts] : cells) n += pts.size();
    return n;
  }
};

using PillarGrid = BasicPillarGrid<float>;

// Bins in-range points into pillars. Pillars over the cap keep a seeded
// uniform subsample (order preserved) of exactly max_points_per_pillar.
template <std::floating_point T>
BasicPillarGrid<T> voxelize(const BasicPointCloud<T>& cloud, const GridConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  BasicPillarGrid<T> grid{cfg, {}};
  for (const auto& p : cloud.points) {
    if (auto c = cell_index(p, cfg)) grid.cells[*c].push_back(p);
  }
  const auto cap = static_cast<std::size_t>(cfg.max_points_per_pillar);
  std::mt19937_64 rng(seed);
  for (auto& [_, pts] : grid.cells) {
    if (pts.size() <= cap) continue;
    std::vector<BasicPseudoPoint<T>> kept;
    kept.reserve(cap);
    std::sample(pts.begin(), pts.end(), std::back_inserter(kept), cap, rng);
    pts = std::move(kept);
  }
  return grid;
}

}  // namespace nvote
