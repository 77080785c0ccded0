#pragma once

// Static top-down raster of a point cloud with predicted and ground-truth
// box outlines. One grid cell maps to pixels_per_cell^2 pixels; far range
// (large z) is at the top of the image, +x to the right.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>

#include "nvote/bev_grid.hpp"
#include "nvote/geometry.hpp"
#include "nvote/image_io.hpp"
#include "nvote/point_cloud.hpp"

namespace nvote {

using Rgb = std::array<std::uint8_t, 3>;

struct RenderStyle {
  int pixels_per_cell = 1;
  Rgb background{0, 0, 0};
  Rgb point{200, 200, 200};
  Rgb foreground_point{255, 220, 0};  // sigma > 0.5
  Rgb prediction{0, 255, 0};
  Rgb ground_truth{255, 0, 0};
};

struct PixelPos {
  double col = 0.0;
  double row = 0.0;
};

inline PixelPos bev_to_pixel(BevPoint p, const GridConfig& grid, int pixels_per_cell) {
  return {(p.x - grid.x_min) / grid.cell_x * pixels_per_cell, (grid.z_hi() - p.z) / grid.cell_z * pixels_per_cell};
}

namespace detail {

inline void draw_line(RgbImage& img, int c0, int r0, int c1, int r1, Rgb color) {
  const int dc = std::abs(c1 - c0), dr = -std::abs(r1 - r0);
  const int sc = c0 < c1 ? 1 : -1, sr = r0 < r1 ? 1 : -1;
  int err = dc + dr;
  for (;;) {
    img.set(c0, r0, color);
    if (c0 == c1 && r0 == r1) break;
    const int e2 = 2 * err;
    if (e2 >= dr) err += dr, c0 += sc;
    if (e2 <= dc) err += dc, r0 += sr;
  }
}

}  // namespace detail

inline void draw_box(RgbImage& img, const OrientedBox& box, const GridConfig& grid, int ppc, Rgb color) {
  const auto corners = box.corners();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto a = bev_to_pixel(corners[i], grid, ppc);
    const auto b = bev_to_pixel(corners[(i + 1) % 4], grid, ppc);
    detail::draw_line(img, static_cast<int>(std::floor(a.col)), static_cast<int>(std::floor(a.row)),
                      static_cast<int>(std::floor(b.col)), static_cast<int>(std::floor(b.row)), color);
  }
}

template <std::floating_point T>
RgbImage render_bev(const BasicPointCloud<T>& cloud, std::span<const OrientedBox> predictions,
                    std::span<const OrientedBox> ground_truth, const GridConfig& grid, const RenderStyle& style = {}) {
  grid.validate();
  const int ppc = style.pixels_per_cell;
  RgbImage img(grid.n_x() * ppc, grid.n_z() * ppc, style.background);
  for (const auto& p : cloud.points) {
    const auto cell = cell_index(p, grid);
    if (!cell) continue;
    const Rgb color = p.sigma > T(0.5) ? style.foreground_point : style.point;
    const int col0 = cell->ix * ppc;
    const int row0 = (grid.n_z() - 1 - cell->iz) * ppc;
    for (int dr = 0; dr < ppc; ++dr) {
      for (int dc = 0; dc < ppc; ++dc) img.set(col0 + dc, row0 + dr, color);
    }
  }
  for (const auto& b : ground_truth) draw_box(img, b, grid, ppc, style.ground_truth);
  for (const auto& b : predictions) draw_box(img, b, grid, ppc, style.prediction);
  return img;
}

}  // namespace nvote
