#include <gtest/gtest.h>

#include <random>

#include "nvote/bev_grid.hpp"
#include "oracles.hpp"

using namespace nvote;

TEST(Grid, PaperDimensions) {
  GridConfig g;
  EXPECT_EQ(g.n_x(), 500);
  EXPECT_EQ(g.n_z(), 440);
  g.n_x_override = 496;
  g.n_z_override = 432;
  EXPECT_EQ(g.n_x(), 496);
  EXPECT_EQ(g.n_z(), 432);
  g.downsample_rate = 2;
  EXPECT_EQ(g.feature_n_x(), 248);
  EXPECT_EQ(g.feature_n_z(), 216);
}

TEST(Grid, Validation) {
  GridConfig g;
  g.cell_x = 0;
  EXPECT_THROW(g.validate(), ValidationError);
  g = {};
  g.z_max = g.z_min;
  EXPECT_THROW(g.validate(), ValidationError);
  g = {};
  g.downsample_rate = 0;
  EXPECT_THROW(g.validate(), ValidationError);
}

TEST(CellIndex, Examples) {
  GridConfig g;
  const auto first = cell_index(g.x_min + 0.08, g.z_min + 0.08, g);
  ASSERT_TRUE(first);
  EXPECT_EQ(*first, (CellIndex{0, 0}));
  const auto mid = cell_index(PseudoPointD{0, 0, 35.2, 0}, g);
  ASSERT_TRUE(mid);
  EXPECT_EQ(*mid, (CellIndex{250, 220}));
  EXPECT_FALSE(cell_index(g.x_max, 10.0, g));
  EXPECT_FALSE(cell_index(0.0, g.z_max, g));
  EXPECT_FALSE(cell_index(0.0, -0.001, g));
  const auto last = cell_index(std::nextafter(g.x_max, 0.0), std::nextafter(g.z_max, 0.0), g);
  ASSERT_TRUE(last);
  EXPECT_EQ(*last, (CellIndex{499, 439}));
}

TEST(FeatureCoords, Examples) {
  EXPECT_EQ(feature_coords({17, 33}, 1), (CellIndex{17, 33}));
  EXPECT_EQ(feature_coords({250, 220}, 2), (CellIndex{125, 110}));
  EXPECT_EQ(feature_coords({499, 439}, 4), (CellIndex{124, 109}));
  EXPECT_THROW(feature_coords({1, 1}, 0), ValidationError);
}

TEST(Voxelize, EmptyCloud) { EXPECT_EQ(voxelize(PointCloud{}, GridConfig{}, 1).occupied(), 0u); }

TEST(Voxelize, CapKeepsSubset) {
  GridConfig g;
  g.max_points_per_pillar = 2;
  PointCloud c;
  for (int i = 0; i < 3; ++i) c.points.push_back({1.0f, 0.0f, 10.0f, static_cast<float>(i) / 10});
  const auto grid = voxelize(c, g, 5);
  ASSERT_EQ(grid.occupied(), 1u);
  const auto& pts = grid.cells.begin()->second;
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_NE(pts[0].sigma, pts[1].sigma);
}

TEST(Voxelize, ConservationContainmentAndOracle) {
  GridConfig g;
  g.max_points_per_pillar = 1 << 20;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ux(-40, 40), uz(0, 70.4);
  PointCloudD c;
  for (int i = 0; i < 10000; ++i) c.points.push_back({ux(rng), 0.0, uz(rng), 0.0});
  const auto grid = voxelize(c, g, 1);
  EXPECT_EQ(grid.point_count(), 10000u);
  for (const auto& [cell, pts] : grid.cells) {
    for (const auto& p : pts) {
      ASSERT_EQ(cell_index(p, g), cell);
      ASSERT_GE(p.x, g.x_min + cell.ix * g.cell_x - 1e-9);
      ASSERT_LE(p.x, g.x_min + (cell.ix + 1) * g.cell_x + 1e-9);
    }
  }
  for (const auto& p : c.points) ASSERT_EQ(cell_index(p, g), oracle::scan_cell(p.x, p.z, g));
}

TEST(Voxelize, DeterministicAndCapped) {
  GridConfig g;
  std::mt19937_64 rng(8);
  std::normal_distribution<float> jitter(0.0f, 0.03f);
  PointCloud c;
  for (int i = 0; i < 2000; ++i) c.points.push_back({jitter(rng), 0.0f, 20.0f + jitter(rng), static_cast<float>(i)});
  const auto a = voxelize(c, g, 3), b = voxelize(c, g, 3);
  ASSERT_EQ(a.occupied(), b.occupied());
  for (const auto& [cell, pts] : a.cells) {
    EXPECT_LE(pts.size(), 128u);
    const auto& other = b.cells.at(cell);
    ASSERT_EQ(pts.size(), other.size());
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i].sigma, other[i].sigma);
  }
}

TEST(Voxelize, OverrideShrinksRange) {
  GridConfig g;
  g.n_x_override = 496;
  EXPECT_DOUBLE_EQ(g.x_hi(), -40 + 496 * 0.16);
  EXPECT_FALSE(cell_index(39.5, 10.0, g));
  EXPECT_TRUE(cell_index(39.0, 10.0, g));
}
