#include <gtest/gtest.h>

#include "nvote/config.hpp"
#include "nvote/render.hpp"

using namespace nvote;

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_run_config(
      "# run settings\n"
      "grid.cell_x = 0.16\n"
      "grid.n_x = 496   # match the 496 x 432 layout\n"
      "grid.n_z = 432\n"
      "vote.tau = 0.4\n"
      "vote.nms = off\n"
      "eval.difficulty = hard\n"
      "noise.fp_rate = 1.5\n"
      "paths.labels = /data/label_2\n"
      "seed = 17\n");
  EXPECT_EQ(c.grid.n_x(), 496);
  EXPECT_EQ(c.grid.n_z(), 432);
  EXPECT_EQ(c.vote.tau, 0.4);
  EXPECT_FALSE(c.nms_enabled);
  EXPECT_EQ(c.eval.difficulty, Difficulty::hard);
  EXPECT_EQ(c.noise.fp_rate, 1.5);
  EXPECT_EQ(c.paths.at("labels"), "/data/label_2");
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.loss.w_dist, 0.2);
  EXPECT_EQ(c.nms_iou, 0.25);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_run_config("grid.cell_y = 1\n"), ValidationError);
  EXPECT_THROW(parse_run_config("grid.cell_x\n"), ParseError);
  EXPECT_THROW(parse_run_config("grid.cell_x = abc\n"), ParseError);
  EXPECT_THROW(parse_run_config("grid.cell_x = -1\n"), ValidationError);
  EXPECT_THROW(parse_run_config("eval.recall_points = 12\n"), ValidationError);
  EXPECT_THROW(parse_run_config("scene.z_hi = 80\n"), ValidationError);
  try {
    parse_run_config("\n\nvote.tau = x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

namespace {

int count_non_background(const RgbImage& img, Rgb bg = {0, 0, 0}) {
  int n = 0;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) n += img.at(c, r) != bg;
  }
  return n;
}

}  // namespace

TEST(Render, BlankRaster) {
  GridConfig g;
  const auto img = render_bev(PointCloud{}, {}, {}, g);
  EXPECT_EQ(img.width, 500);
  EXPECT_EQ(img.height, 440);
  EXPECT_EQ(count_non_background(img), 0);
  RenderStyle s;
  s.pixels_per_cell = 2;
  EXPECT_EQ(render_bev(PointCloud{}, {}, {}, g, s).width, 1000);
}

TEST(Render, CenterPoint) {
  GridConfig g;
  PointCloud c;
  c.points.push_back({0.05f, 0.0f, 35.25f, 0.0f});
  RenderStyle s;
  s.pixels_per_cell = 3;
  const auto img = render_bev(c, {}, {}, g, s);
  EXPECT_EQ(count_non_background(img), 9);
  // Cell (250, 220) -> columns 750..752, rows (439 - 220) * 3 = 657..659.
  EXPECT_EQ(img.at(750, 657), s.point);
  EXPECT_EQ(img.at(752, 659), s.point);
  EXPECT_NEAR(750, img.width / 2.0, 1.0);
  EXPECT_NEAR(658, img.height / 2.0, 3.0);
}

TEST(Render, BoxOutlinesFollowGridTransform) {
  GridConfig g;
  const OrientedBox gt{{-10, 20}, 4, 2, 0};
  const OrientedBox pred{{10, 40}, 4, 2, 0.5};
  RenderStyle s;
  const auto img = render_bev(PointCloud{}, std::vector{pred}, std::vector{gt}, g, s);
  int red = 0, green = 0;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      red += img.at(c, r) == s.ground_truth;
      green += img.at(c, r) == s.prediction;
    }
  }
  EXPECT_GT(red, 0);
  EXPECT_GT(green, 0);
  for (const auto& corner : gt.corners()) {
    const auto px = bev_to_pixel(corner, g, 1);
    EXPECT_EQ(img.at(static_cast<int>(std::floor(px.col)), static_cast<int>(std::floor(px.row))), s.ground_truth);
  }
  // GT corners at x = -12..-8, z = 19..21 -> columns 175..200, rows 308..321.
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      if (img.at(c, r) != s.ground_truth) continue;
      ASSERT_GE(c, 175);
      ASSERT_LE(c, 200);
      ASSERT_GE(r, 308);
      ASSERT_LE(r, 322);
    }
  }
}

TEST(Render, PpmHeader) {
  RgbImage img(3, 2, {1, 2, 3});
  const auto ppm = encode_ppm(img);
  EXPECT_EQ(ppm.substr(0, 11), "P6\n3 2\n255\n");
  EXPECT_EQ(ppm.size(), 11u + 18u);
}
