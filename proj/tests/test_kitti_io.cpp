#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "nvote/kitti_io.hpp"
#include "nvote/image_io.hpp"
#include "test_util.hpp"

using namespace nvote;

TEST(Calib, ExtractsFocalAndCenter) {
  const auto c = parse_calib("P0: 1 0 0 0 0 1 0 0 0 0 1 0\nP2: 700 0 600 0 0 700 180 0 0 0 1 0\n");
  EXPECT_EQ(c.fx, 700);
  EXPECT_EQ(c.fy, 700);
  EXPECT_EQ(c.cx, 600);
  EXPECT_EQ(c.cy, 180);
}

TEST(Calib, IdentityLike) {
  const auto c = parse_calib("P2: 1 0 0 0 0 1 0 0 0 0 1 0");
  EXPECT_EQ(c.fx, 1);
  EXPECT_EQ(c.cx, 0);
  EXPECT_EQ(c.cy, 0);
}

TEST(Calib, Malformed) {
  EXPECT_THROW(parse_calib("P2: 700 0 600 0 0 700 180 0 0 0 1"), ParseError);
  EXPECT_THROW(parse_calib("P1: 700 0 600 0 0 700 180 0 0 0 1 0"), ParseError);
  EXPECT_THROW(parse_calib("P2: 700 0 six 0 0 700 180 0 0 0 1 0"), ParseError);
}

TEST(Labels, EmptyAndSingle) {
  EXPECT_TRUE(parse_labels("").empty());
  const auto objs = parse_labels("Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 3 1.5 14 -1.59\n");
  ASSERT_EQ(objs.size(), 1u);
  EXPECT_EQ(objs[0].type, "Car");
  EXPECT_EQ(objs[0].x, 3);
  EXPECT_EQ(objs[0].y, 1.5);
  EXPECT_EQ(objs[0].z, 14);
  EXPECT_DOUBLE_EQ(objs[0].bbox.height(), 200.12 - 173.33);
}

TEST(Labels, WrongFieldCountReportsLine) {
  try {
    parse_labels("Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 3 1.5 14\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(Labels, DontCareRetainedAndBlankLinesSkipped) {
  const auto objs = parse_labels(
      "Car 0 0 0 10 10 50 60 1.5 1.6 4 0 1.6 20 0\n\n"
      "DontCare -1 -1 -10 500 150 540 170 -1 -1 -1 -1000 -1000 -1000 -10\n");
  ASSERT_EQ(objs.size(), 2u);
  EXPECT_TRUE(objs[1].is_dont_care());
}

TEST(Labels, OneObjectPerNonEmptyLine) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> n(0, 20);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = n(rng);
    std::string text;
    for (int i = 0; i < k; ++i) text += format_label(testutil::car(i, 10 + i)) + (i % 3 == 0 ? "\n\n" : "\n");
    EXPECT_EQ(parse_labels(text).size(), static_cast<std::size_t>(k));
  }
}

TEST(Detections, ScoreChecks) {
  EXPECT_TRUE(parse_detections("").empty());
  const auto d = parse_detections("Car 0 0 0 10 10 50 60 1.5 1.6 4 0 1.6 20 0 0.9\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].score, 0.9);
  EXPECT_THROW(parse_detections("Car 0 0 0 10 10 50 60 1.5 1.6 4 0 1.6 20 0 1.5\n"), ValidationError);
}

TEST(Detections, FormatRoundTrip) {
  const auto d = testutil::det(1.25, 33.5, 0.75, 4.1, 1.7, 0.3);
  const auto back = parse_detections(format_detection(d));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].x, d.x);
  EXPECT_EQ(back[0].z, d.z);
  EXPECT_EQ(back[0].rotation_y, d.rotation_y);
  EXPECT_EQ(back[0].score, d.score);
}

TEST(DepthMap, Scaling) {
  GrayImage img{3, 1, 16, {0, 256, 3584}};
  const auto d = load_depth_map(img);
  EXPECT_EQ(d.depth[0], 0.0f);
  EXPECT_EQ(d.depth[1], 1.0f);
  EXPECT_EQ(d.depth[2], 14.0f);
}

TEST(DepthMap, RejectsEightBit) {
  GrayImage img{1, 1, 8, {10}};
  EXPECT_THROW(load_depth_map(img), FormatError);
}

TEST(DepthMap, ReencodeIsLossless) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> raw(0, 65535);
  GrayImage img{64, 32, 16, {}};
  for (int i = 0; i < 64 * 32; ++i) img.pixels.push_back(static_cast<std::uint16_t>(raw(rng)));
  EXPECT_EQ(encode_depth_map(load_depth_map(img)).pixels, img.pixels);
}

TEST(DepthMap, PngAndPgmRoundTrip) {
  const auto dir = testutil::scratch_dir("depth_io");
  GrayImage img{5, 2, 16, {0, 1, 256, 3584, 65535, 7, 8, 9, 10, 11}};
  write_png_gray16(dir / "d.png", img);
  EXPECT_EQ(read_gray_image(dir / "d.png").pixels, img.pixels);
  text::write_file_atomic(dir / "d.pgm", encode_pgm16(img));
  EXPECT_EQ(read_gray_image(dir / "d.pgm").pixels, img.pixels);
}

TEST(PointCloudIo, EmptyIsHeaderOnly) {
  const auto bytes = write_point_cloud(PointCloud{});
  EXPECT_EQ(bytes.size(), 16u);
  EXPECT_TRUE(read_point_cloud(bytes).empty());
}

TEST(PointCloudIo, SinglePointBitExact) {
  PointCloud c;
  c.points.push_back({2.8f, 1.4f, 14.0f, 0.9f});
  const auto back = read_point_cloud(write_point_cloud(c));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(std::bit_cast<std::uint32_t>(back.points[0].x), std::bit_cast<std::uint32_t>(2.8f));
  EXPECT_EQ(std::bit_cast<std::uint32_t>(back.points[0].sigma), std::bit_cast<std::uint32_t>(0.9f));
}

TEST(PointCloudIo, RandomRoundTripIncludingSpecialValues) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint32_t> bits;
  PointCloud c;
  for (int i = 0; i < 1000; ++i) {
    c.points.push_back({std::bit_cast<float>(bits(rng)), std::bit_cast<float>(bits(rng)),
                        std::bit_cast<float>(bits(rng)), std::bit_cast<float>(bits(rng))});
  }
  c.points.push_back({-0.0f, 1e-45f, 3.4e38f, 0.0f});
  const auto back = read_point_cloud(write_point_cloud(c));
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (auto m : {&PseudoPoint::x, &PseudoPoint::y, &PseudoPoint::z, &PseudoPoint::sigma}) {
      ASSERT_EQ(std::bit_cast<std::uint32_t>(back.points[i].*m), std::bit_cast<std::uint32_t>(c.points[i].*m));
    }
  }
}

TEST(PointCloudIo, TruncatedOrCorrupt) {
  PointCloud c;
  c.points.push_back({1, 2, 3, 0});
  c.points.push_back({4, 5, 6, 0});
  auto bytes = write_point_cloud(c);
  bytes.resize(bytes.size() - 16);
  EXPECT_THROW(read_point_cloud(bytes), FormatError);
  auto bad = write_point_cloud(c);
  bad[0] = 'X';
  EXPECT_THROW(read_point_cloud(bad), FormatError);
  EXPECT_THROW(read_point_cloud(std::vector<std::uint8_t>(7, 0)), FormatError);
}
