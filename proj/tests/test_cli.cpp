#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "nvote/nvote.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace nvote;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const fs::path& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const std::string cmd = std::string(NVOTE_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = fs::exists(out) ? text::read_file(out) : "";
  return r;
}

std::string value_of(const std::string& report, const std::string& key) {
  const std::string padded = "\n" + report;
  const std::string needle = "\n" + key + "=";
  const auto at = padded.find(needle);
  if (at == std::string::npos) return {};
  const auto start = at + needle.size();
  return padded.substr(start, padded.find('\n', start) - start);
}

void write(const fs::path& p, const std::string& s) { text::write_file_atomic(p, s); }

}  // namespace

TEST(Cli, UsageErrors) {
  const auto dir = testutil::scratch_dir("cli_usage");
  EXPECT_EQ(run(dir, "").code, 1);
  EXPECT_EQ(run(dir, "nonsense").code, 1);
  EXPECT_EQ(run(dir, "vote-filter --detections x").code, 1);
  EXPECT_EQ(run(dir, "--help").code, 0);
}

TEST(Cli, Backproject) {
  const auto dir = testutil::scratch_dir("cli_backproject");
  GrayImage img{60, 100, 16, std::vector<std::uint16_t>(6000, 3584)};
  img.pixels[0] = 0;
  write_png_gray16(dir / "depth.png", img);
  write(dir / "calib.txt", "P2: 700 0 30 0 0 700 50 0 0 0 1 0\n");
  write(dir / "boxes.txt", "0 0 9 9 0.8\n");

  auto r = run(dir, "backproject --depth " + (dir / "depth.png").string() + " --calib " + (dir / "calib.txt").string() +
                        " --out " + (dir / "a.nvpc").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("points=5999"), std::string::npos);
  const auto plain = read_point_cloud(text::read_file(dir / "a.nvpc"));
  ASSERT_EQ(plain.size(), 5999u);
  for (const auto& p : plain.points) ASSERT_EQ(p.sigma, 0.0f);

  r = run(dir, "backproject --depth " + (dir / "depth.png").string() + " --calib " + (dir / "calib.txt").string() +
                   " --boxes2d " + (dir / "boxes.txt").string() + " --out " + (dir / "b.nvpc").string());
  ASSERT_EQ(r.code, 0);
  const auto scored = read_point_cloud(text::read_file(dir / "b.nvpc"));
  int inside = 0;
  for (const auto& p : scored.points) inside += p.sigma == 0.8f;
  EXPECT_EQ(inside, 99);  // 10 x 10 pixels minus the invalid one

  // 6000-pixel map, all valid.
  img.pixels[0] = 3584;
  write_png_gray16(dir / "full.png", img);
  r = run(dir, "backproject --depth " + (dir / "full.png").string() + " --calib " + (dir / "calib.txt").string() +
                   " --downsample 6 --seed 3 --out " + (dir / "c.nvpc").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(read_point_cloud(text::read_file(dir / "c.nvpc")).size(), 1000u);

  EXPECT_EQ(run(dir, "backproject --depth " + (dir / "missing.png").string() + " --calib " +
                         (dir / "calib.txt").string() + " --out " + (dir / "d.nvpc").string())
                .code,
            2);
}

TEST(Cli, VoteFilterIdentityAndEmpty) {
  const auto dir = testutil::scratch_dir("cli_vote_filter");
  write(dir / "open.cfg", "vote.tau = 0\nvote.nms = off\n");
  std::string dets;
  for (auto d : {testutil::det(0, 10, 0.9), testutil::det(0.3, 10, 0.8), testutil::det(25, 60, 0.5)}) {
    dets += format_detection(d) + "\n";
  }
  write(dir / "dets.txt", dets);
  auto r = run(dir, "vote-filter --detections " + (dir / "dets.txt").string() + " --config " +
                        (dir / "open.cfg").string() + " --out " + (dir / "out.txt").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(text::read_file(dir / "out.txt"), dets);

  write(dir / "empty.txt", "");
  r = run(dir, "vote-filter --detections " + (dir / "empty.txt").string() + " --config " +
                   (dir / "open.cfg").string() + " --out " + (dir / "out2.txt").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(text::read_file(dir / "out2.txt"), "");

  write(dir / "bad.cfg", "vote.tau = -1\n");
  EXPECT_EQ(run(dir, "vote-filter --detections " + (dir / "dets.txt").string() + " --config " +
                         (dir / "bad.cfg").string() + " --out " + (dir / "out3.txt").string())
                .code,
            3);
  write(dir / "typo.cfg", "vote.tua = 1\n");
  EXPECT_EQ(run(dir, "vote-filter --detections " + (dir / "dets.txt").string() + " --config " +
                         (dir / "typo.cfg").string() + " --out " + (dir / "out3.txt").string())
                .code,
            3);

  // NMS on: the two overlapping boxes collapse to the higher score.
  write(dir / "nms.cfg", "vote.tau = 0\n");
  r = run(dir, "vote-filter --detections " + (dir / "dets.txt").string() + " --config " +
                   (dir / "nms.cfg").string() + " --out " + (dir / "out4.txt").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(parse_detections(text::read_file(dir / "out4.txt")).size(), 2u);
}

TEST(Cli, SimulatedSceneFalsePositiveRemoved) {
  const auto dir = testutil::scratch_dir("cli_sim_scene");
  write(dir / "sim.cfg", "noise.fp_rate = 2\n");
  auto r = run(dir, "simulate --config " + (dir / "sim.cfg").string() + " --scenes 12 --seed 4 --report " +
                        (dir / "report.txt").string() + " --scene-dir " + (dir / "scenes").string());
  ASSERT_EQ(r.code, 0);
  int checked = 0;
  for (int i = 0; i < 12; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "%06d", i);
    const auto meta = text::read_file(dir / "scenes" / "meta" / (std::string(id) + ".txt"));
    if (meta.find(" fp ") == std::string::npos) continue;
    const auto out = dir / (std::string(id) + "_out.txt");
    r = run(dir, "vote-filter --detections " + (dir / "scenes" / "detections" / (std::string(id) + ".txt")).string() +
                     " --config " + (dir / "sim.cfg").string() + " --votes " +
                     (dir / "scenes" / "votes" / (std::string(id) + ".nvdm")).string() + " --out " + out.string());
    ASSERT_EQ(r.code, 0);
    const auto before = parse_detections(text::read_file(dir / "scenes" / "detections" / (std::string(id) + ".txt")));
    const auto after = parse_detections(text::read_file(out));
    std::size_t line = 0;
    for (auto row : text::split_lines(meta)) {
      if (row.empty() || row[0] == '#') continue;
      const bool fp = row.find(" fp ") != std::string_view::npos;
      const auto& d = before[line++];
      const bool kept = std::any_of(after.begin(), after.end(), [&](const Detection& a) { return a.x == d.x && a.z == d.z; });
      if (fp) EXPECT_FALSE(kept) << "scene " << id;
    }
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(Cli, EvalProtocols) {
  const auto dir = testutil::scratch_dir("cli_eval");
  fs::create_directories(dir / "labels");
  fs::create_directories(dir / "perfect");
  fs::create_directories(dir / "empty");
  const std::vector<GroundTruthObject> gts{testutil::car(0, 10), testutil::car(0, 30), testutil::car(5, 55)};
  std::string labels, perfect;
  for (const auto& g : gts) {
    labels += format_label(g) + "\n";
    perfect += format_detection(testutil::as_detection(g, 0.9)) + "\n";
  }
  write(dir / "labels" / "000000.txt", labels);
  write(dir / "labels" / "000001.txt", labels);
  write(dir / "perfect" / "000000.txt", perfect);
  write(dir / "perfect" / "000001.txt", perfect);
  write(dir / "empty" / "000000.txt", "");
  write(dir / "empty" / "000001.txt", "");

  auto r = run(dir, "eval --detections " + (dir / "perfect").string() + " --labels " + (dir / "labels").string() +
                        " --buckets 0:40,40:70");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(value_of(r.out, "ap_moderate"), "1.000000");
  EXPECT_EQ(value_of(r.out, "bucket_0_40_ap"), "1.000000");
  EXPECT_EQ(value_of(r.out, "bucket_40_70_ap"), "1.000000");

  r = run(dir, "eval --detections " + (dir / "empty").string() + " --labels " + (dir / "labels").string() +
                   " --recall-points 40");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(value_of(r.out, "ap_moderate"), "0.000000");

  write(dir / "hand_labels.txt", format_label(testutil::car(0, 10)) + "\n" + format_label(testutil::car(0, 30)) + "\n");
  write(dir / "hand_dets.txt", format_detection(testutil::det(0, 10, 0.9)) + "\n" +
                                   format_detection(testutil::det(20, 50, 0.8)) + "\n" +
                                   format_detection(testutil::det(0, 30, 0.7)) + "\n");
  r = run(dir, "eval --detections " + (dir / "hand_dets.txt").string() + " --labels " +
                   (dir / "hand_labels.txt").string() + " --iou 0.7 --recall-points 11 --difficulty moderate");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(value_of(r.out, "ap_moderate"), "0.848485");

  fs::remove(dir / "perfect" / "000001.txt");
  r = run(dir, "eval --detections " + (dir / "perfect").string() + " --labels " + (dir / "labels").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(text::read_file(dir / "stderr.txt").find("000001"), std::string::npos);

  EXPECT_EQ(run(dir, "eval --detections " + (dir / "empty").string() + " --labels " + (dir / "labels").string() +
                         " --recall-points 12")
                .code,
            3);
}

TEST(Cli, SimulateReports) {
  const auto dir = testutil::scratch_dir("cli_simulate");
  write(dir / "quiet.cfg",
        "noise.sigma0 = 0\nnoise.sigma1 = 0\nnoise.p_edge = 0\nnoise.slice_step = 0\nnoise.det_jitter = 0\n"
        "noise.fp_rate = 0\nnoise.vote_sigma = 0\n");
  auto r = run(dir, "simulate --config " + (dir / "quiet.cfg").string() + " --scenes 1 --seed 1 --report " +
                        (dir / "quiet.txt").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(value_of(text::read_file(dir / "quiet.txt"), "tp_retention_rate"), "1.000000");

  const std::string args = "simulate --scenes 200 --seed 7 --csv " + (dir / "a.csv").string() + " --report ";
  ASSERT_EQ(run(dir, args + (dir / "a.txt").string()).code, 0);
  ASSERT_EQ(run(dir, "simulate --scenes 200 --seed 7 --threads 3 --report " + (dir / "b.txt").string()).code, 0);
  const auto a = text::read_file(dir / "a.txt");
  EXPECT_EQ(a, text::read_file(dir / "b.txt"));
  EXPECT_GT(std::stod(value_of(a, "mean_tp_support")), std::stod(value_of(a, "mean_fp_support")));
  EXPECT_TRUE(fs::exists(dir / "a.csv"));
}

TEST(Cli, Render) {
  const auto dir = testutil::scratch_dir("cli_render");
  PointCloud c;
  c.points.push_back({0.05f, 0.0f, 35.25f, 0.9f});
  const auto bytes = write_point_cloud(c);
  write(dir / "c.nvpc", std::string(bytes.begin(), bytes.end()));
  write(dir / "d.txt", format_detection(testutil::det(10, 40, 0.9)) + "\n");
  write(dir / "l.txt", format_label(testutil::car(-10, 20)) + "\n");
  auto r = run(dir, "render --cloud " + (dir / "c.nvpc").string() + " --detections " + (dir / "d.txt").string() +
                        " --labels " + (dir / "l.txt").string() + " --out " + (dir / "bev.ppm").string());
  ASSERT_EQ(r.code, 0);
  const auto ppm = text::read_file(dir / "bev.ppm");
  EXPECT_EQ(ppm.substr(0, 15), "P6\n500 440\n255\n");
  EXPECT_EQ(ppm.size(), 15u + 500u * 440u * 3u);
  write(dir / "junk.nvpc", "junk");
  EXPECT_EQ(run(dir, "render --cloud " + (dir / "junk.nvpc").string() + " --out " + (dir / "x.ppm").string()).code, 2);
}

TEST(Cli, KernelSelftest) {
  const auto dir = testutil::scratch_dir("cli_kernels");
  const auto r = run(dir, "kernels-selftest");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
