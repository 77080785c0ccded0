#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvote/error.hpp"
#include "nvote/point_cloud.hpp"
#include "nvote/text.hpp"

namespace nvote {

// Pinhole intrinsics taken from the left color camera projection matrix P2.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("focal lengths must be positive");
    if (!(cx >= 0.0) || !(cy >= 0.0)) throw ValidationError("principal point must be non-negative");
  }
};

// Row-major metric depth; 0 marks an invalid pixel.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  float at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  bool empty() const { return depth.empty(); }
};

// Decoded single-channel image as it comes off disk.
struct GrayImage {
  int width = 0;
  int height = 0;
  int bit_depth = 16;
  std::vector<std::uint16_t> pixels;
};

// Depth images follow the KITTI depth-completion convention: meters * 256.
inline constexpr double kDepthScale = 256.0;

inline DepthMap load_depth_map(const GrayImage& image) {
  if (image.bit_depth != 16) {
    throw FormatError("depth image must be 16-bit, got " + std::to_string(image.bit_depth) + "-bit");
  }
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw FormatError("depth image dimensions do not match pixel buffer");
  }
  DepthMap map{image.width, image.height, {}};
  map.depth.reserve(image.pixels.size());
  for (auto raw : image.pixels) map.depth.push_back(static_cast<float>(raw / kDepthScale));
  return map;
}

inline GrayImage encode_depth_map(const DepthMap& map) {
  GrayImage image{map.width, map.height, 16, {}};
  image.pixels.reserve(map.depth.size());
  for (float d : map.depth) {
    const double raw = std::round(static_cast<double>(d) * kDepthScale);
    image.pixels.push_back(static_cast<std::uint16_t>(std::clamp(raw, 0.0, 65535.0)));
  }
  return image;
}

inline CameraIntrinsics parse_calib(std::string_view text) {
  for (auto line : text::split_lines(text)) {
    auto tokens = text::split_ws(line);
    if (tokens.empty() || tokens.front() != "P2:") continue;
    if (tokens.size() != 13) {
      throw ParseError("P2 line must hold 12 values, found " + std::to_string(tokens.size() - 1));
    }
    std::array<double, 12> p{};
    for (std::size_t i = 0; i < 12; ++i) p[i] = text::to_real(tokens[i + 1], "P2 entry");
    return CameraIntrinsics{p[0], p[5], p[2], p[6]};
  }
  throw ParseError("calibration text has no P2 line");
}

struct Box2DExtent {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double height() const { return bottom - top; }
  double width() const { return right - left; }
};

// One KITTI label row. DontCare rows keep their placeholder geometry.
struct GroundTruthObject {
  std::string type;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Box2DExtent bbox;
  double h = 0.0, w = 0.0, l = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double rotation_y = 0.0;

  bool is_dont_care() const { return type == "DontCare"; }
};

struct Detection : GroundTruthObject {
  double score = 0.0;
};

namespace detail {

inline GroundTruthObject parse_object_fields(std::span<const std::string_view> f) {
  GroundTruthObject o;
  o.type = std::string(f[0]);
  o.truncation = text::to_real(f[1], "truncation");
  o.occlusion = static_cast<int>(text::to_real(f[2], "occlusion"));
  o.alpha = text::to_real(f[3], "alpha");
  o.bbox = {text::to_real(f[4], "bbox"), text::to_real(f[5], "bbox"), text::to_real(f[6], "bbox"),
            text::to_real(f[7], "bbox")};
  o.h = text::to_real(f[8], "dimension");
  o.w = text::to_real(f[9], "dimension");
  o.l = text::to_real(f[10], "dimension");
  o.x = text::to_real(f[11], "location");
  o.y = text::to_real(f[12], "location");
  o.z = text::to_real(f[13], "location");
  o.rotation_y = text::to_real(f[14], "rotation_y");
  return o;
}

inline void validate_object(const GroundTruthObject& o) {
  if (o.is_dont_care()) return;
  if (!(o.bbox.right > o.bbox.left) || !(o.bbox.bottom > o.bbox.top)) {
    throw ValidationError("degenerate 2D box");
  }
  if (!(o.h > 0.0) || !(o.w > 0.0) || !(o.l > 0.0)) throw ValidationError("non-positive dimensions");
}

inline std::string line_prefix(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

template <class Parse>
auto parse_rows(std::string_view text, std::size_t fields, Parse&& parse) {
  std::vector<decltype(parse(std::span<const std::string_view>{}))> out;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(text)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    auto tokens = text::split_ws(line);
    if (tokens.size() != fields) {
      throw ParseError(line_prefix(line_no) + "expected " + std::to_string(fields) + " fields, found " +
                       std::to_string(tokens.size()));
    }
    try {
      out.push_back(parse(std::span<const std::string_view>(tokens)));
    } catch (const ParseError& e) {
      throw ParseError(line_prefix(line_no) + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(line_prefix(line_no) + e.what());
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<GroundTruthObject> parse_labels(std::string_view text) {
  return detail::parse_rows(text, 15, [](std::span<const std::string_view> f) {
    auto o = detail::parse_object_fields(f);
    detail::validate_object(o);
    return o;
  });
}

inline std::vector<Detection> parse_detections(std::string_view text) {
  return detail::parse_rows(text, 16, [](std::span<const std::string_view> f) {
    Detection d;
    static_cast<GroundTruthObject&>(d) = detail::parse_object_fields(f.first(15));
    d.score = text::to_real(f[15], "score");
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw ValidationError("score " + std::string(f[15]) + " outside [0, 1]");
    }
    detail::validate_object(d);
    return d;
  });
}

inline std::string format_label(const GroundTruthObject& o) {
  using text::format_real;
  std::string s = o.type;
  for (double v : {o.truncation, static_cast<double>(o.occlusion), o.alpha, o.bbox.left, o.bbox.top,
                   o.bbox.right, o.bbox.bottom, o.h, o.w, o.l, o.x, o.y, o.z, o.rotation_y}) {
    s += ' ';
    s += format_real(v);
  }
  return s;
}

inline std::string format_detection(const Detection& d) {
  return format_label(d) + ' ' + text::format_real(d.score);
}

template <class Range, class Fmt>
std::string join_lines(const Range& rows, Fmt&& fmt) {
  std::string out;
  for (const auto& r : rows) {
    out += fmt(r);
    out += '\n';
  }
  return out;
}

// NVPC layout (little endian):
//   bytes 0..3   magic "NVPC"
//   bytes 4..7   u32 point count
//   bytes 8..11  u32 format version (1)
//   bytes 12..15 reserved, zero
//   then count * 4 f32: x, y, z, sigma
inline constexpr std::array<char, 4> kCloudMagic{'N', 'V', 'P', 'C'};
inline constexpr std::uint32_t kCloudVersion = 1;
inline constexpr std::size_t kCloudHeaderBytes = 16;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline float get_f32(std::span<const std::uint8_t> in, std::size_t at) {
  return std::bit_cast<float>(get_u32(in, at));
}

}  // namespace detail

inline std::vector<std::uint8_t> write_point_cloud(const PointCloud& cloud) {
  std::vector<std::uint8_t> out;
  out.reserve(kCloudHeaderBytes + cloud.size() * 16);
  out.insert(out.end(), kCloudMagic.begin(), kCloudMagic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(cloud.size()));
  detail::put_u32(out, kCloudVersion);
  detail::put_u32(out, 0);
  for (const auto& p : cloud.points) {
    detail::put_f32(out, p.x);
    detail::put_f32(out, p.y);
    detail::put_f32(out, p.z);
    detail::put_f32(out, p.sigma);
  }
  return out;
}

inline PointCloud read_point_cloud(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kCloudHeaderBytes) throw FormatError("point cloud buffer shorter than header");
  if (std::memcmp(bytes.data(), kCloudMagic.data(), 4) != 0) throw FormatError("bad point cloud magic");
  const std::uint32_t count = detail::get_u32(bytes, 4);
  const std::uint32_t version = detail::get_u32(bytes, 8);
  if (version != kCloudVersion) throw FormatError("unsupported point cloud version " + std::to_string(version));
  const std::size_t need = kCloudHeaderBytes + static_cast<std::size_t>(count) * 16;
  if (bytes.size() < need) {
    throw FormatError("truncated point cloud: header declares " + std::to_string(count) + " points");
  }
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0, at = kCloudHeaderBytes; i < count; ++i, at += 16) {
    cloud.points.push_back({detail::get_f32(bytes, at), detail::get_f32(bytes, at + 4),
                            detail::get_f32(bytes, at + 8), detail::get_f32(bytes, at + 12)});
  }
  return cloud;
}

inline PointCloud read_point_cloud(std::string_view bytes) {
  return read_point_cloud(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

// Plain "x y z sigma" per line, for inspection with standard tools.
inline std::string write_point_cloud_text(const PointCloud& cloud) {
  return join_lines(cloud.points, [](const PseudoPoint& p) {
    return text::format_real(p.x) + ' ' + text::format_real(p.y) + ' ' + text::format_real(p.z) + ' ' +
           text::format_real(p.sigma);
  });
}

}  // namespace nvote
