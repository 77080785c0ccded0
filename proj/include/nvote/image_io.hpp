#pragma once

// Grayscale depth image and RGB raster file I/O.
// PNG support needs libpng at link time (the nvote CMake target provides it).

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nvote/error.hpp"
#include "nvote/kitti_io.hpp"
#include "nvote/text.hpp"

namespace nvote {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int w, int h, std::array<std::uint8_t, 3> fill = {0, 0, 0})
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
      rgb[i] = fill[0];
      rgb[i + 1] = fill[1];
      rgb[i + 2] = fill[2];
    }
  }

  std::array<std::uint8_t, 3> at(int col, int row) const {
    const auto i = (static_cast<std::size_t>(row) * width + col) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }

  void set(int col, int row, std::array<std::uint8_t, 3> c) {
    if (col < 0 || row < 0 || col >= width || row >= height) return;
    const auto i = (static_cast<std::size_t>(row) * width + col) * 3;
    rgb[i] = c[0];
    rgb[i + 1] = c[1];
    rgb[i + 2] = c[2];
  }
};

// Binary PPM (P6).
inline std::string encode_ppm(const RgbImage& image) {
  std::string out = "P6\n" + std::to_string(image.width) + ' ' + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
inline std::string encode_pgm16(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + ' ' + std::to_string(image.height) + "\n65535\n";
  for (auto v : image.pixels) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

namespace detail {

inline std::size_t pnm_header_token(std::string_view data, std::size_t& pos, std::string& tok) {
  tok.clear();
  while (pos < data.size()) {
    char c = data[pos];
    if (c == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  while (pos < data.size() && data[pos] != ' ' && data[pos] != '\t' && data[pos] != '\r' &&
         data[pos] != '\n') {
    tok.push_back(data[pos++]);
  }
  return pos;
}

}  // namespace detail

inline GrayImage decode_pgm(std::string_view data) {
  std::size_t pos = 0;
  std::string tok;
  detail::pnm_header_token(data, pos, tok);
  if (tok != "P5") throw FormatError("not a binary PGM file");
  int dims[3];
  for (int& d : dims) {
    detail::pnm_header_token(data, pos, tok);
    try {
      d = static_cast<int>(text::to_integer(tok, "PGM header"));
    } catch (const ParseError& e) {
      throw FormatError(e.what());
    }
  }
  ++pos;  // single whitespace before raster
  const int w = dims[0], h = dims[1], maxval = dims[2];
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw FormatError("bad PGM header");
  GrayImage image{w, h, maxval > 255 ? 16 : 8, {}};
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (data.size() < pos + n * bpp) throw FormatError("truncated PGM raster");
  image.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos + i * bpp);
    image.pixels[i] = bpp == 2 ? static_cast<std::uint16_t>((p[0] << 8) | p[1]) : p[0];
  }
  return image;
}

inline GrayImage read_png_gray(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) throw ParseError("cannot open file: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng initialisation failed");
  }

  GrayImage image;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raster;
  bool bad_type = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    bad_type = true;
  } else {
    if (depth == 16) png_set_swap(png);  // host order on little-endian machines
    png_read_update_info(png, info);
    const auto stride = png_get_rowbytes(png, info);
    raster.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + r * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (bad_type) throw FormatError("PNG is not single-channel grayscale: " + path.string());

  image.width = static_cast<int>(width);
  image.height = static_cast<int>(height);
  image.bit_depth = depth;
  image.pixels.resize(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    if (depth == 16) {
      image.pixels[i] = static_cast<std::uint16_t>(raster[2 * i] | (raster[2 * i + 1] << 8));
    } else if (depth == 8) {
      image.pixels[i] = raster[i];
    } else {
      image.pixels[i] = 0;  // sub-byte depths are rejected downstream
    }
  }
  return image;
}

inline void write_png_gray16(const std::filesystem::path& path, const GrayImage& image) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw Error("cannot write file: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialisation failed");
  }
  std::vector<std::uint8_t> raster(image.pixels.size() * 2);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    raster[2 * i] = static_cast<std::uint8_t>(image.pixels[i] >> 8);
    raster[2 * i + 1] = static_cast<std::uint8_t>(image.pixels[i] & 0xFF);
  }
  std::vector<png_bytep> rows(image.height);
  for (int r = 0; r < image.height; ++r) rows[r] = raster.data() + static_cast<std::size_t>(r) * image.width * 2;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encoding failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Dispatches on file signature: PNG or binary PGM.
inline GrayImage read_gray_image(const std::filesystem::path& path) {
  const std::string head = [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path.string());
    std::string h(8, '\0');
    in.read(h.data(), 8);
    h.resize(static_cast<std::size_t>(in.gcount()));
    return h;
  }();
  if (head.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(head.data()), 0, 8) == 0) {
    return read_png_gray(path);
  }
  if (head.rfind("P5", 0) == 0) return decode_pgm(text::read_file(path));
  throw FormatError("unrecognised image format: " + path.string());
}

}  // namespace nvote
