#include "aia/image.hpp"

#include "aia/error.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace aia {

Eigen::MatrixXd to_gray(const RgbImage& image) {
  Eigen::MatrixXd gray(image.height, image.width);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) gray(r, c) = luma(image.pixel(r, c));
  }
  return gray;
}

Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& src, int rows, int cols) {
  if (src.rows() == 0 || src.cols() == 0 || rows <= 0 || cols <= 0) {
    throw DimensionError("resize_bilinear: empty source or target");
  }
  if (src.rows() == rows && src.cols() == cols) return src;

  const double sy = static_cast<double>(src.rows()) / rows;
  const double sx = static_cast<double>(src.cols()) / cols;
  const auto last_r = static_cast<double>(src.rows() - 1);
  const auto last_c = static_cast<double>(src.cols() - 1);

  Eigen::MatrixXd out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, last_r);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, static_cast<int>(src.rows() - 1));
    const double fy = y - y0;
    for (int c = 0; c < cols; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, last_c);
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, static_cast<int>(src.cols() - 1));
      const double fx = x - x0;
      const double top = src(y0, x0) * (1 - fx) + src(y0, x1) * fx;
      const double bottom = src(y1, x0) * (1 - fx) + src(y1, x1) * fx;
      out(r, c) = top * (1 - fy) + bottom * fy;
    }
  }
  return out;
}

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

RgbImage decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw DataError("unreadable PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    throw DataError("empty PNG: " + path.string());
  }
  RgbImage image(static_cast<int>(png.width), static_cast<int>(png.height));
  if (!png_image_finish_read(&png, nullptr, image.data.data(), 0, nullptr)) {
    png_image_free(&png);
    throw DataError("corrupt PNG " + path.string() + ": " + png.message);
  }
  return image;
}

struct PnmHeader {
  char kind = 0;  // '2', '3', '5', '6'
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

// Parses whitespace/comment separated header tokens.
PnmHeader parse_pnm_header(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '3' && bytes[1] != '5' && bytes[1] != '6')) {
    throw DataError("unsupported image format: " + path.string());
  }
  PnmHeader header;
  header.kind = static_cast<char>(bytes[1]);
  std::size_t pos = 2;
  int values[3] = {0, 0, 0};
  for (int& value : values) {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw DataError("corrupt PNM header: " + path.string());
    long long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1 << 24)) throw DataError("corrupt PNM header: " + path.string());
    }
    value = static_cast<int>(v);
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DataError("corrupt PNM header: " + path.string());
  header.data_offset = pos + 1;
  header.width = values[0];
  header.height = values[1];
  header.maxval = values[2];
  if (header.width <= 0 || header.height <= 0 || header.maxval <= 0 || header.maxval > 65535) {
    throw DataError("corrupt PNM header: " + path.string());
  }
  return header;
}

RgbImage decode_pnm(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  const PnmHeader h = parse_pnm_header(bytes, path);
  const bool color = h.kind == '3' || h.kind == '6';
  const int channels = color ? 3 : 1;
  const std::size_t samples = static_cast<std::size_t>(h.width) * h.height * channels;
  std::vector<int> raw(samples);

  if (h.kind == '5' || h.kind == '6') {
    const int width = h.maxval > 255 ? 2 : 1;
    if (bytes.size() < h.data_offset + samples * width) throw DataError("truncated PNM data: " + path.string());
    const std::uint8_t* p = bytes.data() + h.data_offset;
    for (std::size_t i = 0; i < samples; ++i) raw[i] = width == 2 ? (p[2 * i] << 8) | p[2 * i + 1] : p[i];
  } else {
    std::size_t pos = h.data_offset;
    for (std::size_t i = 0; i < samples; ++i) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw DataError("truncated PNM data: " + path.string());
      int v = 0;
      while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
      raw[i] = v;
    }
  }

  RgbImage image(h.width, h.height);
  for (std::size_t px = 0; px < static_cast<std::size_t>(h.width) * h.height; ++px) {
    for (int ch = 0; ch < 3; ++ch) {
      const int v = raw[px * channels + (color ? ch : 0)];
      if (v > h.maxval) throw DataError("PNM sample exceeds maxval: " + path.string());
      image.data[px * 3 + ch] =
          static_cast<std::uint8_t>(h.maxval == 255 ? v : std::lround(255.0 * v / h.maxval));
    }
  }
  return image;
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (is_png(bytes)) return decode_png(bytes, path);
  return decode_pnm(bytes, path);
}

bool probe_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::vector<std::uint8_t> head(512);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  if (is_png(head)) return true;
  try {
    parse_pnm_header(head, path);
    return true;
  } catch (const DataError&) {
    return false;
  }
}

void save_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image: " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
  if (!out) throw DataError("failed writing image: " + path.string());
}

}  // namespace aia
