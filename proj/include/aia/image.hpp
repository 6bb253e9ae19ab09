#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace aia {

/// Interleaved 8-bit RGB raster, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* pixel(int row, int col) { return &data[(static_cast<std::size_t>(row) * width + col) * 3]; }
  const std::uint8_t* pixel(int row, int col) const {
    return &data[(static_cast<std::size_t>(row) * width + col) * 3];
  }
  void set(int row, int col, std::array<std::uint8_t, 3> rgb) {
    auto* p = pixel(row, col);
    p[0] = rgb[0];
    p[1] = rgb[1];
    p[2] = rgb[2];
  }
  bool empty() const { return width == 0 || height == 0; }
};

/// ITU-R BT.601 luma.
inline double luma(const std::uint8_t* rgb) { return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]; }

/// Grayscale intensities in [0, 255] as an height x width matrix.
Eigen::MatrixXd to_gray(const RgbImage& image);

/// Bilinear resampling with pixel-center alignment.
Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& src, int rows, int cols);

/// Reads binary/ASCII PNM (P2, P3, P5, P6) and PNG. Throws DataError on failure.
RgbImage load_image(const std::filesystem::path& path);

/// Cheap validity probe: opens the file and parses only the header.
bool probe_image(const std::filesystem::path& path);

/// Writes binary PPM (P6).
void save_ppm(const RgbImage& image, const std::filesystem::path& path);

}  // namespace aia
