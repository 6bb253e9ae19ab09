#pragma once

#include "aia/dcton.hpp"
#include "aia/dtcwt.hpp"
#include "aia/image.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace aia {

/// Singular values below this are reported as exact zeros.
inline constexpr double kSingularValueFloor = 1e-10;

/// Non-increasing singular values, length min(rows, cols). Throws DataError on non-finite input.
Eigen::VectorXd svd_values(const Eigen::MatrixXd& m);

/// Count of singular values above kSingularValueFloor.
int numerical_rank(const Eigen::VectorXd& sigmas);

/// Half-open pixel rectangle.
struct Region {
  int row = 0;
  int col = 0;
  int rows = 0;
  int cols = 0;
};

/// A1..A4 are the quadrants (top-left, top-right, bottom-left, bottom-right),
/// A5 is the centred rectangle of half width and half height.
std::array<Region, 5> segment_regions(int rows, int cols);

struct LowLevelConfig {
  double color_tolerance = 8.0;
  int quantization_levels = 16;
  std::vector<Offset> offsets{{1, 0}, {0, 1}};
  int texture_size = 128;  // grayscale resize before decomposition
  int levels = 4;
};

struct LowLevelDescriptor {
  Eigen::Vector4d dcton;  // contrast, correlation, energy, homogeneity
  Eigen::VectorXd texture;  // five region blocks, each 16 singular-value lists
  Eigen::VectorXd fused;  // [dcton, texture]
};

/// Fused descriptor length for a configuration (fixed, image-size independent).
int lowlevel_length(const LowLevelConfig& config);

LowLevelDescriptor extract_lowlevel(const RgbImage& image, const LowLevelConfig& config = {});

/// Per-region singular values of the 16 final-level subband matrices.
Eigen::VectorXd region_texture(const Eigen::MatrixXd& gray_region, int levels);

}  // namespace aia
