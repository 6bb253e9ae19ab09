#pragma once

#include "aia/image.hpp"

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace aia {

/// Intermediate colour-ton image: averaged intensities plus their quantization.
struct DctonImage {
  Eigen::MatrixXd values;    // [0, 255]
  Eigen::MatrixXi quantized;  // [0, levels)
  int levels = 0;
};

/// Scans non-overlapping 2x2 blocks. Inside a block, the four edge-adjacent
/// pixel pairs (top, bottom, left, right) are the ton patterns; a pair matches
/// when every channel differs by at most `color_tolerance`. Matched pairs are
/// joined into components and each component's pixels take the component's
/// mean luma. Unmatched pixels keep their own luma. Trailing odd rows/columns
/// are not covered by a block and keep their luma.
DctonImage build_dcton(const RgbImage& image, double color_tolerance, int levels);

/// Maps an intensity in [0, 255] to [0, levels).
int quantize(double value, int levels);

/// Column/row displacement of the second pixel of a co-occurring pair.
struct Offset {
  int dx = 0;
  int dy = 0;
};

struct GlcmStats {
  double contrast = 0.0;
  double correlation = 0.0;
  double energy = 0.0;  // angular second moment, sum of p^2
  double homogeneity = 0.0;
};

/// Raw symmetric co-occurrence counts for one offset (each pair counted in both orders).
Eigen::MatrixXd glcm_counts(const Eigen::MatrixXi& quantized, int levels, Offset offset);

/// Symmetric, normalized co-occurrence matrix averaged over `offsets`.
Eigen::MatrixXd glcm_matrix(const Eigen::MatrixXi& quantized, int levels, const std::vector<Offset>& offsets);

/// Haralick statistics of a normalized matrix. Zero-variance correlation is 0.
GlcmStats haralick(const Eigen::MatrixXd& p);

GlcmStats glcm_stats(const DctonImage& dcton, const std::vector<Offset>& offsets);

}  // namespace aia
