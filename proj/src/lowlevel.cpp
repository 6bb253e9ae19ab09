#include "aia/lowlevel.hpp"

#include "aia/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <string>

namespace aia {

Eigen::VectorXd svd_values(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw DataError("svd_values: non-finite input");
  if (m.size() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  Eigen::VectorXd sigmas = svd.singularValues();  // already sorted, non-increasing
  for (auto& s : sigmas) {
    if (s < kSingularValueFloor) s = 0.0;
  }
  return sigmas;
}

int numerical_rank(const Eigen::VectorXd& sigmas) {
  return static_cast<int>(std::count_if(sigmas.begin(), sigmas.end(), [](double s) { return s > 0.0; }));
}

std::array<Region, 5> segment_regions(int rows, int cols) {
  const int top = rows / 2, left = cols / 2;
  const int half_r = rows / 2, half_c = cols / 2;
  return {{
      {0, 0, top, left},
      {0, left, top, cols - left},
      {top, 0, rows - top, left},
      {top, left, rows - top, cols - left},
      {(rows - half_r) / 2, (cols - half_c) / 2, half_r, half_c},
  }};
}

int lowlevel_length(const LowLevelConfig& config) {
  const int region = config.texture_size / 2;
  const int final_side = region >> config.levels;
  return 4 + 5 * 16 * final_side;
}

Eigen::VectorXd region_texture(const Eigen::MatrixXd& gray_region, int levels) {
  const SubbandSet bands = dtcwt_forward(gray_region, levels);
  const auto matrices = bands.final_level_matrices();
  Eigen::Index total = 0;
  for (const auto& m : matrices) total += std::min(m.rows(), m.cols());
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& m : matrices) {
    const Eigen::VectorXd s = svd_values(m);
    out.segment(at, s.size()) = s;
    at += s.size();
  }
  return out;
}

LowLevelDescriptor extract_lowlevel(const RgbImage& image, const LowLevelConfig& config) {
  if (image.empty()) throw DataError("extract_lowlevel: image has no pixels");
  if (image.width < 32 || image.height < 32) {
    throw DataError("extract_lowlevel: image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                    " is smaller than 32x32");
  }
  const int region_side = config.texture_size / 2;
  if (config.texture_size % 2 != 0 || region_side % (1 << config.levels) != 0) {
    throw DimensionError("extract_lowlevel: texture size " + std::to_string(config.texture_size) +
                         " does not give regions divisible by 2^" + std::to_string(config.levels));
  }

  LowLevelDescriptor out;
  const DctonImage dcton = build_dcton(image, config.color_tolerance, config.quantization_levels);
  const GlcmStats stats = glcm_stats(dcton, config.offsets);
  out.dcton << stats.contrast, stats.correlation, stats.energy, stats.homogeneity;

  const Eigen::MatrixXd gray = resize_bilinear(to_gray(image), config.texture_size, config.texture_size);
  std::vector<Eigen::VectorXd> blocks;
  Eigen::Index total = 0;
  for (const Region& region : segment_regions(config.texture_size, config.texture_size)) {
    blocks.push_back(region_texture(gray.block(region.row, region.col, region.rows, region.cols), config.levels));
    total += blocks.back().size();
  }
  out.texture.resize(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.texture.segment(at, b.size()) = b;
    at += b.size();
  }
  out.fused.resize(4 + total);
  out.fused << out.dcton, out.texture;
  return out;
}

}  // namespace aia
