#include "aia/dcton.hpp"

#include "aia/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

namespace aia {

namespace {

bool same_ton(const std::uint8_t* a, const std::uint8_t* b, double tolerance) {
  for (int ch = 0; ch < 3; ++ch) {
    if (std::abs(static_cast<int>(a[ch]) - static_cast<int>(b[ch])) > tolerance) return false;
  }
  return true;
}

// Block positions: 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right.
constexpr std::array<std::array<int, 2>, 4> kTonPatterns{{{0, 1}, {2, 3}, {0, 2}, {1, 3}}};

int find_root(std::array<int, 4>& parent, int i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

}  // namespace

int quantize(double value, int levels) {
  const int q = static_cast<int>(std::floor(value * levels / 256.0));
  return std::clamp(q, 0, levels - 1);
}

DctonImage build_dcton(const RgbImage& image, double color_tolerance, int levels) {
  if (image.width < 2 || image.height < 2) throw DataError("build_dcton: image must be at least 2x2");
  if (levels < 2) throw std::invalid_argument("build_dcton: need at least 2 quantization levels");
  if (color_tolerance < 0) throw std::invalid_argument("build_dcton: negative colour tolerance");

  DctonImage out;
  out.levels = levels;
  out.values = to_gray(image);

  for (int r = 0; r + 1 < image.height; r += 2) {
    for (int c = 0; c + 1 < image.width; c += 2) {
      const std::array<std::array<int, 2>, 4> pos{{{r, c}, {r, c + 1}, {r + 1, c}, {r + 1, c + 1}}};
      std::array<int, 4> parent{0, 1, 2, 3};
      std::array<bool, 4> joined{};
      for (const auto& [a, b] : kTonPatterns) {
        if (same_ton(image.pixel(pos[a][0], pos[a][1]), image.pixel(pos[b][0], pos[b][1]), color_tolerance)) {
          parent[find_root(parent, a)] = find_root(parent, b);
          joined[a] = joined[b] = true;
        }
      }
      std::array<double, 4> sum{};
      std::array<int, 4> count{};
      for (int k = 0; k < 4; ++k) {
        if (!joined[k]) continue;
        const int root = find_root(parent, k);
        sum[root] += out.values(pos[k][0], pos[k][1]);
        ++count[root];
      }
      for (int k = 0; k < 4; ++k) {
        if (!joined[k]) continue;
        const int root = find_root(parent, k);
        out.values(pos[k][0], pos[k][1]) = sum[root] / count[root];
      }
    }
  }

  out.quantized.resize(out.values.rows(), out.values.cols());
  for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.values.cols(); ++c) out.quantized(r, c) = quantize(out.values(r, c), levels);
  }
  return out;
}

Eigen::MatrixXd glcm_counts(const Eigen::MatrixXi& quantized, int levels, Offset offset) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(levels, levels);
  const auto rows = static_cast<int>(quantized.rows());
  const auto cols = static_cast<int>(quantized.cols());
  for (int r = std::max(0, -offset.dy); r < std::min(rows, rows - offset.dy); ++r) {
    for (int c = std::max(0, -offset.dx); c < std::min(cols, cols - offset.dx); ++c) {
      const int a = quantized(r, c);
      const int b = quantized(r + offset.dy, c + offset.dx);
      if (a < 0 || a >= levels || b < 0 || b >= levels) throw DataError("glcm: quantized value out of range");
      counts(a, b) += 1;
      counts(b, a) += 1;
    }
  }
  return counts;
}

Eigen::MatrixXd glcm_matrix(const Eigen::MatrixXi& quantized, int levels, const std::vector<Offset>& offsets) {
  if (offsets.empty()) throw std::invalid_argument("glcm: no offsets");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(levels, levels);
  for (const Offset& offset : offsets) {
    const Eigen::MatrixXd counts = glcm_counts(quantized, levels, offset);
    const double total = counts.sum();
    if (total == 0) {
      throw DataError("glcm: image " + std::to_string(quantized.rows()) + "x" + std::to_string(quantized.cols()) +
                      " is smaller than offset (" + std::to_string(offset.dx) + "," + std::to_string(offset.dy) + ")");
    }
    p += counts / total;
  }
  return p / static_cast<double>(offsets.size());
}

GlcmStats haralick(const Eigen::MatrixXd& p) {
  const auto levels = p.rows();
  double mu_i = 0, mu_j = 0;
  for (Eigen::Index i = 0; i < levels; ++i) {
    for (Eigen::Index j = 0; j < levels; ++j) {
      mu_i += static_cast<double>(i) * p(i, j);
      mu_j += static_cast<double>(j) * p(i, j);
    }
  }
  GlcmStats s;
  double var_i = 0, var_j = 0, cov = 0;
  for (Eigen::Index i = 0; i < levels; ++i) {
    for (Eigen::Index j = 0; j < levels; ++j) {
      const double v = p(i, j);
      const auto d = static_cast<double>(i - j);
      s.contrast += d * d * v;
      s.energy += v * v;
      s.homogeneity += v / (1.0 + std::abs(d));
      var_i += (i - mu_i) * (i - mu_i) * v;
      var_j += (j - mu_j) * (j - mu_j) * v;
      cov += (i - mu_i) * (j - mu_j) * v;
    }
  }
  const double denom = std::sqrt(var_i * var_j);
  s.correlation = denom > 1e-15 ? std::clamp(cov / denom, -1.0, 1.0) : 0.0;
  return s;
}

GlcmStats glcm_stats(const DctonImage& dcton, const std::vector<Offset>& offsets) {
  if (dcton.quantized.size() == 0) throw DataError("glcm_stats: no quantized image");
  return haralick(glcm_matrix(dcton.quantized, dcton.levels, offsets));
}

}  // namespace aia
