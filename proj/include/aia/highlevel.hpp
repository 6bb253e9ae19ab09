#pragma once

#include "aia/feature_file.hpp"
#include "aia/image.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace aia {

enum class HighLevelSource { vgg16, resnet50, fallback };

HighLevelSource parse_source(const std::string& name);
std::string to_string(HighLevelSource source);

struct HighLevelDescriptor {
  HighLevelSource source = HighLevelSource::fallback;
  Eigen::VectorXd vector;
};

struct HighLevelSet {
  HighLevelSource source = HighLevelSource::fallback;
  std::uint32_t dim = 0;
  std::map<std::string, HighLevelDescriptor> descriptors;
  std::vector<std::string> warnings;
};

/// Parses a feature file carrying high-level vectors. The vector length is
/// taken from the header; conventional lengths (4096 for vgg16, 2048 for
/// resnet50) are only checked to produce warnings.
HighLevelSet ingest_features(const std::filesystem::path& path);
HighLevelSet ingest_features(const FeatureFile& file);

inline constexpr int kHistogramBins = 16;
inline constexpr int kIntensityGrid = 8;
inline constexpr int kFallbackLength = 3 * kHistogramBins + kIntensityGrid * kIntensityGrid;

/// Per-channel 16-bin colour histograms (fractions of pixels) followed by an
/// 8x8 grid of mean luma in [0, 1], scaled to unit L2 norm. Length 112.
HighLevelDescriptor fallback_descriptor(const RgbImage& image);

/// Splits one CNN vector into `chunks` equal items (zero padded at the end).
std::vector<Eigen::VectorXd> slice_items(const Eigen::VectorXd& vector, int chunks);

}  // namespace aia
