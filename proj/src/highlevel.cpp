#include "aia/highlevel.hpp"

#include "aia/error.hpp"

#include <cmath>

namespace aia {

HighLevelSource parse_source(const std::string& name) {
  if (name == "vgg16") return HighLevelSource::vgg16;
  if (name == "resnet50") return HighLevelSource::resnet50;
  if (name == "fallback") return HighLevelSource::fallback;
  throw DataError("unknown high-level source: " + name);
}

std::string to_string(HighLevelSource source) {
  switch (source) {
    case HighLevelSource::vgg16: return "vgg16";
    case HighLevelSource::resnet50: return "resnet50";
    case HighLevelSource::fallback: return "fallback";
  }
  return "unknown";
}

HighLevelSet ingest_features(const FeatureFile& file) {
  HighLevelSet set;
  set.source = parse_source(file.source);
  set.dim = file.dim;
  if (set.source == HighLevelSource::vgg16 && file.dim != 4096) {
    set.warnings.push_back("vgg16 features usually have length 4096, header declares " + std::to_string(file.dim));
  }
  if (set.source == HighLevelSource::resnet50 && file.dim != 2048) {
    set.warnings.push_back("resnet50 features usually have length 2048, header declares " +
                           std::to_string(file.dim));
  }
  if (set.source == HighLevelSource::fallback && file.dim != kFallbackLength) {
    set.warnings.push_back("fallback features should have length " + std::to_string(kFallbackLength));
  }
  for (std::size_t i = 0; i < file.size(); ++i) {
    if (!file.vectors[i].allFinite()) throw DataError("high-level vector for " + file.ids[i] + " is not finite");
    set.descriptors.emplace(file.ids[i], HighLevelDescriptor{set.source, file.vectors[i]});
  }
  return set;
}

HighLevelSet ingest_features(const std::filesystem::path& path) { return ingest_features(read_feature_file(path)); }

HighLevelDescriptor fallback_descriptor(const RgbImage& image) {
  if (image.empty()) throw DataError("fallback_descriptor: image has no pixels");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kFallbackLength);
  const double pixels = static_cast<double>(image.width) * image.height;

  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const auto* p = image.pixel(r, c);
      for (int ch = 0; ch < 3; ++ch) v[ch * kHistogramBins + p[ch] * kHistogramBins / 256] += 1.0 / pixels;
    }
  }

  const int offset = 3 * kHistogramBins;
  for (int gr = 0; gr < kIntensityGrid; ++gr) {
    const int r0 = gr * image.height / kIntensityGrid, r1 = (gr + 1) * image.height / kIntensityGrid;
    for (int gc = 0; gc < kIntensityGrid; ++gc) {
      const int c0 = gc * image.width / kIntensityGrid, c1 = (gc + 1) * image.width / kIntensityGrid;
      double sum = 0;
      int count = 0;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c, ++count) sum += luma(image.pixel(r, c));
      }
      v[offset + gr * kIntensityGrid + gc] = count ? sum / count / 255.0 : 0.0;
    }
  }
  // The histogram part always carries mass, so the norm is positive.
  v /= v.norm();
  return {HighLevelSource::fallback, v};
}

std::vector<Eigen::VectorXd> slice_items(const Eigen::VectorXd& vector, int chunks) {
  if (chunks < 1) throw std::invalid_argument("slice_items: need at least one chunk");
  const Eigen::Index len = (vector.size() + chunks - 1) / chunks;
  std::vector<Eigen::VectorXd> items;
  for (int k = 0; k < chunks; ++k) {
    Eigen::VectorXd item = Eigen::VectorXd::Zero(len);
    const Eigen::Index start = k * len;
    const Eigen::Index n = std::max<Eigen::Index>(0, std::min(len, vector.size() - start));
    if (n > 0) item.head(n) = vector.segment(start, n);
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace aia
