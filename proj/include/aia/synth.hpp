#pragma once

#include "aia/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aia {

struct SynthOptions {
  std::uint64_t seed = 7;
  int images = 60;
  int keywords = 10;
  double skew = 16.0;  // most / least frequent keyword count ratio
  int image_size = 64;
  int max_tags = 5;
};

struct SynthImage {
  std::string name;
  RgbImage pixels;
  std::vector<std::size_t> keywords;
};

struct SynthDataset {
  std::vector<std::string> keywords;
  std::vector<std::size_t> keyword_counts;
  std::vector<SynthImage> images;
  std::vector<std::vector<double>> embeddings;  // one per keyword
};

/// Target count per keyword, geometric from `skew * base` down to `base`.
std::vector<std::size_t> skewed_counts(int keywords, int images, double skew, int max_tags);

/// Procedural images of coloured primitives; each keyword names one primitive.
SynthDataset make_synthetic(const SynthOptions& options);

/// Writes images/, manifest.tsv and embeddings.txt under `dir`; returns the produced files.
std::vector<std::filesystem::path> write_synthetic(const SynthDataset& data, const std::filesystem::path& dir);

}  // namespace aia
