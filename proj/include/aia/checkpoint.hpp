#pragma once

#include "aia/annotator.hpp"
#include "aia/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace aia {

/// Versioned binary model file:
///   char[8] magic "AIACKPT\0", u32 version,
///   u32 + bytes config echo, u64 epoch, u64 seed, f64 loss,
///   u32 keyword count, then u32 + bytes per keyword,
///   u32 tensor count, then per tensor u32 + bytes name, u32 rows, u32 cols, rows*cols f64 (row-major),
///   u32 CRC-32 of everything before it.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string config_text;
  std::uint64_t epoch = 0;
  std::uint64_t seed = 0;
  double loss = 0.0;

  Vocabulary vocabulary;
  FeatureNormalizer ll_normalizer;
  FeatureNormalizer hl_normalizer;
  AnnotatorModel model;
  TagGenerator generator;
};

std::vector<std::uint8_t> serialize(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aia
