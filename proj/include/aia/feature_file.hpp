#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace aia {

/// On-disk descriptor collection shared by low-level extraction, the
/// fallback high-level descriptor and external CNN exporters.
///
/// Layout (all integers little-endian):
///   char[8]  magic "AIAFEAT\0"
///   u32      version (1)
///   u32      source length, then source bytes (e.g. "lowlevel", "vgg16")
///   u32      metadata length, then metadata bytes (free-form provenance)
///   u32      dim
///   u64      count
///   count x { u32 id length, id bytes, dim x f64 }
struct FeatureFile {
  static constexpr std::uint32_t kVersion = 1;

  std::string source;
  std::string metadata;
  std::uint32_t dim = 0;
  std::vector<std::string> ids;
  std::vector<Eigen::VectorXd> vectors;

  std::size_t size() const { return ids.size(); }
  /// id -> position, built on demand.
  std::map<std::string, std::size_t> index() const;
};

std::vector<std::uint8_t> serialize(const FeatureFile& file);
FeatureFile parse_feature_file(const std::vector<std::uint8_t>& bytes);

void write_feature_file(const FeatureFile& file, const std::filesystem::path& path);
FeatureFile read_feature_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path);

}  // namespace aia
