#pragma once

#include "aia/image.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aia {

/// Ordered, duplicate-free keyword dictionary.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws DataError on duplicates or an empty list.
  explicit Vocabulary(std::vector<std::string> keywords);

  std::size_t size() const { return keywords_.size(); }
  const std::string& keyword(std::size_t index) const { return keywords_.at(index); }
  const std::vector<std::string>& keywords() const { return keywords_; }
  std::optional<std::size_t> find(const std::string& keyword) const;
  std::size_t index_of(const std::string& keyword) const;  // throws DataError

  bool operator==(const Vocabulary& other) const { return keywords_ == other.keywords_; }

 private:
  std::vector<std::string> keywords_;
  std::map<std::string, std::size_t> index_;
};

struct ImageRecord {
  std::string id;                        // path as written in the manifest
  std::filesystem::path path;            // resolved against the manifest directory
  bool feature_only = false;             // no pixels; features must be supplied elsewhere
  std::vector<std::size_t> tag_indices;  // sorted, unique
};

/// Binary N x M matrix; row i is the indicator vector of image i's tags.
using AnnotationMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

class AnnotatedDataset {
 public:
  AnnotatedDataset(Vocabulary vocabulary, std::vector<ImageRecord> images);

  const Vocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<ImageRecord>& images() const { return images_; }
  std::size_t size() const { return images_.size(); }
  const AnnotationMatrix& annotations() const { return phi_; }

  std::optional<std::size_t> find_image(const std::string& id) const;

  /// Subset with the full vocabulary preserved.
  AnnotatedDataset subset(const std::vector<std::size_t>& indices) const;

 private:
  Vocabulary vocabulary_;
  std::vector<ImageRecord> images_;
  AnnotationMatrix phi_;
  std::map<std::string, std::size_t> id_index_;
};

struct ManifestOptions {
  // When false, image files are not opened; unreadable images surface later.
  bool verify_images = true;
};

/// Manifest lines: `<image-path>\t<tag>,<tag>,...`. A path starting with '@'
/// marks a feature-only record (no pixel file).
AnnotatedDataset load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});
void write_manifest(const AnnotatedDataset& dataset, const std::filesystem::path& path);

/// Parses `<id>\t<tags>` lines against an existing vocabulary. Tags that are not
/// in the vocabulary are collected in `unknown_tags` instead of being dropped silently.
struct TagListing {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> rows;
  std::vector<std::string> unknown_tags;
};
TagListing read_tag_listing(const std::filesystem::path& path, const Vocabulary& vocabulary);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then the first train_n go to train, the next val_n to val, the rest to test.
Split split(const AnnotatedDataset& dataset, std::size_t train_n, std::size_t val_n, std::size_t test_n,
            std::uint64_t seed);

void write_split(const AnnotatedDataset& dataset, const Split& split, const std::filesystem::path& path);
Split read_split(const AnnotatedDataset& dataset, const std::filesystem::path& path);

/// T_j: number of images carrying keyword j.
std::vector<std::size_t> tag_frequency(const AnnotatedDataset& dataset);

}  // namespace aia
