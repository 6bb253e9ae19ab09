#include "aia/dataset.hpp"

#include "aia/error.hpp"
#include "aia/rng.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace aia {

Vocabulary::Vocabulary(std::vector<std::string> keywords) : keywords_(std::move(keywords)) {
  if (keywords_.empty()) throw DataError("vocabulary is empty");
  for (std::size_t i = 0; i < keywords_.size(); ++i) {
    if (keywords_[i].empty()) throw DataError("vocabulary contains an empty keyword");
    if (!index_.emplace(keywords_[i], i).second) throw DataError("duplicate keyword: " + keywords_[i]);
  }
}

std::optional<std::size_t> Vocabulary::find(const std::string& keyword) const {
  const auto it = index_.find(keyword);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index_of(const std::string& keyword) const {
  const auto found = find(keyword);
  if (!found) throw DataError("unknown keyword: " + keyword);
  return *found;
}

AnnotatedDataset::AnnotatedDataset(Vocabulary vocabulary, std::vector<ImageRecord> images)
    : vocabulary_(std::move(vocabulary)), images_(std::move(images)) {
  const auto n = static_cast<Eigen::Index>(images_.size());
  const auto m = static_cast<Eigen::Index>(vocabulary_.size());
  phi_ = AnnotationMatrix::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& record = images_[static_cast<std::size_t>(i)];
    if (!id_index_.emplace(record.id, static_cast<std::size_t>(i)).second) {
      throw DataError("duplicate image id: " + record.id);
    }
    std::sort(record.tag_indices.begin(), record.tag_indices.end());
    record.tag_indices.erase(std::unique(record.tag_indices.begin(), record.tag_indices.end()),
                             record.tag_indices.end());
    for (const std::size_t j : record.tag_indices) {
      if (j >= vocabulary_.size()) throw DataError("tag index out of range for image " + record.id);
      phi_(i, static_cast<Eigen::Index>(j)) = 1;
    }
  }
}

std::optional<std::size_t> AnnotatedDataset::find_image(const std::string& id) const {
  const auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

AnnotatedDataset AnnotatedDataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<ImageRecord> records;
  records.reserve(indices.size());
  for (const std::size_t i : indices) records.push_back(images_.at(i));
  return AnnotatedDataset(vocabulary_, std::move(records));
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

struct RawLine {
  std::size_t line_number;
  std::string id;
  std::vector<std::string> tags;
};

std::vector<RawLine> read_tagged_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  std::vector<RawLine> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": expected <image>\\t<tags>");
    }
    RawLine raw{number, trim(line.substr(0, tab)), {}};
    if (raw.id.empty()) throw DataError(path.string() + ":" + std::to_string(number) + ": empty image path");
    std::stringstream tags(line.substr(tab + 1));
    std::string tag;
    while (std::getline(tags, tag, ',')) {
      tag = trim(tag);
      if (!tag.empty()) raw.tags.push_back(tag);
    }
    lines.push_back(std::move(raw));
  }
  return lines;
}

}  // namespace

AnnotatedDataset load_manifest(const std::filesystem::path& path, const ManifestOptions& options) {
  if (!std::filesystem::exists(path)) throw DataError("manifest not found: " + path.string());
  const auto lines = read_tagged_lines(path);
  if (lines.empty()) throw DataError("empty manifest");

  std::set<std::string> all_tags;
  for (const auto& raw : lines) {
    if (raw.tags.empty()) {
      throw DataError(path.string() + ":" + std::to_string(raw.line_number) + ": empty tag list for " + raw.id);
    }
    all_tags.insert(raw.tags.begin(), raw.tags.end());
  }
  Vocabulary vocabulary(std::vector<std::string>(all_tags.begin(), all_tags.end()));

  const auto base = path.parent_path();
  std::vector<ImageRecord> records;
  records.reserve(lines.size());
  for (const auto& raw : lines) {
    ImageRecord record;
    record.id = raw.id;
    if (raw.id.front() == '@') {
      record.feature_only = true;
    } else {
      record.path = base / raw.id;
      if (options.verify_images && !probe_image(record.path)) {
        throw DataError("unreadable image: " + record.path.string());
      }
    }
    for (const auto& tag : raw.tags) record.tag_indices.push_back(vocabulary.index_of(tag));
    records.push_back(std::move(record));
  }
  return AnnotatedDataset(std::move(vocabulary), std::move(records));
}

void write_manifest(const AnnotatedDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  for (const auto& record : dataset.images()) {
    out << record.id << '\t';
    for (std::size_t k = 0; k < record.tag_indices.size(); ++k) {
      if (k) out << ',';
      out << dataset.vocabulary().keyword(record.tag_indices[k]);
    }
    out << '\n';
  }
}

TagListing read_tag_listing(const std::filesystem::path& path, const Vocabulary& vocabulary) {
  TagListing listing;
  std::set<std::string> unknown;
  for (auto& raw : read_tagged_lines(path)) {
    std::vector<std::size_t> indices;
    for (const auto& tag : raw.tags) {
      if (const auto j = vocabulary.find(tag)) {
        indices.push_back(*j);
      } else {
        unknown.insert(tag);
      }
    }
    listing.rows.emplace_back(std::move(raw.id), std::move(indices));
  }
  listing.unknown_tags.assign(unknown.begin(), unknown.end());
  return listing;
}

Split split(const AnnotatedDataset& dataset, std::size_t train_n, std::size_t val_n, std::size_t test_n,
            std::uint64_t seed) {
  const std::size_t n = dataset.size();
  if (train_n + val_n + test_n != n) {
    throw DataError("split counts " + std::to_string(train_n) + "+" + std::to_string(val_n) + "+" +
                    std::to_string(test_n) + " do not sum to " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  Split result;
  result.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_n));
  result.val.assign(order.begin() + static_cast<std::ptrdiff_t>(train_n),
                    order.begin() + static_cast<std::ptrdiff_t>(train_n + val_n));
  result.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_n + val_n), order.end());
  for (auto* part : {&result.train, &result.val, &result.test}) std::sort(part->begin(), part->end());
  return result;
}

void write_split(const AnnotatedDataset& dataset, const Split& split, const std::filesystem::path& path) {
  std::vector<std::string> names(dataset.size());
  for (const auto i : split.train) names.at(i) = "train";
  for (const auto i : split.val) names.at(i) = "val";
  for (const auto i : split.test) names.at(i) = "test";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write split file: " + path.string());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (names[i].empty()) throw DataError("split does not cover image " + dataset.images()[i].id);
    out << dataset.images()[i].id << '\t' << names[i] << '\n';
  }
}

Split read_split(const AnnotatedDataset& dataset, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split file: " + path.string());
  Split result;
  std::vector<bool> seen(dataset.size(), false);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("malformed split line: " + line);
    const auto index = dataset.find_image(line.substr(0, tab));
    if (!index) throw DataError("split names unknown image: " + line.substr(0, tab));
    if (seen[*index]) throw DataError("split lists image twice: " + line.substr(0, tab));
    seen[*index] = true;
    const std::string name = trim(line.substr(tab + 1));
    if (name == "train") {
      result.train.push_back(*index);
    } else if (name == "val") {
      result.val.push_back(*index);
    } else if (name == "test") {
      result.test.push_back(*index);
    } else {
      throw DataError("unknown split name: " + name);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw DataError("split file does not cover dataset");
  for (auto* part : {&result.train, &result.val, &result.test}) std::sort(part->begin(), part->end());
  return result;
}

std::vector<std::size_t> tag_frequency(const AnnotatedDataset& dataset) {
  std::vector<std::size_t> counts(dataset.vocabulary().size(), 0);
  for (const auto& record : dataset.images()) {
    for (const auto j : record.tag_indices) ++counts[j];
  }
  return counts;
}

}  // namespace aia
