#include "aia/feature_file.hpp"

#include "aia/error.hpp"
#include "bytes.hpp"

#include <fstream>
#include <iterator>
#include <set>

namespace aia {

namespace {
constexpr char kMagic[8] = {'A', 'I', 'A', 'F', 'E', 'A', 'T', '\0'};
}

std::map<std::string, std::size_t> FeatureFile::index() const {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], i);
  return out;
}

std::vector<std::uint8_t> serialize(const FeatureFile& file) {
  if (file.ids.size() != file.vectors.size()) throw DataError("feature file: ids and vectors differ in count");
  detail::ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(FeatureFile::kVersion);
  w.str(file.source);
  w.str(file.metadata);
  w.u32(file.dim);
  w.u64(file.ids.size());
  for (std::size_t i = 0; i < file.ids.size(); ++i) {
    if (file.vectors[i].size() != static_cast<Eigen::Index>(file.dim)) {
      throw DataError("feature file: vector for " + file.ids[i] + " has length " +
                      std::to_string(file.vectors[i].size()) + ", header says " + std::to_string(file.dim));
    }
    w.str(file.ids[i]);
    for (const double v : file.vectors[i]) w.f64(v);
  }
  return std::move(w.bytes());
}

FeatureFile parse_feature_file(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes.data(), bytes.size(), "feature file");
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw DataError("feature file: bad magic");
  const std::uint32_t version = r.u32();
  if (version != FeatureFile::kVersion) {
    throw DataError("feature file: unsupported version " + std::to_string(version));
  }
  FeatureFile file;
  file.source = r.str();
  file.metadata = r.str();
  file.dim = r.u32();
  const std::uint64_t count = r.u64();
  if (file.dim == 0 && count > 0) throw DataError("feature file: zero vector length");

  std::set<std::string> seen;
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string id = r.str();
    if (!seen.insert(id).second) throw DataError("feature file: duplicate id " + id);
    r.need(static_cast<std::size_t>(file.dim) * 8);
    Eigen::VectorXd v(file.dim);
    for (std::uint32_t j = 0; j < file.dim; ++j) v[j] = r.f64();
    file.ids.push_back(std::move(id));
    file.vectors.push_back(std::move(v));
  }
  if (r.remaining() != 0) {
    throw DataError("feature file: " + std::to_string(r.remaining()) + " trailing bytes (length inconsistency)");
  }
  return file;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

void write_feature_file(const FeatureFile& file, const std::filesystem::path& path) {
  write_bytes(serialize(file), path);
}

FeatureFile read_feature_file(const std::filesystem::path& path) { return parse_feature_file(read_bytes(path)); }

}  // namespace aia
