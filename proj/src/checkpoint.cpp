#include "aia/checkpoint.hpp"

#include "aia/error.hpp"
#include "aia/feature_file.hpp"
#include "bytes.hpp"

#include <zlib.h>

#include <map>

namespace aia {

namespace {

constexpr char kMagic[8] = {'A', 'I', 'A', 'C', 'K', 'P', 'T', '\0'};

// Row-major tensor as stored on disk.
struct Tensor {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> values;
};

using TensorMap = std::map<std::string, Tensor>;

Tensor from_view(const ParamView& p) {
  Tensor t{static_cast<std::uint32_t>(p.rows), static_cast<std::uint32_t>(p.cols), {}};
  t.values.reserve(static_cast<std::size_t>(p.size));
  for (Eigen::Index r = 0; r < p.rows; ++r) {
    for (Eigen::Index c = 0; c < p.cols; ++c) t.values.push_back(p.data[c * p.rows + r]);
  }
  return t;
}

Tensor from_matrix(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd copy = m;
  return from_view({"", "", copy.data(), copy.size(), copy.rows(), copy.cols()});
}

Eigen::MatrixXd to_matrix(const Tensor& t) {
  Eigen::MatrixXd m(t.rows, t.cols);
  for (std::uint32_t r = 0; r < t.rows; ++r) {
    for (std::uint32_t c = 0; c < t.cols; ++c) m(r, c) = t.values[static_cast<std::size_t>(r) * t.cols + c];
  }
  return m;
}

const Tensor& require(const TensorMap& tensors, const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw DataError("checkpoint: missing tensor " + name);
  return it->second;
}

Eigen::VectorXd require_vector(const TensorMap& tensors, const std::string& name) {
  const Tensor& t = require(tensors, name);
  if (t.cols != 1) throw DataError("checkpoint: tensor " + name + " is not a column");
  return to_matrix(t).col(0);
}

Eigen::MatrixXd vector_tensor(const Eigen::VectorXd& v) { return v; }

Eigen::VectorXd config_vector(const ModelConfig& c) {
  std::vector<double> v{static_cast<double>(c.ll_dim),
                        static_cast<double>(c.ll_item_dim),
                        static_cast<double>(c.hl_item_dim),
                        static_cast<double>(c.hidden_dim),
                        static_cast<double>(c.context_dim),
                        static_cast<double>(c.attention_dim),
                        static_cast<double>(c.embed_input_dim),
                        c.tau_mode == TauMode::normalized ? 0.0 : 1.0,
                        c.w_min,
                        static_cast<double>(c.tag_count)};
  for (int h : c.leae_hidden) v.push_back(h);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ModelConfig config_from(const Eigen::VectorXd& v) {
  if (v.size() < 10) throw DataError("checkpoint: model configuration too short");
  ModelConfig c;
  c.ll_dim = static_cast<int>(v[0]);
  c.ll_item_dim = static_cast<int>(v[1]);
  c.hl_item_dim = static_cast<int>(v[2]);
  c.hidden_dim = static_cast<int>(v[3]);
  c.context_dim = static_cast<int>(v[4]);
  c.attention_dim = static_cast<int>(v[5]);
  c.embed_input_dim = static_cast<int>(v[6]);
  c.tau_mode = v[7] == 0.0 ? TauMode::normalized : TauMode::literal;
  c.w_min = v[8];
  c.tag_count = static_cast<int>(v[9]);
  c.leae_hidden.clear();
  for (Eigen::Index i = 10; i < v.size(); ++i) c.leae_hidden.push_back(static_cast<int>(v[i]));
  return c;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& ck) {
  TensorMap tensors;
  tensors["model.config"] = from_matrix(config_vector(ck.model.config));
  AnnotatorModel model = ck.model;
  for (const auto& p : model.parameters()) tensors[p.name] = from_view(p);
  tensors["model.word_vectors"] = from_matrix(ck.model.word_vectors);
  tensors["normalizer.ll.mean"] = from_matrix(vector_tensor(ck.ll_normalizer.mean));
  tensors["normalizer.ll.scale"] = from_matrix(vector_tensor(ck.ll_normalizer.scale));
  tensors["normalizer.hl.mean"] = from_matrix(vector_tensor(ck.hl_normalizer.mean));
  tensors["normalizer.hl.scale"] = from_matrix(vector_tensor(ck.hl_normalizer.scale));

  const auto& store = ck.generator.store;
  Eigen::VectorXd covered(static_cast<Eigen::Index>(store.vocabulary_size()));
  for (std::size_t k = 0; k < store.vocabulary_size(); ++k) covered[static_cast<Eigen::Index>(k)] = store.covered(k);
  tensors["generator.covered"] = from_matrix(vector_tensor(covered));
  tensors["generator.vectors"] = from_matrix(store.matrix());
  tensors["generator.balance"] = from_matrix(vector_tensor(ck.generator.balance));
  Eigen::VectorXd freq(static_cast<Eigen::Index>(ck.generator.frequency.size()));
  for (std::size_t k = 0; k < ck.generator.frequency.size(); ++k) {
    freq[static_cast<Eigen::Index>(k)] = static_cast<double>(ck.generator.frequency[k]);
  }
  tensors["generator.frequency"] = from_matrix(vector_tensor(freq));
  tensors["generator.size"] = from_matrix(Eigen::MatrixXd::Constant(1, 1, static_cast<double>(ck.generator.candidate_size)));
  tensors["generator.dim"] = from_matrix(Eigen::MatrixXd::Constant(1, 1, static_cast<double>(store.dim())));

  detail::ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(Checkpoint::kVersion);
  w.str(ck.config_text);
  w.u64(ck.epoch);
  w.u64(ck.seed);
  w.f64(ck.loss);
  w.u32(static_cast<std::uint32_t>(ck.vocabulary.size()));
  for (const auto& k : ck.vocabulary.keywords()) w.str(k);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.str(name);
    w.u32(t.rows);
    w.u32(t.cols);
    for (double v : t.values) w.f64(v);
  }
  auto& bytes = w.bytes();
  const auto crc = static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
  w.u32(crc);
  return std::move(bytes);
}

Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kMagic + 8) throw DataError("checkpoint: file too short (checksum missing)");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw DataError("checkpoint: bad magic");
  const std::size_t body = bytes.size() - 4;
  detail::ByteReader tail(bytes.data() + body, 4, "checkpoint");
  const std::uint32_t stored = tail.u32();
  const auto actual = static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(body)));
  if (stored != actual) throw DataError("checkpoint: checksum mismatch (file corrupt or truncated)");

  detail::ByteReader r(bytes.data(), body, "checkpoint");
  char magic[8];
  r.raw(magic, sizeof magic);
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kVersion) {
    throw DataError("checkpoint: version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(Checkpoint::kVersion) + ")");
  }
  Checkpoint ck;
  ck.config_text = r.str();
  ck.epoch = r.u64();
  ck.seed = r.u64();
  ck.loss = r.f64();
  std::vector<std::string> keywords(r.u32());
  for (auto& k : keywords) k = r.str();
  ck.vocabulary = Vocabulary(std::move(keywords));

  TensorMap tensors;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    Tensor t;
    t.rows = r.u32();
    t.cols = r.u32();
    const std::size_t n = static_cast<std::size_t>(t.rows) * t.cols;
    r.need(n * 8);
    t.values.resize(n);
    for (auto& v : t.values) v = r.f64();
    tensors.emplace(std::move(name), std::move(t));
  }
  if (r.remaining() != 0) throw DataError("checkpoint: unexpected bytes before checksum");

  const ModelConfig config = config_from(require_vector(tensors, "model.config"));
  const Eigen::MatrixXd word_vectors = to_matrix(require(tensors, "model.word_vectors"));
  if (static_cast<std::size_t>(word_vectors.rows()) != ck.vocabulary.size()) {
    throw DataError("checkpoint: word vector rows do not match the vocabulary");
  }
  Rng unused(0);
  ck.model = AnnotatorModel::random(config, word_vectors, unused);
  for (auto& p : ck.model.parameters()) {
    const Tensor& t = require(tensors, p.name);
    if (t.rows != p.rows || t.cols != p.cols) throw DataError("checkpoint: tensor " + p.name + " has the wrong shape");
    for (Eigen::Index row = 0; row < p.rows; ++row) {
      for (Eigen::Index c = 0; c < p.cols; ++c) {
        p.data[c * p.rows + row] = t.values[static_cast<std::size_t>(row * p.cols + c)];
      }
    }
  }
  ck.ll_normalizer = {require_vector(tensors, "normalizer.ll.mean"), require_vector(tensors, "normalizer.ll.scale")};
  ck.hl_normalizer = {require_vector(tensors, "normalizer.hl.mean"), require_vector(tensors, "normalizer.hl.scale")};

  const Eigen::VectorXd covered = require_vector(tensors, "generator.covered");
  const Eigen::MatrixXd vectors = to_matrix(require(tensors, "generator.vectors"));
  const int dim = static_cast<int>(require_vector(tensors, "generator.dim")[0]);
  std::vector<std::optional<Eigen::VectorXd>> rows(static_cast<std::size_t>(covered.size()));
  for (Eigen::Index k = 0; k < covered.size(); ++k) {
    if (covered[k] != 0.0) rows[static_cast<std::size_t>(k)] = vectors.row(k).transpose();
  }
  ck.generator.store = EmbeddingStore(dim, std::move(rows));
  ck.generator.balance = require_vector(tensors, "generator.balance");
  const Eigen::VectorXd freq = require_vector(tensors, "generator.frequency");
  for (double f : freq) ck.generator.frequency.push_back(static_cast<std::size_t>(f));
  ck.generator.candidate_size = static_cast<std::size_t>(require_vector(tensors, "generator.size")[0]);
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_bytes(serialize(checkpoint), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_bytes(path)); }

}  // namespace aia
