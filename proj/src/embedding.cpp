#include "aia/embedding.hpp"

#include "aia/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace aia {

EmbeddingStore::EmbeddingStore(int dim, std::vector<std::optional<Eigen::VectorXd>> vectors)
    : dim_(dim), vectors_(std::move(vectors)) {
  for (const auto& v : vectors_) {
    if (v && v->size() != dim_) throw DimensionError("embedding vector length differs from store dimension");
  }
}

const Eigen::VectorXd& EmbeddingStore::vector(std::size_t keyword) const {
  const auto& v = vectors_.at(keyword);
  if (!v) throw DataError("keyword " + std::to_string(keyword) + " has no embedding");
  return *v;
}

double EmbeddingStore::coverage() const {
  if (vectors_.empty()) return 0.0;
  const auto n = std::count_if(vectors_.begin(), vectors_.end(), [](const auto& v) { return v.has_value(); });
  return static_cast<double>(n) / static_cast<double>(vectors_.size());
}

std::vector<std::size_t> EmbeddingStore::uncovered() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < vectors_.size(); ++k) {
    if (!vectors_[k]) out.push_back(k);
  }
  return out;
}

Eigen::MatrixXd EmbeddingStore::matrix() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vectors_.size()), dim_);
  for (std::size_t k = 0; k < vectors_.size(); ++k) {
    if (vectors_[k]) m.row(static_cast<Eigen::Index>(k)) = vectors_[k]->transpose();
  }
  return m;
}

namespace {

std::vector<std::string> split_tokens(const std::string& keyword) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : keyword) {
    if (c == ' ' || c == '_') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool is_header(const std::vector<std::string>& fields) {
  if (fields.size() != 2) return false;
  return std::all_of(fields.begin(), fields.end(), [](const std::string& f) {
    return !f.empty() && std::all_of(f.begin(), f.end(), [](char c) { return c >= '0' && c <= '9'; });
  });
}

}  // namespace

EmbeddingStore load_vectors(const std::filesystem::path& path, const Vocabulary& vocabulary) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());

  // Only words that are keywords or keyword tokens are kept.
  std::unordered_set<std::string> wanted;
  for (const auto& k : vocabulary.keywords()) {
    wanted.insert(k);
    for (auto& t : split_tokens(k)) wanted.insert(t);
  }

  std::unordered_map<std::string, Eigen::VectorXd> table;
  int dim = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> fields;
    for (std::string f; ls >> f;) fields.push_back(f);
    if (fields.empty()) continue;
    if (line_no == 1 && is_header(fields)) continue;
    if (fields.size() < 2) throw DataError(path.string() + ":" + std::to_string(line_no) + ": vector has no components");
    const int n = static_cast<int>(fields.size()) - 1;
    if (dim < 0) dim = n;
    if (n != dim) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " components, found " + std::to_string(n));
    }
    if (!wanted.count(fields[0])) continue;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
      const std::string& f = fields[static_cast<std::size_t>(i) + 1];
      std::size_t used = 0;
      try {
        v[i] = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != f.size() || !std::isfinite(v[i])) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + f + "'");
      }
    }
    table.emplace(fields[0], std::move(v));
  }
  if (dim < 0) throw DataError("embedding file " + path.string() + " holds no vectors");

  std::vector<std::optional<Eigen::VectorXd>> vectors(vocabulary.size());
  for (std::size_t k = 0; k < vocabulary.size(); ++k) {
    const std::string& word = vocabulary.keyword(k);
    if (auto it = table.find(word); it != table.end()) {
      vectors[k] = it->second;
      continue;
    }
    const auto tokens = split_tokens(word);
    if (tokens.size() < 2) continue;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    bool complete = true;
    for (const auto& t : tokens) {
      auto it = table.find(t);
      if (it == table.end()) {
        complete = false;
        break;
      }
      sum += it->second;
    }
    if (complete) vectors[k] = sum / static_cast<double>(tokens.size());
  }
  if (std::none_of(vectors.begin(), vectors.end(), [](const auto& v) { return v.has_value(); })) {
    throw DataError("embedding file " + path.string() + " covers no vocabulary keyword");
  }
  return EmbeddingStore(dim, std::move(vectors));
}

void write_vectors(const EmbeddingStore& store, const Vocabulary& vocabulary, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  char buf[64];
  for (std::size_t k = 0; k < vocabulary.size(); ++k) {
    if (!store.covered(k)) continue;
    out << vocabulary.keyword(k);
    for (double x : store.vector(k)) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      out << buf;
    }
    out << '\n';
  }
}

void write_uncovered_report(const EmbeddingStore& store, const Vocabulary& vocabulary,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t k : store.uncovered()) out << vocabulary.keyword(k) << '\n';
}

double cosine(const EmbeddingStore& store, std::size_t a, std::size_t b) {
  const auto& u = store.vector(a);
  const auto& v = store.vector(b);
  const double denom = u.norm() * v.norm();
  if (denom == 0.0) throw DataError("cosine: zero-norm embedding vector");
  return u.dot(v) / denom;
}

bool CandidateSet::contains(std::size_t keyword) const {
  return std::any_of(entries.begin(), entries.end(), [&](const Candidate& c) { return c.keyword == keyword; });
}

CandidateSet generate_candidates(const std::vector<std::size_t>& seeds, const EmbeddingStore& store,
                                 const Eigen::VectorXd& balance, std::size_t size,
                                 const std::vector<std::size_t>& frequency) {
  const std::size_t m = store.vocabulary_size();
  if (static_cast<std::size_t>(balance.size()) != m) throw DimensionError("candidate balance vector length mismatch");
  if (!frequency.empty() && frequency.size() != m) throw DimensionError("candidate frequency vector length mismatch");

  std::vector<std::size_t> covered_seeds;
  std::vector<bool> is_seed(m, false);
  for (std::size_t s : seeds) {
    if (s >= m) throw DimensionError("seed keyword out of range");
    is_seed[s] = true;
    if (store.covered(s)) covered_seeds.push_back(s);
  }
  if (covered_seeds.empty()) throw DataError("candidate generation: no seed keyword has an embedding");

  std::vector<Candidate> scored;
  std::vector<std::size_t> uncovered;
  for (std::size_t k = 0; k < m; ++k) {
    if (is_seed[k]) continue;
    if (!store.covered(k)) {
      uncovered.push_back(k);
      continue;
    }
    double sim = 0;
    for (std::size_t s : covered_seeds) sim += cosine(store, s, k);
    sim /= static_cast<double>(covered_seeds.size());
    scored.push_back({k, sim * (1.0 + balance[static_cast<Eigen::Index>(k)])});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (!frequency.empty()) {
    std::stable_sort(uncovered.begin(), uncovered.end(),
                     [&](std::size_t a, std::size_t b) { return frequency[a] > frequency[b]; });
  }

  CandidateSet out;
  out.seeds = seeds;
  for (const auto& c : scored) {
    if (out.entries.size() >= size) break;
    out.entries.push_back(c);
  }
  for (std::size_t k : uncovered) {
    if (out.entries.size() >= size) break;
    out.entries.push_back({k, -std::numeric_limits<double>::infinity()});
  }
  return out;
}

}  // namespace aia
