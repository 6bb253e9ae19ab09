#pragma once

#include "aia/dataset.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aia {

/// Word vectors restricted to a vocabulary. Keywords made of several tokens
/// (separated by spaces or underscores) fall back to the mean of their token
/// vectors when the keyword itself has no entry.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(int dim, std::vector<std::optional<Eigen::VectorXd>> vectors);

  int dim() const { return dim_; }
  std::size_t vocabulary_size() const { return vectors_.size(); }
  bool covered(std::size_t keyword) const { return vectors_.at(keyword).has_value(); }
  const Eigen::VectorXd& vector(std::size_t keyword) const;  // throws DataError when uncovered
  double coverage() const;
  std::vector<std::size_t> uncovered() const;

  /// M x dim matrix, zero rows for uncovered keywords.
  Eigen::MatrixXd matrix() const;

 private:
  int dim_ = 0;
  std::vector<std::optional<Eigen::VectorXd>> vectors_;
};

/// Text format: one `word v1 ... vn` per line. An optional word2vec header
/// line `<count> <dim>` is skipped. Throws DataError on inconsistent lengths or
/// when no keyword is covered.
EmbeddingStore load_vectors(const std::filesystem::path& path, const Vocabulary& vocabulary);
void write_vectors(const EmbeddingStore& store, const Vocabulary& vocabulary, const std::filesystem::path& path);
void write_uncovered_report(const EmbeddingStore& store, const Vocabulary& vocabulary,
                            const std::filesystem::path& path);

/// Throws DataError when either keyword is uncovered or has a zero vector.
double cosine(const EmbeddingStore& store, std::size_t a, std::size_t b);

struct Candidate {
  std::size_t keyword;
  double score;
};

struct CandidateSet {
  std::vector<Candidate> entries;  // scores non-increasing
  std::vector<std::size_t> seeds;

  bool contains(std::size_t keyword) const;
};

/// score(k) = mean over covered seeds of cosine(seed, k) * (1 + balance[k]).
/// Returns the top `size` non-seed keywords, ties to the lower index. Uncovered
/// keywords only fill remaining slots, most frequent first (then lower index),
/// with score -inf. Throws DataError when no seed is covered.
CandidateSet generate_candidates(const std::vector<std::size_t>& seeds, const EmbeddingStore& store,
                                 const Eigen::VectorXd& balance, std::size_t size,
                                 const std::vector<std::size_t>& frequency = {});

}  // namespace aia
