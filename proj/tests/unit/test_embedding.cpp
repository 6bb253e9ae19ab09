#include "aia/embedding.hpp"
#include "aia/error.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace aia;

namespace {

EmbeddingStore store_of(const std::vector<std::vector<double>>& rows, const std::vector<bool>& covered = {}) {
  std::vector<std::optional<Eigen::VectorXd>> v;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!covered.empty() && !covered[k]) {
      v.emplace_back();
      continue;
    }
    v.emplace_back(Eigen::Map<const Eigen::VectorXd>(rows[k].data(), static_cast<Eigen::Index>(rows[k].size())));
  }
  return EmbeddingStore(static_cast<int>(rows.front().size()), std::move(v));
}

double loop_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::size_t> keywords_of(const CandidateSet& set) {
  std::vector<std::size_t> out;
  for (const auto& c : set.entries) out.push_back(c.keyword);
  return out;
}

}  // namespace

TEST_CASE("loading keeps only vocabulary words") {
  testing::TempDir dir("emb");
  testing::write_text(dir / "v.txt", "cat 1 0 0\ndog 0 1 0\nfish 0 0 1\n");
  const Vocabulary vocab({"dog", "cat"});
  const EmbeddingStore store = load_vectors(dir / "v.txt", vocab);
  CHECK(store.vocabulary_size() == 2);
  CHECK(store.dim() == 3);
  CHECK(store.coverage() == 1.0);
  CHECK(store.vector(0)[1] == 1.0);
  CHECK(store.vector(1)[0] == 1.0);
}

TEST_CASE("missing words are reported and the store still loads") {
  testing::TempDir dir("emb");
  testing::write_text(dir / "v.txt", "2 2\ncat 1 0\ndog 0 1\n");
  const Vocabulary vocab({"cat", "zebra", "dog"});
  const EmbeddingStore store = load_vectors(dir / "v.txt", vocab);
  CHECK(store.coverage() == doctest::Approx(2.0 / 3.0));
  CHECK(store.uncovered() == std::vector<std::size_t>{1});
  CHECK_FALSE(store.covered(1));
  CHECK_THROWS_AS(store.vector(1), DataError);
  write_uncovered_report(store, vocab, dir / "report.txt");
  CHECK(testing::read_text(dir / "report.txt").find("zebra") != std::string::npos);
  CHECK(store.matrix().row(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("multi-token keywords use the mean of their tokens") {
  testing::TempDir dir("emb");
  testing::write_text(dir / "v.txt", "red 1 0\ndisc 0 1\n");
  const EmbeddingStore store = load_vectors(dir / "v.txt", Vocabulary({"red_disc", "red"}));
  CHECK(store.vector(0)[0] == 0.5);
  CHECK(store.vector(0)[1] == 0.5);
}

TEST_CASE("malformed vector files are rejected") {
  testing::TempDir dir("emb");
  testing::write_text(dir / "ragged.txt", "cat 1 0\ndog 0 1 2\n");
  CHECK_THROWS_AS(load_vectors(dir / "ragged.txt", Vocabulary({"cat", "dog"})), DataError);
  testing::write_text(dir / "text.txt", "cat 1 x\n");
  CHECK_THROWS_AS(load_vectors(dir / "text.txt", Vocabulary({"cat"})), DataError);
  testing::write_text(dir / "none.txt", "fish 1 2\n");
  CHECK_THROWS_AS(load_vectors(dir / "none.txt", Vocabulary({"cat"})), DataError);
}

TEST_CASE("vectors survive a write and reload") {
  testing::TempDir dir("emb");
  Rng rng(3);
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < 6; ++k) {
    rows.emplace_back();
    for (int d = 0; d < 9; ++d) rows.back().push_back(rng.uniform(-3, 3));
  }
  const Vocabulary vocab({"a", "b", "c", "d", "e", "f"});
  const EmbeddingStore store = store_of(rows, {true, true, false, true, true, true});
  write_vectors(store, vocab, dir / "out.txt");
  const EmbeddingStore back = load_vectors(dir / "out.txt", vocab);
  CHECK_FALSE(back.covered(2));
  for (std::size_t k : {0u, 1u, 3u, 4u, 5u}) {
    CHECK((back.vector(k) - store.vector(k)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("cosine similarity") {
  const EmbeddingStore store = store_of({{1, 0, 0}, {0, 2, 0}, {3, 4, 0}, {0, 0, 0}});
  CHECK(cosine(store, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(store, 0, 1) == 0.0);
  CHECK(cosine(store, 0, 2) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(cosine(store, 2, 0) == cosine(store, 0, 2));
  CHECK_THROWS_AS(cosine(store, 0, 3), DataError);

  Rng rng(10);
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < 12; ++k) {
    rows.emplace_back();
    for (int d = 0; d < 7; ++d) rows.back().push_back(rng.uniform(-1, 1));
  }
  const EmbeddingStore random = store_of(rows);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < rows.size(); ++b) {
      CHECK(std::abs(cosine(random, a, b) - loop_cosine(rows[a], rows[b])) < 1e-12);
    }
  }
}

TEST_CASE("candidates from a hand-built store match brute-force ranking") {
  const std::vector<std::vector<double>> rows{{1, 0, 0}, {0.9, 0.1, 0}, {0, 1, 0}, {0.5, 0.5, 0.7}, {-1, 0.2, 0}};
  const EmbeddingStore store = store_of(rows);
  const Eigen::VectorXd balance = (Eigen::VectorXd(5) << 0.0, 0.1, 0.9, 0.3, 0.2).finished();
  Rng rng(5);
  for (const std::vector<std::size_t>& seeds :
       std::vector<std::vector<std::size_t>>{{0}, {2}, {0, 3}, {1, 2, 4}, {4}}) {
    for (std::size_t size = 1; size <= 5; ++size) {
      // Enumerate every candidate score, then sort by (score desc, index asc).
      std::vector<std::pair<double, std::size_t>> brute;
      for (std::size_t k = 0; k < 5; ++k) {
        if (std::find(seeds.begin(), seeds.end(), k) != seeds.end()) continue;
        double s = 0;
        for (std::size_t seed : seeds) s += loop_cosine(rows[seed], rows[k]);
        s = s / static_cast<double>(seeds.size()) * (1.0 + balance[static_cast<Eigen::Index>(k)]);
        brute.emplace_back(s, k);
      }
      std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      const CandidateSet set = generate_candidates(seeds, store, balance, size);
      REQUIRE(set.entries.size() == std::min(size, 5 - seeds.size()));
      for (std::size_t r = 0; r < set.entries.size(); ++r) {
        CHECK(set.entries[r].keyword == brute[r].second);
        CHECK(std::abs(set.entries[r].score - brute[r].first) < 1e-12);
      }
    }
  }
}

TEST_CASE("one seed with room for everything returns all other keywords") {
  const EmbeddingStore store = store_of({{1, 0}, {0, 1}, {1, 1}, {-1, 0}});
  const CandidateSet set = generate_candidates({0}, store, Eigen::VectorXd::Zero(4), 3);
  CHECK(keywords_of(set) == std::vector<std::size_t>{2, 1, 3});
  CHECK_FALSE(set.contains(0));
  CHECK(set.contains(3));
}

TEST_CASE("an exact duplicate of the seed ranks first") {
  Rng rng(2);
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < 8; ++k) {
    rows.emplace_back();
    for (int d = 0; d < 5; ++d) rows.back().push_back(rng.uniform(-1, 1));
  }
  rows[6] = rows[3];
  const CandidateSet set = generate_candidates({3}, store_of(rows), Eigen::VectorXd::Zero(8), 4);
  CHECK(set.entries.front().keyword == 6);
  CHECK(set.entries.front().score == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("candidate properties on random stores") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng.below(12);
    std::vector<std::vector<double>> rows(m);
    for (auto& r : rows) {
      for (int d = 0; d < 4; ++d) r.push_back(rng.uniform(-1, 1));
    }
    std::vector<bool> covered(m, true);
    for (std::size_t k = 0; k < m; ++k) covered[k] = rng.uniform() < 0.8;
    std::vector<std::size_t> seeds{rng.below(m)};
    covered[seeds[0]] = true;
    if (m > 3 && rng.below(2)) {
      const std::size_t extra = rng.below(m);
      if (extra != seeds[0]) seeds.push_back(extra);
    }
    const Eigen::VectorXd balance = testing::random_vector(rng, static_cast<int>(m), 0, 1);
    std::vector<std::size_t> frequency(m);
    for (auto& f : frequency) f = rng.below(20);
    const std::size_t size = 1 + rng.below(m + 2);

    const EmbeddingStore store = store_of(rows, covered);
    const CandidateSet set = generate_candidates(seeds, store, balance, size, frequency);
    CHECK(set.entries.size() == std::min(size, m - seeds.size()));
    for (std::size_t r = 0; r < set.entries.size(); ++r) {
      CHECK(std::find(seeds.begin(), seeds.end(), set.entries[r].keyword) == seeds.end());
      if (r > 0) CHECK(set.entries[r].score <= set.entries[r - 1].score);
      for (std::size_t q = 0; q < r; ++q) CHECK(set.entries[q].keyword != set.entries[r].keyword);
      if (!covered[set.entries[r].keyword]) CHECK(std::isinf(set.entries[r].score));
    }

    // uniform positive scaling of all vectors leaves the ranking unchanged
    std::vector<std::vector<double>> scaled = rows;
    for (auto& r : scaled) {
      for (double& v : r) v *= 3.7;
    }
    const CandidateSet again = generate_candidates(seeds, store_of(scaled, covered), balance, size, frequency);
    CHECK(keywords_of(again) == keywords_of(set));
    CHECK(keywords_of(generate_candidates(seeds, store, balance, size, frequency)) == keywords_of(set));
  }
}

TEST_CASE("uncovered keywords only fill leftover slots by frequency") {
  const EmbeddingStore store = store_of({{1, 0}, {0, 1}, {0, 0}, {0, 0}, {0, 0}}, {true, true, false, false, false});
  const std::vector<std::size_t> frequency{9, 8, 1, 5, 5};
  const CandidateSet set = generate_candidates({0}, store, Eigen::VectorXd::Zero(5), 4, frequency);
  CHECK(keywords_of(set) == std::vector<std::size_t>{1, 3, 4, 2});
  CHECK(std::isinf(set.entries[1].score));

  const CandidateSet small = generate_candidates({0}, store, Eigen::VectorXd::Zero(5), 1, frequency);
  CHECK(keywords_of(small) == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(generate_candidates({2}, store, Eigen::VectorXd::Zero(5), 2, frequency), DataError);
}
