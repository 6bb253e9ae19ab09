#include "aia/checkpoint.hpp"
#include "aia/error.hpp"
#include "gradient_fixture.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>

using namespace aia;

namespace {

// Reflected CRC-32 (polynomial 0xEDB88320), bit by bit.
std::uint32_t bitwise_crc32(const std::uint8_t* data, std::size_t n) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    crc ^= data[i];
    for (int b = 0; b < 8; ++b) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

void put_u32(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) bytes[at + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(v >> (8 * k));
}

Checkpoint trained_checkpoint(std::uint64_t seed) {
  testing::GradientFixture f = testing::gradient_fixture(seed);
  DecoderTrainOptions options;
  options.epochs = 20;
  options.seed = seed;
  options.batch_size = 1;
  const TrainCurve curve = train_decoder(f.model, f.examples, options);

  Checkpoint c;
  c.config_text = "seed=" + std::to_string(seed) + "\n";
  c.epoch = 20;
  c.seed = seed;
  c.loss = curve.losses.back();
  c.vocabulary = Vocabulary({"k0", "k1", "k2", "k3"});
  c.ll_normalizer.mean = Eigen::VectorXd::LinSpaced(f.model.config.ll_dim, -1, 1);
  c.ll_normalizer.scale = Eigen::VectorXd::Constant(f.model.config.ll_dim, 2.0);
  c.hl_normalizer.mean = Eigen::VectorXd::Zero(f.model.config.hl_item_dim * kHighLevelItems);
  c.hl_normalizer.scale = Eigen::VectorXd::Ones(f.model.config.hl_item_dim * kHighLevelItems);
  std::vector<std::optional<Eigen::VectorXd>> rows;
  for (int k = 0; k < 4; ++k) {
    if (k == 2) {
      rows.emplace_back();
    } else {
      rows.emplace_back(f.model.word_vectors.row(k).transpose());
    }
  }
  c.generator.store = EmbeddingStore(static_cast<int>(f.model.word_vectors.cols()), rows);
  c.generator.balance = Eigen::Vector4d(0.1, 0.2, 0.3, 0.4);
  c.generator.frequency = {1, 2, 1, 2};
  c.generator.candidate_size = 2;
  c.model = f.model;
  return c;
}

std::vector<FeatureBundle> probe_images(const Checkpoint& c) {
  Rng rng(55);
  std::vector<FeatureBundle> out;
  for (int k = 0; k < 5; ++k) {
    out.push_back(make_bundle(testing::uniform_vector(rng, c.model.config.ll_dim, -2, 2),
                              testing::uniform_vector(rng, c.model.config.hl_item_dim * kHighLevelItems, -2, 2)));
  }
  return out;
}

}  // namespace

TEST_CASE("save and load reproduce every tensor and every decode") {
  testing::TempDir dir("ckpt");
  const Checkpoint c = trained_checkpoint(11);
  save_checkpoint(c, dir / "m.ckpt");
  Checkpoint back = load_checkpoint(dir / "m.ckpt");

  CHECK(back.config_text == c.config_text);
  CHECK(back.epoch == 20);
  CHECK(back.seed == 11);
  CHECK(back.loss == c.loss);
  CHECK(back.vocabulary == c.vocabulary);
  CHECK(back.ll_normalizer.mean == c.ll_normalizer.mean);
  CHECK(back.ll_normalizer.scale == c.ll_normalizer.scale);
  CHECK(back.generator.candidate_size == 2);
  CHECK(back.generator.frequency == c.generator.frequency);
  CHECK(back.generator.balance == c.generator.balance);
  CHECK_FALSE(back.generator.store.covered(2));
  CHECK(back.generator.store.vector(3) == c.generator.store.vector(3));
  CHECK(back.model.config.tau_mode == c.model.config.tau_mode);
  CHECK(back.model.config.leae_hidden == c.model.config.leae_hidden);
  CHECK(back.model.word_vectors == c.model.word_vectors);

  auto a = const_cast<Checkpoint&>(c).model.parameters();
  auto b = back.model.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t p = 0; p < a.size(); ++p) {
    CAPTURE(a[p].name);
    CHECK(a[p].name == b[p].name);
    CHECK(std::memcmp(a[p].data, b[p].data, sizeof(double) * static_cast<std::size_t>(a[p].size)) == 0);
  }
  for (const auto& img : probe_images(c)) {
    CHECK(decode_tags(back.model, back.generator, img).tags == decode_tags(c.model, c.generator, img).tags);
  }
  CHECK(serialize(back) == serialize(c));
}

TEST_CASE("the trailer is a standard CRC-32 of the body") {
  const std::vector<std::uint8_t> bytes = serialize(trained_checkpoint(3));
  REQUIRE(bytes.size() > 16);
  CHECK(std::memcmp(bytes.data(), "AIACKPT", 8) == 0);
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int k = 3; k >= 0; --k) stored = (stored << 8) | bytes[body + static_cast<std::size_t>(k)];
  CHECK(stored == bitwise_crc32(bytes.data(), body));
}

TEST_CASE("truncated or corrupted files fail the checksum") {
  testing::TempDir dir("ckpt");
  const std::vector<std::uint8_t> bytes = serialize(trained_checkpoint(4));
  for (std::size_t cut : {bytes.size() - 1, bytes.size() / 2, std::size_t{40}}) {
    std::vector<std::uint8_t> shorter(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    CHECK_THROWS_WITH_AS(parse_checkpoint(shorter), doctest::Contains("checksum"), DataError);
  }
  std::vector<std::uint8_t> flipped = bytes;
  flipped[bytes.size() / 3] ^= 0x10;
  CHECK_THROWS_WITH_AS(parse_checkpoint(flipped), doctest::Contains("checksum"), DataError);

  std::ofstream(dir / "cut.ckpt", std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size() - 7));
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "cut.ckpt"), doctest::Contains("checksum"), DataError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), Error);
  CHECK_THROWS_AS(parse_checkpoint({1, 2, 3}), DataError);
}

TEST_CASE("an unknown version is rejected even with a valid checksum") {
  std::vector<std::uint8_t> bytes = serialize(trained_checkpoint(5));
  put_u32(bytes, 8, Checkpoint::kVersion + 1);
  put_u32(bytes, bytes.size() - 4, bitwise_crc32(bytes.data(), bytes.size() - 4));
  CHECK_THROWS_WITH_AS(parse_checkpoint(bytes), doctest::Contains("version"), DataError);
}

TEST_CASE("two runs with the same seed give identical checkpoints") {
  const Checkpoint a = trained_checkpoint(21);
  const Checkpoint b = trained_checkpoint(21);
  CHECK(serialize(a) == serialize(b));
  for (const auto& img : probe_images(a)) {
    CHECK(decode_tags(a.model, a.generator, img).tags == decode_tags(b.model, b.generator, img).tags);
  }
  CHECK(serialize(trained_checkpoint(22)) != serialize(a));
}
