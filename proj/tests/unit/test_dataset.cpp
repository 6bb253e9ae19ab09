#include "aia/dataset.hpp"
#include "aia/error.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace aia;
using testing::TempDir;
using testing::write_text;

namespace {

void write_images(const TempDir& dir, std::initializer_list<const char*> names) {
  for (const char* n : names) save_ppm(testing::constant_image(32, 32, 10, 20, 30), dir / n);
}

AnnotatedDataset table_one(const TempDir& dir) {
  write_images(dir, {"i1.ppm", "i2.ppm", "i3.ppm"});
  write_text(dir / "m.tsv", "i1.ppm\tK1,K2,K3\ni2.ppm\tK2,K3\ni3.ppm\tK3\n");
  return load_manifest(dir / "m.tsv");
}

}  // namespace

TEST_CASE("manifest with the three-image example builds the expected annotation matrix") {
  TempDir dir("ds");
  const auto ds = table_one(dir);
  CHECK(ds.vocabulary().size() == 3);
  CHECK(ds.size() == 3);
  CHECK(ds.vocabulary().keywords() == std::vector<std::string>{"K1", "K2", "K3"});
  AnnotationMatrix expected(3, 3);
  expected << 1, 1, 1, 0, 1, 1, 0, 0, 1;
  CHECK(ds.annotations() == expected);
  CHECK(tag_frequency(ds) == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("vocabulary is the sorted union of tags") {
  TempDir dir("ds");
  write_text(dir / "m.tsv", "@a\tzebra,apple\n@b\tmango\n");
  const auto ds = load_manifest(dir / "m.tsv");
  CHECK(ds.vocabulary().keywords() == std::vector<std::string>{"apple", "mango", "zebra"});
  CHECK(ds.images()[0].tag_indices == std::vector<std::size_t>{0, 2});
  CHECK(ds.images()[0].feature_only);
}

TEST_CASE("single image with a single tag") {
  TempDir dir("ds");
  write_text(dir / "m.tsv", "@only\tsky\n");
  const auto ds = load_manifest(dir / "m.tsv");
  CHECK(ds.size() == 1);
  CHECK(ds.vocabulary().size() == 1);
  CHECK(ds.annotations()(0, 0) == 1);
  CHECK(tag_frequency(ds) == std::vector<std::size_t>{1});
}

TEST_CASE("one image with two tags has unit frequencies") {
  TempDir dir("ds");
  write_text(dir / "m.tsv", "@x\ta,b\n");
  CHECK(tag_frequency(load_manifest(dir / "m.tsv")) == std::vector<std::size_t>{1, 1});
}

TEST_CASE("manifest errors") {
  TempDir dir("ds");
  SUBCASE("missing file") { CHECK_THROWS_AS(load_manifest(dir / "nope.tsv"), DataError); }
  SUBCASE("empty file") {
    write_text(dir / "m.tsv", "");
    CHECK_THROWS_WITH_AS(load_manifest(dir / "m.tsv"), "empty manifest", DataError);
  }
  SUBCASE("empty tag list") {
    write_text(dir / "m.tsv", "@a\tx\n@b\t\n");
    CHECK_THROWS_AS(load_manifest(dir / "m.tsv"), DataError);
  }
  SUBCASE("duplicate ids") {
    write_text(dir / "m.tsv", "@a\tx\n@a\ty\n");
    CHECK_THROWS_AS(load_manifest(dir / "m.tsv"), DataError);
  }
  SUBCASE("unreadable image") {
    write_text(dir / "bad.ppm", "not an image");
    write_text(dir / "m.tsv", "bad.ppm\tx\n");
    CHECK_THROWS_AS(load_manifest(dir / "m.tsv"), DataError);
    CHECK_NOTHROW(load_manifest(dir / "m.tsv", {.verify_images = false}));
  }
  SUBCASE("missing tab") {
    write_text(dir / "m.tsv", "@a x\n");
    CHECK_THROWS_AS(load_manifest(dir / "m.tsv"), DataError);
  }
}

TEST_CASE("manifest round trip preserves vocabulary and annotations") {
  TempDir dir("ds");
  const auto ds = table_one(dir);
  write_manifest(ds, dir / "copy.tsv");
  const auto again = load_manifest(dir / "copy.tsv");
  CHECK(again.vocabulary() == ds.vocabulary());
  CHECK(again.annotations() == ds.annotations());
}

TEST_CASE("total frequency equals the number of image-tag pairs") {
  TempDir dir("ds");
  write_text(dir / "m.tsv", "@a\tx,y,z\n@b\ty\n@c\tz,x\n@d\tw\n");
  const auto ds = load_manifest(dir / "m.tsv");
  const auto t = tag_frequency(ds);
  CHECK(std::accumulate(t.begin(), t.end(), std::size_t{0}) == 7);
  CHECK(*std::min_element(t.begin(), t.end()) >= 1);
}

TEST_CASE("splits partition the dataset deterministically") {
  TempDir dir("ds");
  std::string text;
  for (int i = 0; i < 5000; ++i) text += "@img" + std::to_string(i) + "\tk" + std::to_string(i % 50) + "\n";
  write_text(dir / "m.tsv", text);
  const auto ds = load_manifest(dir / "m.tsv");

  const Split s = split(ds, 3500, 750, 750, 11);
  CHECK(s.train.size() == 3500);
  CHECK(s.val.size() == 750);
  CHECK(s.test.size() == 750);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 5000);

  const Split again = split(ds, 3500, 750, 750, 11);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  const Split other = split(ds, 3500, 750, 750, 12);
  CHECK(other.train != s.train);

  CHECK_THROWS_AS(split(ds, 3500, 750, 700, 11), DataError);

  const auto sub = ds.subset(s.test);
  CHECK(sub.vocabulary() == ds.vocabulary());
  CHECK(sub.size() == 750);
}

TEST_CASE("degenerate split puts everything in train") {
  TempDir dir("ds");
  write_text(dir / "m.tsv", "@a\tx\n@b\ty\n@c\tz\n");
  const auto ds = load_manifest(dir / "m.tsv");
  const Split s = split(ds, 3, 0, 0, 5);
  CHECK(s.train == std::vector<std::size_t>{0, 1, 2});
  CHECK(s.val.empty());
  CHECK(s.test.empty());
}

TEST_CASE("split descriptor round trip") {
  TempDir dir("ds");
  write_text(dir / "m.tsv", "@a\tx\n@b\ty\n@c\tz\n@d\tx\n");
  const auto ds = load_manifest(dir / "m.tsv");
  const Split s = split(ds, 2, 1, 1, 3);
  write_split(ds, s, dir / "split.tsv");
  const Split back = read_split(ds, dir / "split.tsv");
  CHECK(back.train == s.train);
  CHECK(back.val == s.val);
  CHECK(back.test == s.test);
}

TEST_CASE("tag listings report unknown tags instead of dropping them silently") {
  TempDir dir("ds");
  write_text(dir / "m.tsv", "@a\tx,y\n");
  const auto ds = load_manifest(dir / "m.tsv");
  write_text(dir / "p.tsv", "@a\tx,unseen\n");
  const TagListing listing = read_tag_listing(dir / "p.tsv", ds.vocabulary());
  REQUIRE(listing.rows.size() == 1);
  CHECK(listing.rows[0].second == std::vector<std::size_t>{0});
  CHECK(listing.unknown_tags == std::vector<std::string>{"unseen"});
}
