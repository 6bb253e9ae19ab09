#include "aia/synth.hpp"

#include "aia/error.hpp"
#include "aia/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace aia {

namespace {

using Color = std::array<int, 3>;

constexpr std::array<const char*, 10> kShapes{"disc", "square",  "ring", "triangle", "cross",
                                              "stripes", "checker", "dots", "diamond", "gradient"};
constexpr std::array<std::pair<const char*, Color>, 10> kColors{{{"red", {220, 40, 40}},
                                                                  {"green", {40, 200, 60}},
                                                                  {"blue", {40, 70, 220}},
                                                                  {"yellow", {230, 220, 50}},
                                                                  {"cyan", {50, 210, 220}},
                                                                  {"magenta", {210, 50, 200}},
                                                                  {"orange", {240, 140, 30}},
                                                                  {"white", {245, 245, 245}},
                                                                  {"purple", {120, 40, 160}},
                                                                  {"brown", {130, 80, 40}}}};

constexpr int kEmbeddingDim = 16;

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Whether (dx, dy) relative to the primitive centre is covered; `shade` scales the colour.
bool covers(std::size_t shape, int x, int y, int dx, int dy, int r, double& shade) {
  const int box = r * 4 / 5;
  const bool in_box = std::abs(dx) <= box && std::abs(dy) <= box;
  shade = 1.0;
  switch (shape % kShapes.size()) {
    case 0: return dx * dx + dy * dy <= r * r;
    case 1: return in_box;
    case 2: {
      const int d2 = dx * dx + dy * dy;
      return d2 <= r * r && d2 * 100 >= r * r * 30;
    }
    case 3: return dy >= -r && dy <= r && 2 * std::abs(dx) <= dy + r;
    case 4: return (std::abs(dx) <= r / 4 && std::abs(dy) <= r) || (std::abs(dy) <= r / 4 && std::abs(dx) <= r);
    case 5: return std::abs(dx) <= r && std::abs(dy) <= r && (y / 3) % 2 == 0;
    case 6: return in_box && ((x / 4 + y / 4) % 2 == 0);
    case 7: return in_box && x % 6 < 3 && y % 6 < 3;
    case 8: return std::abs(dx) + std::abs(dy) <= r;
    default:
      shade = 0.25 + 0.75 * static_cast<double>(dx + box) / static_cast<double>(2 * box + 1);
      return in_box;
  }
}

void draw(RgbImage& img, std::size_t keyword, Rng& rng) {
  const int size = img.width;
  const int r = static_cast<int>(size * (0.14 + 0.08 * rng.uniform()));
  const int cx = r + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, size - 2 * r))));
  const int cy = r + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, size - 2 * r))));
  const Color base = kColors[keyword % kColors.size()].second;
  for (int y = std::max(0, cy - r); y <= std::min(size - 1, cy + r); ++y) {
    for (int x = std::max(0, cx - r); x <= std::min(size - 1, cx + r); ++x) {
      double shade = 1.0;
      if (!covers(keyword, x, y, x - cx, y - cy, r, shade)) continue;
      auto* p = img.pixel(y, x);
      for (int c = 0; c < 3; ++c) p[c] = clamp_byte(base[c] * shade + rng.uniform(-6.0, 6.0));
    }
  }
}

}  // namespace

std::vector<std::size_t> skewed_counts(int keywords, int images, double skew, int max_tags) {
  if (keywords < 1 || images < 1 || skew < 1.0 || max_tags < 1) {
    throw ConfigError("synthetic dataset needs keywords, images and max_tags >= 1 and skew >= 1");
  }
  const double top = std::max(1.0, std::round(0.8 * images));
  const double base = top / skew;
  std::vector<std::size_t> counts(static_cast<std::size_t>(keywords));
  for (int j = 0; j < keywords; ++j) {
    const double exponent = keywords > 1 ? static_cast<double>(keywords - 1 - j) / (keywords - 1) : 1.0;
    counts[static_cast<std::size_t>(j)] = static_cast<std::size_t>(std::max(1.0, std::round(base * std::pow(skew, exponent))));
  }
  return counts;
}

SynthDataset make_synthetic(const SynthOptions& o) {
  if (o.keywords > static_cast<int>(kShapes.size() * kColors.size())) {
    throw ConfigError("synthetic generator supports at most 100 keywords");
  }
  if (o.image_size < 32) throw ConfigError("synthetic images must be at least 32 pixels wide");
  Rng rng(o.seed);
  SynthDataset data;
  const auto m = static_cast<std::size_t>(o.keywords);
  const auto n = static_cast<std::size_t>(o.images);

  // Keyword k pairs colour (k mod 10) with shape (k + k/10) mod 10, so the first ten are all distinct.
  for (std::size_t k = 0; k < m; ++k) {
    data.keywords.push_back(std::string(kColors[k % 10].first) + "_" + kShapes[(k + k / 10) % 10]);
  }
  const auto targets = skewed_counts(o.keywords, o.images, o.skew, o.max_tags);

  std::vector<std::vector<std::size_t>> tags(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tags[a].size() < tags[b].size(); });
    std::size_t placed = 0;
    for (std::size_t i : order) {
      if (placed == targets[k]) break;
      if (tags[i].size() >= static_cast<std::size_t>(o.max_tags)) continue;
      tags[i].push_back(k);
      ++placed;
    }
  }
  for (auto& t : tags) {
    if (t.empty()) t.push_back(0);
    std::sort(t.begin(), t.end());
  }
  data.keyword_counts.assign(m, 0);
  for (const auto& t : tags) {
    for (std::size_t k : t) ++data.keyword_counts[k];
  }

  char name[32];
  for (std::size_t i = 0; i < n; ++i) {
    SynthImage img;
    std::snprintf(name, sizeof name, "img_%03zu.ppm", i);
    img.name = name;
    img.keywords = tags[i];
    img.pixels = RgbImage(o.image_size, o.image_size);
    const int background = 30 + static_cast<int>(rng.below(40));
    for (auto& byte : img.pixels.data) byte = clamp_byte(background + rng.uniform(-10.0, 10.0));
    for (std::size_t k : tags[i]) draw(img.pixels, k, rng);
    data.images.push_back(std::move(img));
  }

  // Related keywords (shared colour or shape) get nearby vectors.
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> v(kEmbeddingDim);
    for (auto& x : v) x = 0.3 * rng.normal();
    v[k % 10 % 8] += 2.0;
    v[8 + (k + k / 10) % 10 % 8] += 1.0;
    data.embeddings.push_back(std::move(v));
  }
  return data;
}

std::vector<std::filesystem::path> write_synthetic(const SynthDataset& data, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> produced;
  std::filesystem::create_directories(dir / "images");
  for (const auto& img : data.images) {
    const auto path = dir / "images" / img.name;
    save_ppm(img.pixels, path);
    produced.push_back(path);
  }

  const auto manifest = dir / "manifest.tsv";
  {
    std::ofstream out(manifest);
    if (!out) throw DataError("cannot write " + manifest.string());
    for (const auto& img : data.images) {
      out << "images/" << img.name << '\t';
      for (std::size_t t = 0; t < img.keywords.size(); ++t) out << (t ? "," : "") << data.keywords[img.keywords[t]];
      out << '\n';
    }
  }
  produced.push_back(manifest);

  const auto vectors = dir / "embeddings.txt";
  {
    std::ofstream out(vectors);
    if (!out) throw DataError("cannot write " + vectors.string());
    out << data.keywords.size() << ' ' << (data.embeddings.empty() ? 0 : data.embeddings.front().size()) << '\n';
    char buf[32];
    for (std::size_t k = 0; k < data.keywords.size(); ++k) {
      out << data.keywords[k];
      for (double x : data.embeddings[k]) {
        std::snprintf(buf, sizeof buf, " %.6f", x);
        out << buf;
      }
      out << '\n';
    }
  }
  produced.push_back(vectors);
  return produced;
}

}  // namespace aia
