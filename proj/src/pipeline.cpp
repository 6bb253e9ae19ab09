#include "aia/pipeline.hpp"

#include "aia/annotator.hpp"
#include "aia/checkpoint.hpp"
#include "aia/dataset.hpp"
#include "aia/embedding.hpp"
#include "aia/error.hpp"
#include "aia/evaluator.hpp"
#include "aia/feature_file.hpp"
#include "aia/highlevel.hpp"
#include "aia/leae.hpp"
#include "aia/lowlevel.hpp"
#include "aia/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace aia {

namespace {

constexpr const char* kRunManifest = "run_manifest.txt";

fs::path run_dir(const RunConfig& config) {
  const fs::path dir = config.path("output_dir");
  if (dir.empty()) throw ConfigError("output_dir must not be empty");
  fs::create_directories(dir);
  return dir;
}

fs::path output_path(const RunConfig& config, const std::string& key, const std::string& default_name) {
  return config.has(key) ? config.path(key) : run_dir(config) / default_name;
}

fs::path input_path(const RunConfig& config, const std::string& key, const std::string& default_name) {
  const fs::path p = output_path(config, key, default_name);
  if (!fs::exists(p)) throw ConfigError(key + ": " + p.string() + " does not exist");
  return p;
}

fs::path require_manifest(const RunConfig& config) {
  if (!config.has("manifest")) throw ConfigError("manifest is not set");
  const fs::path p = config.path("manifest");
  if (!fs::exists(p)) throw ConfigError("manifest " + p.string() + " does not exist");
  return p;
}

// Records produced files, relative to the run directory, merged across commands.
void record_outputs(const RunConfig& config, const std::string& command, const std::vector<fs::path>& outputs) {
  const fs::path dir = run_dir(config);
  const fs::path index = dir / kRunManifest;
  std::map<std::string, std::string> entries;
  if (std::ifstream in(index); in) {
    std::string line;
    while (std::getline(in, line)) {
      const auto tab = line.find('\t');
      if (tab != std::string::npos) entries[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }
  const fs::path base = fs::weakly_canonical(dir);
  for (const auto& p : outputs) {
    const fs::path rel = fs::weakly_canonical(p).lexically_relative(base);
    const std::string key = rel.empty() || *rel.begin() == ".." ? fs::weakly_canonical(p).string() : rel.generic_string();
    entries[key] = command;
  }
  std::ofstream out(index);
  for (const auto& [path, cmd] : entries) out << path << '\t' << cmd << '\n';
}

std::vector<std::size_t> parse_split_counts(const RunConfig& config) {
  std::vector<std::size_t> out;
  for (int v : config.int_list("split")) {
    if (v < 0) throw ConfigError("split counts must be non-negative");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.size() != 3) throw ConfigError("split expects three counts: train,val,test");
  return out;
}

struct Partition {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

// Training and evaluation image indices. Without a split both cover every image;
// with one, the assignment is also written to split.tsv in the run directory.
Partition partition(const RunConfig& config, const AnnotatedDataset& ds) {
  Partition p;
  if (!config.has("split")) {
    p.train.resize(ds.size());
    std::iota(p.train.begin(), p.train.end(), std::size_t{0});
    p.eval = p.train;
    return p;
  }
  const auto counts = parse_split_counts(config);
  const Split s = split(ds, counts[0], counts[1], counts[2], config.seed());
  const fs::path split_file = run_dir(config) / "split.tsv";
  write_split(ds, s, split_file);
  record_outputs(config, "split", {split_file});
  p.train = s.train;
  const std::string& which = config.get("eval_split");
  if (which == "train") {
    p.eval = s.train;
  } else if (which == "val") {
    p.eval = s.val;
  } else if (which == "test") {
    p.eval = s.test;
  } else {
    throw ConfigError("eval_split must be train, val or test");
  }
  if (p.train.empty()) throw ConfigError("the training split is empty");
  return p;
}

LowLevelConfig lowlevel_config(const RunConfig& config) {
  LowLevelConfig c;
  c.color_tolerance = config.number("color_tolerance");
  c.quantization_levels = static_cast<int>(config.integer("Q"));
  c.texture_size = static_cast<int>(config.integer("resize"));
  c.levels = static_cast<int>(config.integer("levels"));
  if (c.quantization_levels < 2) throw ConfigError("Q must be at least 2");
  if (c.levels < 1) throw ConfigError("levels must be positive");
  if (c.texture_size <= 0 || (c.texture_size / 2) % (1 << c.levels) != 0) {
    throw ConfigError("resize must be a positive multiple of 2^(levels + 1)");
  }
  return c;
}

std::string lowlevel_metadata(const LowLevelConfig& c) {
  std::ostringstream s;
  s << "Q=" << c.quantization_levels << " color_tolerance=" << c.color_tolerance << " resize=" << c.texture_size
    << " levels=" << c.levels;
  return s.str();
}

HighLevelSource configured_source(const RunConfig& config) {
  try {
    return parse_source(config.get("hl_source"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::string format_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f ms", ms);
  return buf;
}

// Per-keyword log-entropy weights over the training rows. Keywords absent from
// the training rows get zero weight instead of failing the whole computation.
EquilibriumMatrix training_weights(const AnnotationMatrix& phi) {
  std::vector<Eigen::Index> used;
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    if (phi.col(j).cast<int>().sum() > 0) used.push_back(j);
  }
  AnnotationMatrix compact(phi.rows(), static_cast<Eigen::Index>(used.size()));
  for (std::size_t c = 0; c < used.size(); ++c) compact.col(static_cast<Eigen::Index>(c)) = phi.col(used[c]);
  const EquilibriumMatrix w = logentropy_weights(compact);
  EquilibriumMatrix full = EquilibriumMatrix::Zero(phi.rows(), phi.cols());
  for (std::size_t c = 0; c < used.size(); ++c) full.col(used[c]) = w.col(static_cast<Eigen::Index>(c));
  return full;
}

AnnotationMatrix rows_of(const AnnotatedDataset& ds, const std::vector<std::size_t>& rows) {
  AnnotationMatrix phi(static_cast<Eigen::Index>(rows.size()), ds.annotations().cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    phi.row(static_cast<Eigen::Index>(r)) = ds.annotations().row(static_cast<Eigen::Index>(rows[r]));
  }
  return phi;
}

// Raw (unnormalized) features of an image: from the feature files, or extracted
// on the fly when the image has pixels and the fallback source is in use.
struct FeatureSource {
  FeatureFile ll;
  std::map<std::string, std::size_t> ll_index;
  HighLevelSet hl;
  LowLevelConfig ll_config;

  std::pair<Eigen::VectorXd, Eigen::VectorXd> lookup(const ImageRecord& image, bool allow_extract) const {
    auto li = ll_index.find(image.id);
    auto hi = hl.descriptors.find(image.id);
    if (li != ll_index.end() && hi != hl.descriptors.end()) return {ll.vectors[li->second], hi->second.vector};
    if (!allow_extract || image.feature_only || hl.source != HighLevelSource::fallback) {
      throw DataError("no features for image " + image.id);
    }
    const RgbImage pixels = load_image(image.path);
    Eigen::VectorXd llv = li != ll_index.end() ? ll.vectors[li->second] : extract_lowlevel(pixels, ll_config).fused;
    Eigen::VectorXd hlv = hi != hl.descriptors.end() ? hi->second.vector : fallback_descriptor(pixels).vector;
    return {llv, hlv};
  }
};

FeatureSource load_features(const RunConfig& config, std::ostream& log) {
  FeatureSource fs_;
  fs_.ll_config = lowlevel_config(config);
  fs_.ll = read_feature_file(input_path(config, "ll_features", "lowlevel.feat"));
  if (fs_.ll.source != "lowlevel") throw DataError("low-level feature file has source '" + fs_.ll.source + "'");
  fs_.ll_index = fs_.ll.index();
  fs_.hl = ingest_features(input_path(config, "hl_features", "highlevel.feat"));
  for (const auto& w : fs_.hl.warnings) log << "warning: " << w << '\n';
  if (fs_.hl.source != configured_source(config)) {
    throw ConfigError("high-level feature file holds " + to_string(fs_.hl.source) + " vectors but hl_source is " +
                      config.get("hl_source"));
  }
  return fs_;
}

EmbeddingStore load_store(const RunConfig& config, const Vocabulary& vocabulary, const fs::path& dir,
                          std::vector<fs::path>& outputs, std::ostream& log) {
  if (!config.has("embeddings")) {
    log << "no embeddings configured; tag candidates are unrestricted\n";
    return EmbeddingStore(1, std::vector<std::optional<Eigen::VectorXd>>(vocabulary.size()));
  }
  const fs::path path = config.path("embeddings");
  if (!fs::exists(path)) throw ConfigError("embeddings: " + path.string() + " does not exist");
  EmbeddingStore store = load_vectors(path, vocabulary);
  const fs::path report = dir / "uncovered_keywords.txt";
  write_uncovered_report(store, vocabulary, report);
  outputs.push_back(report);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * store.coverage());
  log << "embedding coverage " << buf << " (" << store.uncovered().size() << " keywords without vectors)\n";
  return store;
}

}  // namespace

CommandResult cmd_synth(const RunConfig& config, std::ostream& log) {
  SynthOptions o;
  o.seed = config.seed();
  o.images = static_cast<int>(config.integer("synth_images"));
  o.keywords = static_cast<int>(config.integer("synth_keywords"));
  o.skew = config.number("synth_skew");
  o.image_size = static_cast<int>(config.integer("synth_size"));
  o.max_tags = static_cast<int>(config.integer("synth_max_tags"));
  const fs::path dir = run_dir(config);

  const SynthDataset data = make_synthetic(o);
  CommandResult result;
  result.outputs = write_synthetic(data, dir);

  RunConfig next = config;
  next.set("output_dir", fs::absolute(dir).lexically_normal().string());
  next.set("manifest", fs::absolute(dir / "manifest.tsv").lexically_normal().string());
  next.set("embeddings", fs::absolute(dir / "embeddings.txt").lexically_normal().string());
  const fs::path cfg = dir / "run.cfg";
  {
    std::ofstream out(cfg);
    if (!out) throw DataError("cannot write " + cfg.string());
    out << next.dump();
  }
  result.outputs.push_back(cfg);

  log << "synthetic dataset: " << data.images.size() << " images, " << data.keywords.size() << " keywords, counts";
  for (std::size_t c : data.keyword_counts) log << ' ' << c;
  log << "\nconfig written to " << cfg.string() << '\n';
  record_outputs(config, "synth", result.outputs);
  return result;
}

CommandResult cmd_extract(const RunConfig& config, std::ostream& log) {
  const fs::path dir = run_dir(config);
  const AnnotatedDataset ds = load_manifest(require_manifest(config), {.verify_images = false});
  const LowLevelConfig llc = lowlevel_config(config);
  const bool fallback = configured_source(config) == HighLevelSource::fallback;
  const int workers = std::max<int>(1, static_cast<int>(config.integer("workers")));

  struct Item {
    std::optional<Eigen::VectorXd> ll, hl;
    std::string error;
    double ms = 0;
  };
  std::vector<Item> items(ds.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.images()[i].feature_only) {
      items[i].error = "feature-only record has no pixels";
    } else {
      todo.push_back(i);
    }
  }

  auto work = [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const RgbImage img = load_image(ds.images()[i].path);
      items[i].ll = extract_lowlevel(img, llc).fused;
      if (fallback) items[i].hl = fallback_descriptor(img).vector;
    } catch (const std::exception& e) {
      items[i].error = e.what();
    }
    items[i].ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  if (workers == 1) {
    for (std::size_t i : todo) work(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = static_cast<std::size_t>(w); k < todo.size(); k += static_cast<std::size_t>(workers)) {
          work(todo[k]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  CommandResult result;
  FeatureFile ll{"lowlevel", lowlevel_metadata(llc), static_cast<std::uint32_t>(lowlevel_length(llc)), {}, {}};
  FeatureFile hl{"fallback", "hist16x3+grid8x8 l2", static_cast<std::uint32_t>(kFallbackLength), {}, {}};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& id = ds.images()[i].id;
    if (!items[i].error.empty()) {
      result.errors.push_back(id + ": " + items[i].error);
      log << "[" << i + 1 << "/" << ds.size() << "] " << id << " FAILED: " << items[i].error << '\n';
      continue;
    }
    log << "[" << i + 1 << "/" << ds.size() << "] " << id << ' ' << format_ms(items[i].ms) << '\n';
    ll.ids.push_back(id);
    ll.vectors.push_back(*items[i].ll);
    if (fallback) {
      hl.ids.push_back(id);
      hl.vectors.push_back(*items[i].hl);
    }
  }
  if (ll.ids.empty()) throw DataError("no image could be processed");

  const fs::path ll_path = output_path(config, "ll_features", "lowlevel.feat");
  write_feature_file(ll, ll_path);
  result.outputs.push_back(ll_path);
  if (fallback) {
    const fs::path hl_path = output_path(config, "hl_features", "highlevel.feat");
    write_feature_file(hl, hl_path);
    result.outputs.push_back(hl_path);
  } else {
    log << "hl_source " << config.get("hl_source") << ": high-level vectors come from an external exporter\n";
  }
  const fs::path errors = dir / "extract_errors.txt";
  {
    std::ofstream out(errors);
    for (const auto& e : result.errors) out << e << '\n';
  }
  result.outputs.push_back(errors);
  log << "extracted " << ll.ids.size() << " of " << ds.size() << " images";
  if (!result.errors.empty()) log << " (" << result.errors.size() << " errors, see " << errors.string() << ")";
  log << '\n';
  record_outputs(config, "extract", result.outputs);
  return result;
}

CommandResult cmd_weights(const RunConfig& config, std::ostream& log) {
  const fs::path dir = run_dir(config);
  const AnnotatedDataset ds = load_manifest(require_manifest(config), {.verify_images = false});
  const Partition part = partition(config, ds);
  const AnnotationMatrix phi = rows_of(ds, part.train);
  const EquilibriumMatrix w = logentropy_weights(phi);

  const fs::path csv = dir / "weights.csv";
  std::ofstream out(csv);
  if (!out) throw DataError("cannot write " + csv.string());
  out << "image_id,keyword,weight\n";
  char buf[32];
  for (std::size_t r = 0; r < part.train.size(); ++r) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.4f\n", w(static_cast<Eigen::Index>(r), j));
      out << ds.images()[part.train[r]].id << ',' << ds.vocabulary().keyword(static_cast<std::size_t>(j)) << buf;
    }
  }
  out.close();

  log << "keyword frequencies:";
  for (Eigen::Index j = 0; j < phi.cols(); ++j) log << ' ' << ds.vocabulary().keyword(static_cast<std::size_t>(j)) << '=' << phi.col(j).cast<int>().sum();
  log << '\n';
  CommandResult result;
  result.outputs.push_back(csv);
  record_outputs(config, "weights", result.outputs);
  return result;
}

CommandResult cmd_train(const RunConfig& config, std::ostream& log) {
  const std::uint64_t seed = config.seed();
  const fs::path dir = run_dir(config);
  const AnnotatedDataset ds = load_manifest(require_manifest(config), {.verify_images = false});
  const Partition part = partition(config, ds);
  const FeatureSource features = load_features(config, log);
  CommandResult result;

  std::vector<Eigen::VectorXd> ll_rows, hl_rows;
  for (std::size_t i : part.train) {
    auto [llv, hlv] = features.lookup(ds.images()[i], false);
    ll_rows.push_back(std::move(llv));
    hl_rows.push_back(std::move(hlv));
  }
  Checkpoint ck;
  ck.ll_normalizer = FeatureNormalizer::fit(ll_rows);
  ck.hl_normalizer = FeatureNormalizer::fit(hl_rows);

  const AnnotationMatrix phi = rows_of(ds, part.train);
  const bool balanced = config.flag("balanced");
  const EquilibriumMatrix weights = training_weights(phi);
  std::vector<std::size_t> freq(static_cast<std::size_t>(phi.cols()));
  for (Eigen::Index j = 0; j < phi.cols(); ++j) freq[static_cast<std::size_t>(j)] = static_cast<std::size_t>(phi.col(j).cast<int>().sum());

  ck.generator.store = load_store(config, ds.vocabulary(), dir, result.outputs, log);
  ck.generator.balance = balanced ? column_means(weights) : Eigen::VectorXd::Zero(phi.cols());
  ck.generator.frequency = freq;
  const long long c = config.integer("candidates");
  ck.generator.candidate_size = c > 0 ? static_cast<std::size_t>(c) : TagGenerator::default_size(ds.vocabulary().size());

  ModelConfig mc;
  mc.ll_dim = static_cast<int>(features.ll.dim);
  mc.ll_item_dim = kDctonLength + (mc.ll_dim - kDctonLength) / kRegionCount;
  mc.hl_item_dim = static_cast<int>((features.hl.dim + kHighLevelItems - 1) / kHighLevelItems);
  mc.hidden_dim = static_cast<int>(config.integer("hidden_dim"));
  mc.context_dim = static_cast<int>(config.integer("context_dim"));
  mc.attention_dim = static_cast<int>(config.integer("attention_dim"));
  mc.embed_input_dim = static_cast<int>(config.integer("embed_input_dim"));
  mc.leae_hidden = config.int_list("leae_hidden");
  try {
    mc.tau_mode = parse_tau_mode(config.get("tau_mode"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  mc.w_min = config.number("w_min");
  mc.tag_count = static_cast<int>(config.integer("tag_count"));
  if (mc.hidden_dim <= 0 || mc.context_dim <= 0 || mc.attention_dim <= 0 || mc.embed_input_dim <= 0 ||
      mc.leae_hidden.empty() || mc.tag_count <= 0) {
    throw ConfigError("model dimensions and tag_count must be positive");
  }

  std::vector<TrainingExample> examples;
  for (std::size_t r = 0; r < part.train.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    TrainingExample ex;
    ex.features = make_bundle(ck.ll_normalizer.apply(ll_rows[r]), ck.hl_normalizer.apply(hl_rows[r]));
    ex.targets = phi.row(row).cast<double>().transpose();
    ex.keyword_weights = balanced ? Eigen::VectorXd(weights.row(row).transpose()) : Eigen::VectorXd::Ones(phi.cols());
    ex.sequence = ds.images()[part.train[r]].tag_indices;
    std::stable_sort(ex.sequence.begin(), ex.sequence.end(), [&](std::size_t a, std::size_t b) { return freq[a] < freq[b]; });
    for (std::size_t k : ex.sequence) {
      ex.sequence_weights.push_back(
          keyword_loss_weight(true, ex.keyword_weights[static_cast<Eigen::Index>(k)], mc.w_min));
    }
    examples.push_back(std::move(ex));
  }

  Rng rng(seed);
  ck.model = AnnotatorModel::random(mc, ck.generator.store.matrix(), rng);

  const int pretrain = static_cast<int>(config.integer("leae_pretrain_epochs"));
  if (pretrain > 0) {
    Eigen::MatrixXd inputs(static_cast<Eigen::Index>(examples.size()), mc.ll_dim);
    for (std::size_t r = 0; r < examples.size(); ++r) inputs.row(static_cast<Eigen::Index>(r)) = examples[r].features.ll_fused.transpose();
    const auto curve = train_autoencoder(ck.model.leae, inputs, {pretrain, config.number("lr"), InputRange::real, {}});
    log << "auto-encoder pre-training: loss " << curve.losses.front() << " -> " << curve.losses.back() << '\n';
  }

  DecoderTrainOptions opts;
  opts.epochs = static_cast<int>(config.integer("epochs"));
  opts.lr = config.number("lr");
  opts.batch_size = static_cast<int>(config.integer("batch_size"));
  opts.clip_norm = config.number("clip_norm");
  opts.seed = seed;
  opts.on_epoch = [&](int epoch, double loss) {
    if (epoch % 10 == 0 || epoch == opts.epochs) log << "epoch " << epoch << " loss " << loss << '\n';
  };
  const auto t0 = std::chrono::steady_clock::now();
  const TrainCurve curve = train_decoder(ck.model, examples, opts);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double final_loss = dataset_loss(ck.model, examples);

  ck.config_text = config.dump(false);
  ck.epoch = static_cast<std::uint64_t>(opts.epochs);
  ck.seed = seed;
  ck.loss = final_loss;
  ck.vocabulary = ds.vocabulary();

  const fs::path curve_path = dir / "loss_curve.csv";
  {
    std::ofstream out(curve_path);
    out << "epoch,loss\n";
    char buf[64];
    for (std::size_t e = 0; e < curve.losses.size(); ++e) {
      std::snprintf(buf, sizeof buf, "%zu,%.10g\n", e, curve.losses[e]);
      out << buf;
    }
  }
  const fs::path ckpt = output_path(config, "checkpoint", "model.ckpt");
  save_checkpoint(ck, ckpt);
  result.outputs.push_back(curve_path);
  result.outputs.push_back(ckpt);
  log << "trained " << opts.epochs << " epochs on " << examples.size() << " images in " << seconds
      << " s; loss " << curve.losses.front() << " -> " << final_loss << '\n';
  record_outputs(config, "train", result.outputs);
  return result;
}

CommandResult cmd_annotate(const RunConfig& config, std::ostream& log) {
  const Checkpoint ck = load_checkpoint(input_path(config, "checkpoint", "model.ckpt"));
  const AnnotatedDataset ds = load_manifest(require_manifest(config), {.verify_images = false});
  const Partition part = partition(config, ds);
  const FeatureSource features = load_features(config, log);

  std::set<std::string> unknown;
  for (const auto& k : ds.vocabulary().keywords()) {
    if (!ck.vocabulary.find(k)) unknown.insert(k);
  }
  if (!unknown.empty()) {
    log << "note: " << unknown.size() << " manifest tags are not in the model vocabulary:";
    for (const auto& k : unknown) log << ' ' << k;
    log << '\n';
  }

  CommandResult result;
  const fs::path out_path = output_path(config, "predictions", "predictions.tsv");
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path.string());
  bool truncated = false;
  std::size_t written = 0;
  for (std::size_t i : part.eval) {
    const auto& image = ds.images()[i];
    try {
      auto [llv, hlv] = features.lookup(image, true);
      const FeatureBundle bundle = make_bundle(ck.ll_normalizer.apply(llv), ck.hl_normalizer.apply(hlv));
      const DecodeResult d = decode_tags(ck.model, ck.generator, bundle);
      truncated = truncated || d.truncated;
      out << image.id << '\t';
      for (std::size_t t = 0; t < d.tags.size(); ++t) out << (t ? "," : "") << ck.vocabulary.keyword(d.tags[t]);
      out << '\n';
      ++written;
    } catch (const DataError& e) {
      result.errors.push_back(image.id + ": " + e.what());
    }
  }
  out.close();
  if (truncated) {
    log << "vocabulary has " << ck.vocabulary.size() << " keywords, fewer than tag_count; every keyword emitted\n";
  }
  if (written == 0) throw DataError("no image could be annotated");
  log << "annotated " << written << " images -> " << out_path.string() << '\n';
  result.outputs.push_back(out_path);
  record_outputs(config, "annotate", result.outputs);
  return result;
}

CommandResult cmd_eval(const RunConfig& config, std::ostream& log) {
  const fs::path dir = run_dir(config);
  const AnnotatedDataset ds = load_manifest(require_manifest(config), {.verify_images = false});
  const Partition part = partition(config, ds);
  const AnnotatedDataset truth = ds.subset(part.eval);
  const TagListing listing = read_tag_listing(input_path(config, "predictions", "predictions.tsv"), truth.vocabulary());
  if (!listing.unknown_tags.empty()) {
    throw DataError("predictions use tags outside the vocabulary: " + listing.unknown_tags.front());
  }
  const EvalReport report = evaluate(listing.rows, truth, static_cast<std::size_t>(config.integer("tag_count")));

  CommandResult result;
  const fs::path csv = dir / "eval_report.csv";
  write_report_csv(report, csv);
  const fs::path summary = dir / "eval_summary.txt";
  {
    std::ofstream out(summary);
    out << summary_line(report) << "\n\n" << report_table(report, "aia", config.get("manifest").empty() ? "-" : fs::path(config.get("manifest")).stem().string());
  }
  result.outputs = {csv, summary};
  log << summary_line(report) << '\n';
  record_outputs(config, "eval", result.outputs);
  return result;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Automatic image annotation pipeline"};
  app.require_subcommand(1);
  std::string config_file;
  std::map<std::string, std::string> overrides;

  using Command = CommandResult (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"synth", "generate the skewed synthetic dataset", cmd_synth},
      {"extract", "extract low-level and fallback high-level features", cmd_extract},
      {"weights", "write the log-entropy keyword weights", cmd_weights},
      {"train", "train the annotator and write a checkpoint", cmd_train},
      {"annotate", "emit tags for every image of the evaluation split", cmd_annotate},
      {"eval", "score predictions against the manifest", cmd_eval},
  };
  std::map<CLI::App*, Command> dispatch;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_file, "key = value config file");
    for (const auto& spec : RunConfig::keys()) {
      const std::string key = spec.key;
      std::string description = spec.help;
      if (!spec.default_value.empty()) description += " [" + spec.default_value + "]";
      sub->add_option_function<std::string>(
          "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; }, description);
    }
    dispatch[sub] = fn;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = config_file.empty() ? RunConfig() : RunConfig::from_file(config_file);
    for (const auto& [k, v] : overrides) config.set(k, v);
    config.seed();
    for (auto& [sub, fn] : dispatch) {
      if (!sub->parsed()) continue;
      const CommandResult result = fn(config, out);
      for (const auto& e : result.errors) err << "error: " << e << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DimensionError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace aia
