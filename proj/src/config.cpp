#include "aia/config.hpp"

#include "aia/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace aia {

const std::vector<RunConfig::KeySpec>& RunConfig::keys() {
  static const std::vector<KeySpec> specs{
      {"seed", "", "random seed (mandatory)"},
      {"manifest", "", "annotated manifest (<path>\\t<tag>,<tag>)"},
      {"output_dir", "run", "run directory receiving every output"},
      {"ll_features", "", "low-level feature file (default <output_dir>/lowlevel.feat)"},
      {"hl_features", "", "high-level feature file (default <output_dir>/highlevel.feat)"},
      {"hl_source", "fallback", "high-level source: vgg16, resnet50 or fallback"},
      {"embeddings", "", "word vectors in text format"},
      {"checkpoint", "", "model file (default <output_dir>/model.ckpt)"},
      {"predictions", "", "annotation listing (default <output_dir>/predictions.tsv)"},
      {"split", "", "train,val,test image counts; empty uses every image for both training and evaluation"},
      {"eval_split", "test", "split annotated and evaluated when a split is configured: train, val or test"},
      {"balanced", "true", "use log-entropy keyword weights (false trains with all weights 1)"},
      {"lr", "0.05", "learning rate"},
      {"epochs", "100", "training epochs"},
      {"batch_size", "4", "images per gradient step"},
      {"clip_norm", "5", "global gradient-norm clipping threshold"},
      {"hidden_dim", "128", "recurrent hidden size"},
      {"context_dim", "128", "attention context size"},
      {"attention_dim", "64", "attention score size"},
      {"embed_input_dim", "64", "projected tag-embedding size"},
      {"leae_hidden", "256,64", "hidden layer sizes of the balanced predictor"},
      {"leae_pretrain_epochs", "0", "auto-encoder pre-training epochs for the predictor's encoder"},
      {"candidates", "0", "candidate set size C (0 means max(20, M/4))"},
      {"tau_mode", "normalized", "attention split between families: normalized or literal"},
      {"w_min", "0.01", "floor on positive keyword weights"},
      {"tag_count", "5", "tags emitted per image"},
      {"Q", "16", "gray quantization levels for co-occurrence statistics"},
      {"color_tolerance", "8", "per-channel tolerance for colour-connected pixel pairs"},
      {"resize", "128", "side of the square image used for texture extraction"},
      {"levels", "4", "wavelet decomposition levels"},
      {"workers", "1", "threads for per-image extraction"},
      {"synth_images", "60", "synthetic image count"},
      {"synth_keywords", "10", "synthetic vocabulary size"},
      {"synth_skew", "16", "most/least frequent keyword count ratio"},
      {"synth_size", "64", "synthetic image side"},
      {"synth_max_tags", "5", "maximum tags per synthetic image"},
  };
  return specs;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) {
    if (!k.default_value.empty()) values_[k.key] = k.default_value;
  }
}

namespace {

bool known(const std::string& key) {
  for (const auto& k : RunConfig::keys()) {
    if (k.key == key) return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    try {
      cfg.set(key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const {
  auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

const std::string& RunConfig::get(const std::string& key) const {
  if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
  static const std::string empty;
  auto it = values_.find(key);
  return it == values_.end() ? empty : it->second;
}

double RunConfig::number(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long long RunConfig::integer(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<int> RunConfig::int_list(const std::string& key) const {
  std::vector<int> out;
  std::stringstream ss(get(key));
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("config key '" + key + "' expects a comma-separated integer list");
    }
    out.push_back(v);
  }
  return out;
}

std::filesystem::path RunConfig::path(const std::string& key) const { return std::filesystem::path(get(key)); }

std::uint64_t RunConfig::seed() const {
  if (!has("seed")) throw ConfigError("seed is mandatory (set seed = <n> or pass --seed)");
  const std::string& v = get("seed");
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("seed must be a non-negative integer");
  return out;
}

bool RunConfig::is_path_key(const std::string& key) {
  return key == "manifest" || key == "output_dir" || key == "ll_features" || key == "hl_features" ||
         key == "embeddings" || key == "checkpoint" || key == "predictions";
}

std::string RunConfig::dump(bool include_paths) const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (include_paths || !is_path_key(k)) out += k + "=" + v + "\n";
  }
  return out;
}

}  // namespace aia
