#include "aia/annotator.hpp"

#include "aia/error.hpp"
#include "aia/highlevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aia {

namespace {

constexpr double kInitScale = 0.08;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-kInitScale, kInitScale);
  }
  return m;
}

void add_view(std::vector<ParamView>& out, std::string name, std::string group, Eigen::MatrixXd& m) {
  out.push_back({std::move(name), std::move(group), m.data(), m.size(), m.rows(), m.cols()});
}

void add_view(std::vector<ParamView>& out, std::string name, std::string group, Eigen::VectorXd& v) {
  out.push_back({std::move(name), std::move(group), v.data(), v.size(), v.size(), 1});
}

// Embedding fed to the cell when the previous tag was `tag`.
Eigen::VectorXd tag_input(const AnnotatorModel& model, std::size_t tag) {
  return model.w_emb * model.word_vectors.row(static_cast<Eigen::Index>(tag)).transpose() + model.b_emb;
}

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd v(a.size() + b.size());
  v << a, b;
  return v;
}

void check_bundle(const AnnotatorModel& model, const FeatureBundle& f) {
  if (f.ll_fused.size() != model.leae.input_dim() || f.ll_items.rows() != model.attention.w_ll.cols() ||
      f.hl_items.rows() != model.attention.w_hl.cols()) {
    throw DimensionError("feature bundle does not match the model dimensions");
  }
}

}  // namespace

AnnotatorModel AnnotatorModel::random(const ModelConfig& config, const Eigen::MatrixXd& word_vectors, Rng& rng) {
  const auto vocab = static_cast<int>(word_vectors.rows());
  if (vocab == 0) throw DimensionError("annotator needs a non-empty vocabulary");
  if (config.ll_dim <= 0 || config.ll_item_dim <= 0 || config.hl_item_dim <= 0) {
    throw DimensionError("annotator feature dimensions must be positive");
  }
  AnnotatorModel m;
  m.config = config;
  m.attention = AttentionParams::random(config.attention_dim, config.hidden_dim, config.ll_item_dim,
                                        config.hl_item_dim, config.context_dim, rng);
  std::vector<int> dims{config.ll_dim};
  dims.insert(dims.end(), config.leae_hidden.begin(), config.leae_hidden.end());
  dims.push_back(vocab);
  m.leae = LeaeNet::random(dims, rng, kInitScale);
  m.cell = CellParams::random(config.hidden_dim, config.context_dim + config.embed_input_dim, rng, kInitScale);
  m.w_out = uniform_matrix(vocab, config.hidden_dim, rng);
  m.b_out = Eigen::VectorXd::Zero(vocab);
  m.w_emb = uniform_matrix(config.embed_input_dim, word_vectors.cols(), rng);
  m.b_emb = Eigen::VectorXd::Zero(config.embed_input_dim);
  m.start = uniform_matrix(config.embed_input_dim, 1, rng).col(0);
  m.word_vectors = word_vectors;
  return m;
}

AnnotatorModel AnnotatorModel::zeros_like() const {
  AnnotatorModel z = *this;
  for (auto& p : z.parameters()) std::fill(p.data, p.data + p.size, 0.0);
  return z;
}

std::vector<ParamView> AnnotatorModel::parameters() {
  std::vector<ParamView> out;
  add_view(out, "attention.gamma", "attention", attention.gamma);
  add_view(out, "attention.w_h", "attention", attention.w_h);
  add_view(out, "attention.w_ll", "attention", attention.w_ll);
  add_view(out, "attention.w_hl", "attention", attention.w_hl);
  add_view(out, "attention.b", "attention", attention.b);
  add_view(out, "attention.proj_ll", "attention", attention.proj_ll);
  add_view(out, "attention.proj_hl", "attention", attention.proj_hl);
  out.push_back({"attention.tau_logit", "tau", &attention.tau_logit, 1, 1, 1});
  for (int l = 0; l < leae.layers(); ++l) {
    add_view(out, "leae.w" + std::to_string(l), "leae", leae.weights[l]);
    add_view(out, "leae.b" + std::to_string(l), "leae", leae.biases[l]);
  }
  for (std::size_t l = 0; l < leae.decoder_biases.size(); ++l) {
    add_view(out, "leae.c" + std::to_string(l), "leae", leae.decoder_biases[l]);
  }
  add_view(out, "cell.w_z", "cell", cell.w_z);
  add_view(out, "cell.w_r", "cell", cell.w_r);
  add_view(out, "cell.w", "cell", cell.w);
  add_view(out, "output.w", "output", w_out);
  add_view(out, "output.b", "output", b_out);
  add_view(out, "embedding.w", "embedding", w_emb);
  add_view(out, "embedding.b", "embedding", b_emb);
  add_view(out, "embedding.start", "embedding", start);
  return out;
}

FeatureBundle make_bundle(const Eigen::VectorXd& ll_fused, const Eigen::VectorXd& hl_vector, int hl_items) {
  const Eigen::Index rest = ll_fused.size() - kDctonLength;
  if (rest <= 0 || rest % kRegionCount != 0) {
    throw DimensionError("low-level vector of length " + std::to_string(ll_fused.size()) +
                         " cannot be split into region items");
  }
  const Eigen::Index block = rest / kRegionCount;
  FeatureBundle b;
  b.ll_fused = ll_fused;
  b.ll_items.resize(kDctonLength + block, kRegionCount);
  for (int i = 0; i < kRegionCount; ++i) {
    b.ll_items.col(i) << ll_fused.head(kDctonLength), ll_fused.segment(kDctonLength + i * block, block);
  }
  const auto slices = slice_items(hl_vector, hl_items);
  b.hl_items.resize(slices.front().size(), static_cast<Eigen::Index>(slices.size()));
  for (std::size_t j = 0; j < slices.size(); ++j) b.hl_items.col(static_cast<Eigen::Index>(j)) = slices[j];
  return b;
}

FeatureNormalizer FeatureNormalizer::fit(const std::vector<Eigen::VectorXd>& rows) {
  if (rows.empty()) throw DataError("cannot fit a normalizer on zero rows");
  const Eigen::Index d = rows.front().size();
  FeatureNormalizer n;
  n.mean = Eigen::VectorXd::Zero(d);
  for (const auto& r : rows) {
    if (r.size() != d) throw DimensionError("normalizer rows differ in length");
    n.mean += r;
  }
  n.mean /= static_cast<double>(rows.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& r : rows) var += (r - n.mean).cwiseAbs2();
  var /= static_cast<double>(rows.size());
  n.scale = var.unaryExpr([](double v) { return v > 1e-24 ? std::sqrt(v) : 1.0; });
  return n;
}

Eigen::VectorXd FeatureNormalizer::apply(const Eigen::VectorXd& v) const {
  if (v.size() != mean.size()) {
    throw DimensionError("normalizer expects length " + std::to_string(mean.size()) + ", got " +
                         std::to_string(v.size()));
  }
  return (v - mean).cwiseQuotient(scale);
}

std::size_t TagGenerator::default_size(std::size_t vocabulary_size) {
  return std::max<std::size_t>(20, vocabulary_size / 4);
}

std::vector<Eigen::VectorXd> decoder_logits(const AnnotatorModel& model, const FeatureBundle& features,
                                            const std::vector<std::size_t>& previous_tags) {
  check_bundle(model, features);
  const auto items = prepare_items(model.attention, features.ll_items, features.hl_items);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(model.config.hidden_dim);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t t = 0; t <= previous_tags.size(); ++t) {
    const auto att = attention_forward(model.attention, items, h, model.config.tau_mode);
    const Eigen::VectorXd e = t == 0 ? model.start : tag_input(model, previous_tags[t - 1]);
    h = cell_step(model.cell, h, concat(att.output.context, e));
    out.push_back(model.w_out * h + model.b_out);
  }
  return out;
}

DecodeResult decode_tags(const AnnotatorModel& model, const TagGenerator& generator, const FeatureBundle& features) {
  check_bundle(model, features);
  const auto m = static_cast<std::size_t>(model.vocabulary_size());
  const auto wanted = static_cast<std::size_t>(model.config.tag_count);
  DecodeResult result;
  result.truncated = m < wanted;
  const std::size_t count = std::min(m, wanted);
  if (count == 0) return result;

  const auto items = prepare_items(model.attention, features.ll_items, features.hl_items);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(model.config.hidden_dim);
  const bool use_generator = generator.store.vocabulary_size() == m;

  for (std::size_t t = 0; t < count; ++t) {
    const auto att = attention_forward(model.attention, items, h, model.config.tau_mode);
    const Eigen::VectorXd e = t == 0 ? model.start : tag_input(model, result.tags.back());
    h = cell_step(model.cell, h, concat(att.output.context, e));
    if (t == 0) {
      result.tags.push_back(first_tag(model.leae, features.ll_fused));
      continue;
    }
    Eigen::VectorXd logits = model.w_out * h + model.b_out;
    for (std::size_t k : result.tags) logits[static_cast<Eigen::Index>(k)] = kNegInf;

    bool seeded = false;
    if (use_generator) {
      seeded = std::any_of(result.tags.begin(), result.tags.end(),
                           [&](std::size_t k) { return generator.store.covered(k); });
    }
    if (seeded) {
      const auto candidates = generate_candidates(result.tags, generator.store, generator.balance,
                                                  generator.candidate_size, generator.frequency);
      if (!candidates.entries.empty()) {
        Eigen::VectorXd restricted = Eigen::VectorXd::Constant(logits.size(), kNegInf);
        for (const auto& c : candidates.entries) {
          const auto k = static_cast<Eigen::Index>(c.keyword);
          restricted[k] = logits[k];
        }
        logits = restricted;
      }
    }
    result.tags.push_back(argmax_lowest(logits));
  }
  return result;
}

namespace {

struct StepRecord {
  AttentionTrace attention;
  CellTrace cell;
  Eigen::VectorXd h_prev;
  Eigen::VectorXd probs;
};

}  // namespace

double example_loss(const AnnotatorModel& model, const TrainingExample& ex, AnnotatorModel* grad) {
  check_bundle(model, ex.features);
  if (ex.sequence.size() != ex.sequence_weights.size()) {
    throw DimensionError("sequence and sequence weights differ in length");
  }
  const double w_min = model.config.w_min;
  double loss = balanced_loss(model.leae, ex.features.ll_fused, ex.targets, &ex.keyword_weights, w_min,
                              grad ? &grad->leae : nullptr);

  const TauMode mode = model.config.tau_mode;
  const auto items = prepare_items(model.attention, ex.features.ll_items, ex.features.hl_items);
  std::vector<StepRecord> steps(ex.sequence.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(model.config.hidden_dim);
  for (std::size_t t = 0; t < ex.sequence.size(); ++t) {
    auto& s = steps[t];
    s.h_prev = h;
    s.attention = attention_forward(model.attention, items, h, mode);
    const Eigen::VectorXd e = t == 0 ? model.start : tag_input(model, ex.sequence[t - 1]);
    h = cell_step(model.cell, h, concat(s.attention.output.context, e), &s.cell);
    Eigen::VectorXd logits = model.w_out * h + model.b_out;
    for (std::size_t u = 0; u < t; ++u) logits[static_cast<Eigen::Index>(ex.sequence[u])] = kNegInf;
    const auto target = static_cast<Eigen::Index>(ex.sequence[t]);
    const double top = logits.maxCoeff();
    const double log_z = top + std::log((logits.array() - top).exp().sum());
    loss -= ex.sequence_weights[t] * (logits[target] - log_z);
    s.probs = (logits.array() - log_z).exp().matrix();
  }
  if (!grad) return loss;

  const int ctx = model.config.context_dim;
  const int emb = model.config.embed_input_dim;
  Eigen::VectorXd dh_carry = Eigen::VectorXd::Zero(model.config.hidden_dim);
  for (std::size_t t = ex.sequence.size(); t-- > 0;) {
    const auto& s = steps[t];
    Eigen::VectorXd d_logits = ex.sequence_weights[t] * s.probs;
    d_logits[static_cast<Eigen::Index>(ex.sequence[t])] -= ex.sequence_weights[t];
    grad->w_out.noalias() += d_logits * s.cell.h_next.transpose();
    grad->b_out += d_logits;
    const Eigen::VectorXd dh = model.w_out.transpose() * d_logits + dh_carry;

    Eigen::VectorXd dh_prev, dx;
    cell_backward(model.cell, s.h_prev, s.cell, dh, grad->cell, dh_prev, dx);
    const Eigen::VectorXd de = dx.tail(emb);
    if (t == 0) {
      grad->start += de;
    } else {
      grad->w_emb.noalias() +=
          de * model.word_vectors.row(static_cast<Eigen::Index>(ex.sequence[t - 1]));
      grad->b_emb += de;
    }
    dh_prev += attention_backward(model.attention, ex.features.ll_items, ex.features.hl_items, items, s.attention,
                                  dx.head(ctx), mode, grad->attention);
    dh_carry = dh_prev;
  }
  return loss;
}

double dataset_loss(const AnnotatorModel& model, const std::vector<TrainingExample>& examples) {
  if (examples.empty()) throw DataError("dataset_loss: no examples");
  double total = 0;
  for (const auto& ex : examples) total += example_loss(model, ex, nullptr);
  return total / static_cast<double>(examples.size());
}

TrainCurve train_decoder(AnnotatorModel& model, const std::vector<TrainingExample>& examples,
                         const DecoderTrainOptions& options) {
  if (examples.empty()) throw DataError("train_decoder: no training examples");
  if (options.batch_size <= 0) throw ConfigError("batch_size must be positive");

  TrainCurve curve;
  curve.losses.push_back(dataset_loss(model, examples));
  if (!std::isfinite(curve.losses.back())) throw NumericalError("train_decoder: non-finite initial loss");

  Rng rng(options.seed);
  std::vector<std::size_t> order(examples.size());
  AnnotatorModel grad = model.zeros_like();
  auto params = model.parameters();
  auto grads = grad.parameters();
  const auto batch = static_cast<std::size_t>(options.batch_size);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      for (auto& g : grads) std::fill(g.data, g.data + g.size, 0.0);
      for (std::size_t i = begin; i < end; ++i) epoch_loss += example_loss(model, examples[order[i]], &grad);

      const double scale = 1.0 / static_cast<double>(end - begin);
      double norm2 = 0;
      for (const auto& g : grads) {
        for (Eigen::Index k = 0; k < g.size; ++k) norm2 += g.data[k] * g.data[k];
      }
      const double norm = std::sqrt(norm2) * scale;
      if (!std::isfinite(norm)) {
        throw NumericalError("train_decoder: non-finite gradient at epoch " + std::to_string(epoch));
      }
      const double clip = options.clip_norm > 0 && norm > options.clip_norm ? options.clip_norm / norm : 1.0;
      const double step = options.lr * scale * clip;
      for (std::size_t p = 0; p < params.size(); ++p) {
        for (Eigen::Index k = 0; k < params[p].size; ++k) params[p].data[k] -= step * grads[p].data[k];
      }
    }
    epoch_loss /= static_cast<double>(examples.size());
    if (!std::isfinite(epoch_loss)) {
      throw NumericalError("train_decoder: non-finite loss at epoch " + std::to_string(epoch));
    }
    curve.losses.push_back(epoch_loss);
    if (options.on_epoch) options.on_epoch(epoch, epoch_loss);
  }
  return curve;
}

}  // namespace aia
