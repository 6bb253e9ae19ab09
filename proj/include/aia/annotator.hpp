#pragma once

#include "aia/attention.hpp"
#include "aia/embedding.hpp"
#include "aia/leae.hpp"
#include "aia/recurrent_cell.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace aia {

struct ModelConfig {
  int ll_dim = 0;       // fused low-level length (input of the balanced predictor)
  int ll_item_dim = 0;  // length of one low-level attention item
  int hl_item_dim = 0;
  int hidden_dim = 128;
  int context_dim = 128;
  int attention_dim = 64;
  int embed_input_dim = 64;
  std::vector<int> leae_hidden{256, 64};
  TauMode tau_mode = TauMode::normalized;
  double w_min = 0.01;
  int tag_count = 5;
};

/// Mutable view over one parameter tensor, used by optimizers, clipping and gradient checks.
struct ParamView {
  std::string name;
  std::string group;  // attention, tau, leae, cell, output, embedding
  double* data;
  Eigen::Index size;
  Eigen::Index rows;
  Eigen::Index cols;  // column-major storage
};

/// Every learnable tensor of the annotator plus the frozen word vectors.
struct AnnotatorModel {
  ModelConfig config;
  AttentionParams attention;
  LeaeNet leae;
  CellParams cell;
  Eigen::MatrixXd w_out;  // vocab x hidden
  Eigen::VectorXd b_out;
  Eigen::MatrixXd w_emb;  // embed_input x word_dim
  Eigen::VectorXd b_emb;
  Eigen::VectorXd start;  // learned first-step input in place of a previous tag
  Eigen::MatrixXd word_vectors;  // vocab x word_dim, frozen; zero rows for uncovered keywords

  static AnnotatorModel random(const ModelConfig& config, const Eigen::MatrixXd& word_vectors, Rng& rng);
  /// Same shapes, all zeros (gradient accumulator).
  AnnotatorModel zeros_like() const;

  int vocabulary_size() const { return static_cast<int>(w_out.rows()); }
  int input_dim() const { return config.context_dim + config.embed_input_dim; }

  /// Trainable tensors in a fixed order.
  std::vector<ParamView> parameters();
};

/// Normalized features of one image arranged for the model.
struct FeatureBundle {
  Eigen::VectorXd ll_fused;  // balanced predictor input
  Eigen::MatrixXd ll_items;  // ll_item_dim x #LL
  Eigen::MatrixXd hl_items;  // hl_item_dim x #HL
};

inline constexpr int kRegionCount = 5;
inline constexpr int kDctonLength = 4;
inline constexpr int kHighLevelItems = 8;

/// LL items are [dcton statistics, region block] for each of the five regions;
/// HL items are contiguous slices of the high-level vector.
FeatureBundle make_bundle(const Eigen::VectorXd& ll_fused, const Eigen::VectorXd& hl_vector,
                          int hl_items = kHighLevelItems);

/// Per-dimension z-scoring fitted on training rows.
struct FeatureNormalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static FeatureNormalizer fit(const std::vector<Eigen::VectorXd>& rows);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
};

/// Candidate generation state frozen at training time.
struct TagGenerator {
  EmbeddingStore store;
  Eigen::VectorXd balance;           // column means of the equilibrium matrix
  std::vector<std::size_t> frequency;  // training tag counts
  std::size_t candidate_size = 20;

  /// max(20, M / 4)
  static std::size_t default_size(std::size_t vocabulary_size);
};

struct DecodeResult {
  std::vector<std::size_t> tags;
  bool truncated = false;  // vocabulary smaller than tag_count
};

/// Greedy decoding. Step 1 runs the cell on the start token and emits the
/// balanced predictor's top keyword. Each later step feeds the previous tag's
/// projected embedding, masks emitted tags, restricts to the tag generator's
/// candidates seeded by the emitted tags, and emits the argmax.
DecodeResult decode_tags(const AnnotatorModel& model, const TagGenerator& generator, const FeatureBundle& features);

/// Step-wise logits with teacher-supplied previous tags; exposed for testing the walk.
std::vector<Eigen::VectorXd> decoder_logits(const AnnotatorModel& model, const FeatureBundle& features,
                                            const std::vector<std::size_t>& previous_tags);

/// One supervised image.
struct TrainingExample {
  FeatureBundle features;
  Eigen::VectorXd targets;             // M, indicator of the ground-truth tags
  Eigen::VectorXd keyword_weights;     // M, equilibrium weights (zero on negatives), or ones
  std::vector<std::size_t> sequence;   // ground truth ordered rarest first
  std::vector<double> sequence_weights;
};

/// Balanced-predictor loss plus teacher-forced weighted cross-entropy over the
/// sequence. Accumulates gradients into grad when given.
double example_loss(const AnnotatorModel& model, const TrainingExample& example, AnnotatorModel* grad);

struct DecoderTrainOptions {
  int epochs = 60;
  double lr = 0.1;
  int batch_size = 4;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  std::function<void(int epoch, double loss)> on_epoch;
};

/// Mean example_loss over a set.
double dataset_loss(const AnnotatorModel& model, const std::vector<TrainingExample>& examples);

/// Mini-batch gradient descent with global-norm clipping; batches follow a
/// seeded shuffle per epoch. losses[0] is the loss before training, losses[e]
/// the mean of the batch losses seen during epoch e.
/// Throws NumericalError (naming the epoch) on divergence.
TrainCurve train_decoder(AnnotatorModel& model, const std::vector<TrainingExample>& examples,
                         const DecoderTrainOptions& options);

}  // namespace aia
