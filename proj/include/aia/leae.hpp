#pragma once

#include "aia/dataset.hpp"
#include "aia/rng.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace aia {

/// N x M log-entropy coefficients. Zero wherever the keyword is absent.
using EquilibriumMatrix = Eigen::MatrixXd;

/// w(i,j) = phi(i,j) * (1 + 1/(T_j ln N) * sum_i phi(i,j) [ln phi(i,j) - ln T_j]).
/// Throws DataError when N < 2 or a column is empty.
EquilibriumMatrix logentropy_weights(const AnnotationMatrix& phi);

/// Mean of each column (used to bias candidate generation towards rare keywords).
Eigen::VectorXd column_means(const EquilibriumMatrix& weights);

enum class InputRange { unit, real };

/// Stack of sigmoid layers. The last layer is the keyword predictor; the ones
/// before it form the encoder, whose tied transposes form the decoder.
struct LeaeNet {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Eigen::VectorXd> decoder_biases;  // one per encoder layer, sized to that layer's input

  /// dims = {input, hidden..., outputs}; requires at least two layers.
  static LeaeNet random(const std::vector<int>& dims, Rng& rng, double scale = 0.08);
  static LeaeNet zeros(const std::vector<int>& dims);

  int layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  int encoder_layers() const { return layers() - 1; }

  /// Decoder weight of encoder layer l (tied: transpose of the encoder weight).
  Eigen::MatrixXd decoder_weight(int layer) const { return weights.at(layer).transpose(); }
};

/// Output of the encoder stack.
Eigen::VectorXd encode(const LeaeNet& net, const Eigen::VectorXd& input);

/// Tied decoder back to input space. The final map is sigmoid for unit inputs, affine for real ones.
Eigen::VectorXd decode(const LeaeNet& net, const Eigen::VectorXd& hidden, InputRange range);

/// F(I): keyword scores through every layer.
Eigen::VectorXd predict(const LeaeNet& net, const Eigen::VectorXd& input);

/// Activations of every layer, activations[0] is the input.
std::vector<Eigen::VectorXd> forward_activations(const LeaeNet& net, const Eigen::VectorXd& input);

/// Per-keyword loss weight: max(w, w_min) on positives, 1 on negatives.
double keyword_loss_weight(bool positive, double weight, double w_min);

/// Weighted binary cross-entropy of one image; `weights` null means unit weights.
/// Accumulates into grad when given and returns the loss.
double balanced_loss(const LeaeNet& net, const Eigen::VectorXd& input, const Eigen::VectorXd& targets,
                     const Eigen::VectorXd* weights, double w_min, LeaeNet* grad);

/// d(loss)/d(pre-activation) at the output layer for given scores.
Eigen::VectorXd balanced_output_gradient(const Eigen::VectorXd& scores, const Eigen::VectorXd& targets,
                                         const Eigen::VectorXd* weights, double w_min);

struct TrainCurve {
  std::vector<double> losses;  // losses[0] before training, losses[e] after epoch e
};

struct BalancedTrainOptions {
  int epochs = 100;
  double lr = 0.1;
  double w_min = 0.01;
};

/// Full-batch gradient descent on the mean weighted loss over images.
/// `weights` null trains unweighted. Throws NumericalError on a non-finite loss.
TrainCurve train_balanced(LeaeNet& net, const Eigen::MatrixXd& features, const AnnotationMatrix& phi,
                          const EquilibriumMatrix* weights, const BalancedTrainOptions& options);

/// Mean squared reconstruction error through encode/decode.
double reconstruction_loss(const LeaeNet& net, const Eigen::VectorXd& input, InputRange range, LeaeNet* grad);

struct AutoencoderOptions {
  int epochs = 50;
  double lr = 0.1;
  InputRange range = InputRange::real;
  std::optional<double> tolerance;  // stop once the mean loss drops below it
};

/// Full-batch gradient descent on the tied auto-encoder objective. Rows of `inputs` are samples.
TrainCurve train_autoencoder(LeaeNet& net, const Eigen::MatrixXd& inputs, const AutoencoderOptions& options);

/// argmax of the keyword scores, lowest index on ties.
std::size_t first_tag(const LeaeNet& net, const Eigen::VectorXd& input);
std::size_t argmax_lowest(const Eigen::VectorXd& scores);

}  // namespace aia
