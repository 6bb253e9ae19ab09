#include "aia/leae.hpp"

#include "aia/error.hpp"

#include <cmath>
#include <string>

namespace aia {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_input(const LeaeNet& net, const Eigen::VectorXd& input) {
  if (input.size() != net.input_dim()) {
    throw DimensionError("leae: input has length " + std::to_string(input.size()) + ", network expects " +
                         std::to_string(net.input_dim()));
  }
}

void scale_and_add(LeaeNet& net, const LeaeNet& grad, double step) {
  for (int l = 0; l < net.layers(); ++l) {
    net.weights[l] -= step * grad.weights[l];
    net.biases[l] -= step * grad.biases[l];
  }
  for (std::size_t l = 0; l < net.decoder_biases.size(); ++l) net.decoder_biases[l] -= step * grad.decoder_biases[l];
}

LeaeNet zeros_like(const LeaeNet& net) {
  LeaeNet z;
  for (int l = 0; l < net.layers(); ++l) {
    z.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    z.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  for (const auto& b : net.decoder_biases) z.decoder_biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return z;
}

}  // namespace

EquilibriumMatrix logentropy_weights(const AnnotationMatrix& phi) {
  const Eigen::Index n = phi.rows(), m = phi.cols();
  if (n < 2) throw DataError("logentropy_weights: need at least 2 images, got " + std::to_string(n));
  const double log_n = std::log(static_cast<double>(n));

  EquilibriumMatrix w = EquilibriumMatrix::Zero(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double t = 0;
    for (Eigen::Index i = 0; i < n; ++i) t += phi(i, j);
    if (t == 0) throw DataError("logentropy_weights: keyword column " + std::to_string(j) + " is never used");
    const double log_t = std::log(t);
    // sum_i phi [ln phi - ln T]; absent entries vanish through the leading phi factor
    double entropy = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (phi(i, j)) entropy += std::log(static_cast<double>(phi(i, j)));
    }
    entropy -= t * log_t;
    const double coefficient = 1.0 + entropy / (t * log_n);
    for (Eigen::Index i = 0; i < n; ++i) w(i, j) = phi(i, j) ? coefficient : 0.0;
  }
  return w;
}

Eigen::VectorXd column_means(const EquilibriumMatrix& weights) {
  if (weights.rows() == 0) return Eigen::VectorXd::Zero(weights.cols());
  return weights.colwise().mean().transpose();
}

LeaeNet LeaeNet::zeros(const std::vector<int>& dims) {
  if (dims.size() < 3) throw DimensionError("LeaeNet needs at least two layers");
  LeaeNet net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    net.weights.push_back(Eigen::MatrixXd::Zero(dims[l + 1], dims[l]));
    net.biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
    if (l + 2 < dims.size()) net.decoder_biases.push_back(Eigen::VectorXd::Zero(dims[l]));
  }
  return net;
}

LeaeNet LeaeNet::random(const std::vector<int>& dims, Rng& rng, double scale) {
  LeaeNet net = zeros(dims);
  for (auto& w : net.weights) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-scale, scale);
    }
  }
  return net;
}

std::vector<Eigen::VectorXd> forward_activations(const LeaeNet& net, const Eigen::VectorXd& input) {
  check_input(net, input);
  std::vector<Eigen::VectorXd> acts{input};
  for (int l = 0; l < net.layers(); ++l) acts.push_back(sigmoid(net.weights[l] * acts.back() + net.biases[l]));
  return acts;
}

Eigen::VectorXd encode(const LeaeNet& net, const Eigen::VectorXd& input) {
  check_input(net, input);
  Eigen::VectorXd h = input;
  for (int l = 0; l < net.encoder_layers(); ++l) h = sigmoid(net.weights[l] * h + net.biases[l]);
  return h;
}

Eigen::VectorXd decode(const LeaeNet& net, const Eigen::VectorXd& hidden, InputRange range) {
  const int enc = net.encoder_layers();
  if (hidden.size() != net.weights[enc - 1].rows()) throw DimensionError("leae decode: hidden length mismatch");
  Eigen::VectorXd d = hidden;
  for (int l = enc - 1; l >= 0; --l) {
    const Eigen::VectorXd pre = net.weights[l].transpose() * d + net.decoder_biases[l];
    d = (l > 0 || range == InputRange::unit) ? sigmoid(pre) : pre;
  }
  return d;
}

Eigen::VectorXd predict(const LeaeNet& net, const Eigen::VectorXd& input) {
  return forward_activations(net, input).back();
}

double keyword_loss_weight(bool positive, double weight, double w_min) {
  return positive ? std::max(weight, w_min) : 1.0;
}

Eigen::VectorXd balanced_output_gradient(const Eigen::VectorXd& scores, const Eigen::VectorXd& targets,
                                         const Eigen::VectorXd* weights, double w_min) {
  Eigen::VectorXd g(scores.size());
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    const double c = weights ? keyword_loss_weight(targets[j] > 0.5, (*weights)[j], w_min) : 1.0;
    g[j] = c * (scores[j] - targets[j]);
  }
  return g;
}

double balanced_loss(const LeaeNet& net, const Eigen::VectorXd& input, const Eigen::VectorXd& targets,
                     const Eigen::VectorXd* weights, double w_min, LeaeNet* grad) {
  if (targets.size() != net.output_dim()) throw DimensionError("leae: target length mismatch");
  if (weights && weights->size() != targets.size()) throw DimensionError("leae: weight length mismatch");
  const auto acts = forward_activations(net, input);
  const int last = net.layers() - 1;
  const Eigen::VectorXd pre = net.weights[last] * acts[last] + net.biases[last];

  double loss = 0;
  for (Eigen::Index j = 0; j < pre.size(); ++j) {
    const double c = weights ? keyword_loss_weight(targets[j] > 0.5, (*weights)[j], w_min) : 1.0;
    loss += c * (targets[j] * softplus(-pre[j]) + (1.0 - targets[j]) * softplus(pre[j]));
  }
  if (!grad) return loss;

  Eigen::VectorXd delta = balanced_output_gradient(acts.back(), targets, weights, w_min);
  for (int l = last; l >= 0; --l) {
    grad->weights[l].noalias() += delta * acts[l].transpose();
    grad->biases[l] += delta;
    if (l > 0) {
      const auto& a = acts[l];
      delta = (net.weights[l].transpose() * delta).cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
    }
  }
  return loss;
}

namespace {

double mean_balanced(const LeaeNet& net, const Eigen::MatrixXd& features, const AnnotationMatrix& phi,
                     const EquilibriumMatrix* weights, double w_min, LeaeNet* grad) {
  const Eigen::Index n = features.rows();
  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd targets = phi.row(i).cast<double>().transpose();
    const Eigen::VectorXd row_w = weights ? Eigen::VectorXd(weights->row(i).transpose()) : Eigen::VectorXd();
    total += balanced_loss(net, features.row(i).transpose(), targets, weights ? &row_w : nullptr, w_min, grad);
  }
  if (grad) {
    for (int l = 0; l < net.layers(); ++l) {
      grad->weights[l] /= static_cast<double>(n);
      grad->biases[l] /= static_cast<double>(n);
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace

TrainCurve train_balanced(LeaeNet& net, const Eigen::MatrixXd& features, const AnnotationMatrix& phi,
                          const EquilibriumMatrix* weights, const BalancedTrainOptions& options) {
  if (features.rows() != phi.rows()) throw DimensionError("train_balanced: feature and annotation rows differ");
  if (features.rows() == 0) throw DataError("train_balanced: no training images");
  if (!features.allFinite()) throw DataError("train_balanced: non-finite features");
  if (weights && (weights->rows() != phi.rows() || weights->cols() != phi.cols())) {
    throw DimensionError("train_balanced: weight matrix shape differs from annotations");
  }
  TrainCurve curve;
  LeaeNet grad = zeros_like(net);
  double loss = mean_balanced(net, features, phi, weights, options.w_min, &grad);
  curve.losses.push_back(loss);
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    scale_and_add(net, grad, options.lr);
    grad = zeros_like(net);
    loss = mean_balanced(net, features, phi, weights, options.w_min, epoch < options.epochs ? &grad : nullptr);
    if (!std::isfinite(loss)) throw NumericalError("train_balanced: non-finite loss at epoch " + std::to_string(epoch));
    curve.losses.push_back(loss);
  }
  return curve;
}

double reconstruction_loss(const LeaeNet& net, const Eigen::VectorXd& input, InputRange range, LeaeNet* grad) {
  check_input(net, input);
  const int enc = net.encoder_layers();
  std::vector<Eigen::VectorXd> a{input};
  for (int l = 0; l < enc; ++l) a.push_back(sigmoid(net.weights[l] * a.back() + net.biases[l]));

  // d[l] is the decoder's reconstruction of a[l]; d[enc] = a[enc].
  std::vector<Eigen::VectorXd> d(static_cast<std::size_t>(enc) + 1);
  d[enc] = a[enc];
  for (int l = enc - 1; l >= 0; --l) {
    const Eigen::VectorXd pre = net.weights[l].transpose() * d[l + 1] + net.decoder_biases[l];
    d[l] = (l > 0 || range == InputRange::unit) ? sigmoid(pre) : pre;
  }
  const double dim = static_cast<double>(input.size());
  const double loss = (d[0] - input).squaredNorm() / dim;
  if (!grad) return loss;

  Eigen::VectorXd dd = 2.0 * (d[0] - input) / dim;
  for (int l = 0; l < enc; ++l) {
    const bool squashed = l > 0 || range == InputRange::unit;
    const Eigen::VectorXd dpre = squashed ? Eigen::VectorXd(dd.cwiseProduct(d[l].cwiseProduct((1.0 - d[l].array()).matrix()))) : dd;
    grad->weights[l].noalias() += d[l + 1] * dpre.transpose();
    grad->decoder_biases[l] += dpre;
    dd = net.weights[l] * dpre;
  }
  Eigen::VectorXd da = dd;
  for (int l = enc - 1; l >= 0; --l) {
    const Eigen::VectorXd dz = da.cwiseProduct(a[l + 1].cwiseProduct((1.0 - a[l + 1].array()).matrix()));
    grad->weights[l].noalias() += dz * a[l].transpose();
    grad->biases[l] += dz;
    da = net.weights[l].transpose() * dz;
  }
  return loss;
}

TrainCurve train_autoencoder(LeaeNet& net, const Eigen::MatrixXd& inputs, const AutoencoderOptions& options) {
  if (inputs.rows() == 0) throw DataError("train_autoencoder: no samples");
  const auto n = static_cast<double>(inputs.rows());
  auto pass = [&](LeaeNet* grad) {
    double total = 0;
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
      total += reconstruction_loss(net, inputs.row(i).transpose(), options.range, grad);
    }
    if (grad) {
      for (auto& w : grad->weights) w /= n;
      for (auto& b : grad->biases) b /= n;
      for (auto& b : grad->decoder_biases) b /= n;
    }
    return total / n;
  };

  TrainCurve curve;
  LeaeNet grad = zeros_like(net);
  double loss = pass(&grad);
  curve.losses.push_back(loss);
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    if (options.tolerance && loss < *options.tolerance) break;
    scale_and_add(net, grad, options.lr);
    grad = zeros_like(net);
    loss = pass(&grad);
    if (!std::isfinite(loss)) {
      throw NumericalError("train_autoencoder: non-finite loss at epoch " + std::to_string(epoch));
    }
    curve.losses.push_back(loss);
  }
  return curve;
}

std::size_t argmax_lowest(const Eigen::VectorXd& scores) {
  if (scores.size() == 0) throw DimensionError("argmax of an empty vector");
  std::size_t best = 0;
  for (Eigen::Index j = 1; j < scores.size(); ++j) {
    if (scores[j] > scores[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(j);
  }
  return best;
}

std::size_t first_tag(const LeaeNet& net, const Eigen::VectorXd& input) { return argmax_lowest(predict(net, input)); }

}  // namespace aia
