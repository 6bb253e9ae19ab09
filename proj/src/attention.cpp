#include "aia/attention.hpp"

#include "aia/error.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aia {

namespace {

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-scale, scale);
  }
  return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

void check_items(const AttentionParams& p, const Eigen::VectorXd& h_prev, const Eigen::MatrixXd& ll,
                 const Eigen::MatrixXd& hl) {
  if (h_prev.size() != p.w_h.cols()) {
    throw DimensionError("attention: hidden state has length " + std::to_string(h_prev.size()) + ", expected " +
                         std::to_string(p.w_h.cols()));
  }
  if (ll.rows() != p.w_ll.cols()) throw DimensionError("attention: low-level item length mismatch");
  if (hl.rows() != p.w_hl.cols()) throw DimensionError("attention: high-level item length mismatch");
}

}  // namespace

TauMode parse_tau_mode(const std::string& name) {
  if (name == "normalized") return TauMode::normalized;
  if (name == "literal") return TauMode::literal;
  throw std::invalid_argument("unknown tau mode: " + name);
}

std::string to_string(TauMode mode) { return mode == TauMode::normalized ? "normalized" : "literal"; }

AttentionParams AttentionParams::zeros(int attn_dim, int hidden_dim, int ll_dim, int hl_dim, int context_dim) {
  AttentionParams p;
  p.gamma = Eigen::VectorXd::Zero(attn_dim);
  p.w_h = Eigen::MatrixXd::Zero(attn_dim, hidden_dim);
  p.w_ll = Eigen::MatrixXd::Zero(attn_dim, ll_dim);
  p.w_hl = Eigen::MatrixXd::Zero(attn_dim, hl_dim);
  p.b = Eigen::VectorXd::Zero(attn_dim);
  p.tau_logit = 0.0;
  p.proj_ll = Eigen::MatrixXd::Zero(context_dim, ll_dim);
  p.proj_hl = Eigen::MatrixXd::Zero(context_dim, hl_dim);
  return p;
}

AttentionParams AttentionParams::random(int attn_dim, int hidden_dim, int ll_dim, int hl_dim, int context_dim,
                                        Rng& rng) {
  constexpr double kScale = 0.08;
  AttentionParams p = zeros(attn_dim, hidden_dim, ll_dim, hl_dim, context_dim);
  p.gamma = uniform_matrix(attn_dim, 1, rng, kScale);
  p.w_h = uniform_matrix(attn_dim, hidden_dim, rng, kScale);
  p.w_ll = uniform_matrix(attn_dim, ll_dim, rng, kScale);
  p.w_hl = uniform_matrix(attn_dim, hl_dim, rng, kScale);
  p.proj_ll = uniform_matrix(context_dim, ll_dim, rng, kScale);
  p.proj_hl = uniform_matrix(context_dim, hl_dim, rng, kScale);
  return p;
}

double AttentionParams::tau(TauMode mode) const {
  const double t = sigmoid(tau_logit);
  return mode == TauMode::normalized ? t : 0.5 * t;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  if (x.size() == 0) return x;
  const Eigen::VectorXd e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

AttentionScores attention_scores(const AttentionParams& params, const Eigen::VectorXd& h_prev,
                                 const Eigen::MatrixXd& ll_items, const Eigen::MatrixXd& hl_items) {
  check_items(params, h_prev, ll_items, hl_items);
  const Eigen::VectorXd shared = params.w_h * h_prev + params.b;
  AttentionScores s;
  s.zeta.resize(ll_items.cols());
  for (Eigen::Index i = 0; i < ll_items.cols(); ++i) {
    s.zeta[i] = params.gamma.dot(sigmoid(shared + params.w_ll * ll_items.col(i)).col(0));
  }
  s.rho.resize(hl_items.cols());
  for (Eigen::Index j = 0; j < hl_items.cols(); ++j) {
    s.rho[j] = params.gamma.dot(sigmoid(shared + params.w_hl * hl_items.col(j)).col(0));
  }
  return s;
}

void attention_weights(const Eigen::VectorXd& zeta, const Eigen::VectorXd& rho, double tau, TauMode mode,
                       Eigen::VectorXd& gammas, Eigen::VectorXd& xis) {
  if (zeta.size() == 0 || rho.size() == 0) throw DimensionError("attention_weights: need at least one item per family");
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("attention_weights: tau outside [0, 1]");
  if (mode == TauMode::literal && tau > 0.5) {
    throw std::invalid_argument("attention_weights: literal mode needs tau <= 1/2, got " + std::to_string(tau));
  }
  gammas = tau * softmax(zeta);
  xis = (mode == TauMode::normalized ? 1.0 - tau : 0.5 - tau) * softmax(rho);
}

Eigen::VectorXd attention_context(const AttentionParams& params, const Eigen::VectorXd& gammas,
                                  const Eigen::VectorXd& xis, const Eigen::MatrixXd& ll_items,
                                  const Eigen::MatrixXd& hl_items) {
  if (gammas.size() != ll_items.cols() || xis.size() != hl_items.cols()) {
    throw DimensionError("attention_context: weight count does not match item count");
  }
  if (ll_items.rows() != params.proj_ll.cols() || hl_items.rows() != params.proj_hl.cols()) {
    throw DimensionError("attention_context: item length does not match projection");
  }
  return params.proj_ll * (ll_items * gammas) + params.proj_hl * (hl_items * xis);
}

AttentionItemCache prepare_items(const AttentionParams& params, const Eigen::MatrixXd& ll_items,
                                 const Eigen::MatrixXd& hl_items) {
  if (ll_items.rows() != params.w_ll.cols()) throw DimensionError("attention: low-level item length mismatch");
  if (hl_items.rows() != params.w_hl.cols()) throw DimensionError("attention: high-level item length mismatch");
  if (ll_items.cols() == 0 || hl_items.cols() == 0) throw DimensionError("attention: need at least one item per family");
  AttentionItemCache c;
  c.ll_pre = (params.w_ll * ll_items).colwise() + params.b;
  c.hl_pre = (params.w_hl * hl_items).colwise() + params.b;
  c.ll_ctx = params.proj_ll * ll_items;
  c.hl_ctx = params.proj_hl * hl_items;
  return c;
}

AttentionTrace attention_forward(const AttentionParams& params, const AttentionItemCache& items,
                                 const Eigen::VectorXd& h_prev, TauMode mode) {
  if (h_prev.size() != params.w_h.cols()) throw DimensionError("attention: hidden state length mismatch");
  AttentionTrace t;
  t.h_prev = h_prev;
  const Eigen::VectorXd shared = params.w_h * h_prev;
  t.ll_act = sigmoid(items.ll_pre.colwise() + shared);
  t.hl_act = sigmoid(items.hl_pre.colwise() + shared);
  const Eigen::VectorXd zeta = t.ll_act.transpose() * params.gamma;
  const Eigen::VectorXd rho = t.hl_act.transpose() * params.gamma;
  t.alpha = softmax(zeta);
  t.beta = softmax(rho);
  t.tau = params.tau(mode);
  const double high_share = mode == TauMode::normalized ? 1.0 - t.tau : 0.5 - t.tau;
  t.output.gammas = t.tau * t.alpha;
  t.output.xis = high_share * t.beta;
  t.output.context = items.ll_ctx * t.output.gammas + items.hl_ctx * t.output.xis;
  return t;
}

Eigen::VectorXd attention_backward(const AttentionParams& params, const Eigen::MatrixXd& ll_items,
                                   const Eigen::MatrixXd& hl_items, const AttentionItemCache& items,
                                   const AttentionTrace& t, const Eigen::VectorXd& d_context, TauMode mode,
                                   AttentionParams& grad) {
  // context = ll_ctx * gammas + hl_ctx * xis
  const Eigen::VectorXd d_gammas = items.ll_ctx.transpose() * d_context;
  const Eigen::VectorXd d_xis = items.hl_ctx.transpose() * d_context;
  grad.proj_ll.noalias() += d_context * (ll_items * t.output.gammas).transpose();
  grad.proj_hl.noalias() += d_context * (hl_items * t.output.xis).transpose();

  // gammas = tau * alpha, xis = (c - tau) * beta
  const double high_share = mode == TauMode::normalized ? 1.0 - t.tau : 0.5 - t.tau;
  const Eigen::VectorXd d_alpha = t.tau * d_gammas;
  const Eigen::VectorXd d_beta = high_share * d_xis;
  const double d_tau = t.alpha.dot(d_gammas) - t.beta.dot(d_xis);
  const double s = mode == TauMode::normalized ? t.tau : 2.0 * t.tau;  // sigmoid(logit)
  const double d_sig = mode == TauMode::normalized ? d_tau : 0.5 * d_tau;
  grad.tau_logit += d_sig * s * (1.0 - s);

  // softmax
  const Eigen::VectorXd d_zeta = t.alpha.cwiseProduct((d_alpha.array() - t.alpha.dot(d_alpha)).matrix());
  const Eigen::VectorXd d_rho = t.beta.cwiseProduct((d_beta.array() - t.beta.dot(d_beta)).matrix());

  // zeta_i = gamma . act_i
  grad.gamma.noalias() += t.ll_act * d_zeta + t.hl_act * d_rho;
  const Eigen::MatrixXd d_ll_pre =
      ((params.gamma * d_zeta.transpose()).array() * t.ll_act.array() * (1.0 - t.ll_act.array())).matrix();
  const Eigen::MatrixXd d_hl_pre =
      ((params.gamma * d_rho.transpose()).array() * t.hl_act.array() * (1.0 - t.hl_act.array())).matrix();

  const Eigen::VectorXd d_shared = d_ll_pre.rowwise().sum() + d_hl_pre.rowwise().sum();
  grad.w_ll.noalias() += d_ll_pre * ll_items.transpose();
  grad.w_hl.noalias() += d_hl_pre * hl_items.transpose();
  grad.b += d_shared;
  grad.w_h.noalias() += d_shared * t.h_prev.transpose();
  return params.w_h.transpose() * d_shared;
}

}  // namespace aia
