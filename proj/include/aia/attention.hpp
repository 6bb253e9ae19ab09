#pragma once

#include "aia/rng.hpp"

#include <Eigen/Core>

namespace aia {

/// How the high-level family's share is derived from tau.
///   normalized: gamma = tau * softmax(zeta), xi = (1 - tau) * softmax(rho); weights sum to 1.
///   literal:    xi uses (1/2 - tau) instead; weights sum to 1/2 and tau must not exceed 1/2.
enum class TauMode { normalized, literal };

TauMode parse_tau_mode(const std::string& name);
std::string to_string(TauMode mode);

/// Items are stored column-wise: ll_items is ll_dim x #LL, hl_items is hl_dim x #HL.
struct AttentionParams {
  Eigen::VectorXd gamma;    // score projection, attn_dim
  Eigen::MatrixXd w_h;      // attn_dim x hidden_dim
  Eigen::MatrixXd w_ll;     // attn_dim x ll_dim
  Eigen::MatrixXd w_hl;     // attn_dim x hl_dim
  Eigen::VectorXd b;        // attn_dim
  double tau_logit = 0.0;   // tau = sigmoid(logit), halved in literal mode
  Eigen::MatrixXd proj_ll;  // context_dim x ll_dim
  Eigen::MatrixXd proj_hl;  // context_dim x hl_dim

  static AttentionParams zeros(int attn_dim, int hidden_dim, int ll_dim, int hl_dim, int context_dim);
  /// Weights uniform in [-0.08, 0.08], bias zero, tau logit zero.
  static AttentionParams random(int attn_dim, int hidden_dim, int ll_dim, int hl_dim, int context_dim, Rng& rng);

  int attention_dim() const { return static_cast<int>(gamma.size()); }
  int context_dim() const { return static_cast<int>(proj_ll.rows()); }

  /// Effective tau for the given mode.
  double tau(TauMode mode) const;
};

struct AttentionScores {
  Eigen::VectorXd zeta;  // one per LL item
  Eigen::VectorXd rho;   // one per HL item
};

struct AttentionOutput {
  Eigen::VectorXd gammas;
  Eigen::VectorXd xis;
  Eigen::VectorXd context;
};

/// zeta_i = Gamma . sigmoid(W_h h + W_ll LL_i + b), rho_j likewise with W_hl and HL_j.
AttentionScores attention_scores(const AttentionParams& params, const Eigen::VectorXd& h_prev,
                                 const Eigen::MatrixXd& ll_items, const Eigen::MatrixXd& hl_items);

/// Throws DimensionError for empty families, std::invalid_argument for literal mode with tau > 1/2.
void attention_weights(const Eigen::VectorXd& zeta, const Eigen::VectorXd& rho, double tau, TauMode mode,
                       Eigen::VectorXd& gammas, Eigen::VectorXd& xis);

/// sum_i gamma_i proj_ll LL_i + sum_j xi_j proj_hl HL_j
Eigen::VectorXd attention_context(const AttentionParams& params, const Eigen::VectorXd& gammas,
                                  const Eigen::VectorXd& xis, const Eigen::MatrixXd& ll_items,
                                  const Eigen::MatrixXd& hl_items);

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& x);

/// Step-independent terms of one image: W_ll LL + b, W_hl HL + b and the context projections.
struct AttentionItemCache {
  Eigen::MatrixXd ll_pre;  // attn_dim x #LL
  Eigen::MatrixXd hl_pre;  // attn_dim x #HL
  Eigen::MatrixXd ll_ctx;  // context_dim x #LL
  Eigen::MatrixXd hl_ctx;  // context_dim x #HL
};

AttentionItemCache prepare_items(const AttentionParams& params, const Eigen::MatrixXd& ll_items,
                                 const Eigen::MatrixXd& hl_items);

/// Everything the backward pass needs from one forward step.
struct AttentionTrace {
  Eigen::VectorXd h_prev;
  Eigen::MatrixXd ll_act;  // sigmoid activations, attn_dim x #LL
  Eigen::MatrixXd hl_act;
  Eigen::VectorXd alpha;  // softmax(zeta)
  Eigen::VectorXd beta;   // softmax(rho)
  double tau = 0.0;
  AttentionOutput output;
};

/// Fused forward of scores, weights and context. Equivalent to the three
/// functions above composed, with the per-image terms precomputed.
AttentionTrace attention_forward(const AttentionParams& params, const AttentionItemCache& items,
                                 const Eigen::VectorXd& h_prev, TauMode mode);

/// Accumulates parameter gradients into `grad` and returns d(loss)/d(h_prev).
Eigen::VectorXd attention_backward(const AttentionParams& params, const Eigen::MatrixXd& ll_items,
                                   const Eigen::MatrixXd& hl_items, const AttentionItemCache& items,
                                   const AttentionTrace& trace, const Eigen::VectorXd& d_context, TauMode mode,
                                   AttentionParams& grad);

}  // namespace aia
