#pragma once

#include "aia/rng.hpp"

#include <Eigen/Core>

namespace aia {

/// Gated recurrent cell over the concatenation [h_{t-1}, x_t]:
///   z  = sigmoid(w_z [h, x])
///   r  = sigmoid(w_r [h, x])
///   h~ = tanh(w [r * h, x])
///   h' = (1 - z) * h + z * h~
/// No bias terms.
struct CellParams {
  Eigen::MatrixXd w_z;  // hidden x (hidden + input)
  Eigen::MatrixXd w_r;
  Eigen::MatrixXd w;

  static CellParams zeros(int hidden_dim, int input_dim);
  static CellParams random(int hidden_dim, int input_dim, Rng& rng, double scale = 0.08);

  int hidden_dim() const { return static_cast<int>(w.rows()); }
  int input_dim() const { return static_cast<int>(w.cols()) - hidden_dim(); }
};

struct CellTrace {
  Eigen::VectorXd v;   // [h, x]
  Eigen::VectorXd v2;  // [r * h, x]
  Eigen::VectorXd z;
  Eigen::VectorXd r;
  Eigen::VectorXd h_tilde;
  Eigen::VectorXd h_next;
};

/// Throws DimensionError on shape mismatch.
Eigen::VectorXd cell_step(const CellParams& params, const Eigen::VectorXd& h_prev, const Eigen::VectorXd& x,
                          CellTrace* trace = nullptr);

/// Backward through one step. Accumulates into grad; writes d/dh_prev and d/dx.
void cell_backward(const CellParams& params, const Eigen::VectorXd& h_prev, const CellTrace& trace,
                   const Eigen::VectorXd& d_h_next, CellParams& grad, Eigen::VectorXd& d_h_prev,
                   Eigen::VectorXd& d_x);

}  // namespace aia
