#include "aia/recurrent_cell.hpp"

#include "aia/error.hpp"

#include <cmath>

namespace aia {

namespace {

Eigen::MatrixXd uniform_matrix(int rows, int cols, Rng& rng, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-scale, scale);
  }
  return m;
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

CellParams CellParams::zeros(int hidden_dim, int input_dim) {
  const int cols = hidden_dim + input_dim;
  return {Eigen::MatrixXd::Zero(hidden_dim, cols), Eigen::MatrixXd::Zero(hidden_dim, cols),
          Eigen::MatrixXd::Zero(hidden_dim, cols)};
}

CellParams CellParams::random(int hidden_dim, int input_dim, Rng& rng, double scale) {
  const int cols = hidden_dim + input_dim;
  CellParams p;
  p.w_z = uniform_matrix(hidden_dim, cols, rng, scale);
  p.w_r = uniform_matrix(hidden_dim, cols, rng, scale);
  p.w = uniform_matrix(hidden_dim, cols, rng, scale);
  return p;
}

Eigen::VectorXd cell_step(const CellParams& params, const Eigen::VectorXd& h_prev, const Eigen::VectorXd& x,
                          CellTrace* trace) {
  const int n = params.hidden_dim();
  if (h_prev.size() != n || x.size() != params.input_dim()) {
    throw DimensionError("cell_step: expected hidden " + std::to_string(n) + " and input " +
                         std::to_string(params.input_dim()) + ", got " + std::to_string(h_prev.size()) + " and " +
                         std::to_string(x.size()));
  }
  CellTrace local;
  CellTrace& t = trace ? *trace : local;
  t.v.resize(n + x.size());
  t.v << h_prev, x;
  t.z = sigmoid(params.w_z * t.v);
  t.r = sigmoid(params.w_r * t.v);
  t.v2.resize(t.v.size());
  t.v2 << t.r.cwiseProduct(h_prev), x;
  t.h_tilde = (params.w * t.v2).array().tanh().matrix();
  t.h_next = h_prev + t.z.cwiseProduct(t.h_tilde - h_prev);
  return t.h_next;
}

void cell_backward(const CellParams& params, const Eigen::VectorXd& h_prev, const CellTrace& t,
                   const Eigen::VectorXd& d_h_next, CellParams& grad, Eigen::VectorXd& d_h_prev,
                   Eigen::VectorXd& d_x) {
  const int n = params.hidden_dim();
  const Eigen::ArrayXd z = t.z.array(), r = t.r.array(), ht = t.h_tilde.array(), dh = d_h_next.array();

  const Eigen::VectorXd d_pre_tilde = (dh * z * (1.0 - ht * ht)).matrix();
  const Eigen::VectorXd d_pre_z = (dh * (ht - h_prev.array()) * z * (1.0 - z)).matrix();

  grad.w.noalias() += d_pre_tilde * t.v2.transpose();
  grad.w_z.noalias() += d_pre_z * t.v.transpose();

  const Eigen::VectorXd d_v2 = params.w.transpose() * d_pre_tilde;
  const Eigen::ArrayXd d_rh = d_v2.head(n).array();
  const Eigen::VectorXd d_pre_r = (d_rh * h_prev.array() * r * (1.0 - r)).matrix();
  grad.w_r.noalias() += d_pre_r * t.v.transpose();

  const Eigen::VectorXd d_v = params.w_z.transpose() * d_pre_z + params.w_r.transpose() * d_pre_r;

  d_h_prev = (dh * (1.0 - z) + d_rh * r).matrix() + d_v.head(n);
  d_x = d_v2.tail(params.input_dim()) + d_v.tail(params.input_dim());
}

}  // namespace aia
