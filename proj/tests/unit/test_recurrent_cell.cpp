#include "aia/error.hpp"
#include "aia/recurrent_cell.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace aia;

namespace {

Eigen::VectorXd loop_step(const CellParams& p, const Eigen::VectorXd& h, const Eigen::VectorXd& x) {
  const Eigen::Index n = h.size(), m = x.size();
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> z(n), r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sz = 0, sr = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      sz += p.w_z(i, k) * h[k];
      sr += p.w_r(i, k) * h[k];
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      sz += p.w_z(i, n + k) * x[k];
      sr += p.w_r(i, n + k) * x[k];
    }
    z[i] = sig(sz);
    r[i] = sig(sr);
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0;
    for (Eigen::Index k = 0; k < n; ++k) s += p.w(i, k) * r[k] * h[k];
    for (Eigen::Index k = 0; k < m; ++k) s += p.w(i, n + k) * x[k];
    out[i] = (1 - z[i]) * h[i] + z[i] * std::tanh(s);
  }
  return out;
}

}  // namespace

TEST_CASE("update gate closed keeps the previous state") {
  Rng rng(1);
  CellParams p = CellParams::random(4, 3, rng, 0.5);
  p.w_z.setZero();
  // one input component fixed at 1 drives every gate pre-activation to -30
  p.w_z.col(4 + 2).setConstant(-30.0);
  const Eigen::VectorXd h = testing::random_vector(rng, 4);
  Eigen::VectorXd x = testing::random_vector(rng, 3);
  x[2] = 1.0;
  const Eigen::VectorXd next = cell_step(p, h, x);
  // z = sigmoid(-30) ~ 9.4e-14 and |h~ - h| <= 2
  CHECK((next - h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update gate open gives the candidate state") {
  Rng rng(2);
  CellParams p = CellParams::random(4, 3, rng, 0.5);
  p.w_z.setZero();
  p.w_z.col(4 + 2).setConstant(30.0);
  const Eigen::VectorXd h = testing::random_vector(rng, 4);
  Eigen::VectorXd x = testing::random_vector(rng, 3);
  x[2] = 1.0;
  CellTrace trace;
  const Eigen::VectorXd next = cell_step(p, h, x, &trace);
  CHECK((next - trace.h_tilde).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cell step matches a scalar loop") {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(8));
    const int m = 1 + static_cast<int>(rng.below(8));
    const CellParams p = CellParams::random(n, m, rng, 1.0);
    const Eigen::VectorXd h = testing::random_vector(rng, n);
    const Eigen::VectorXd x = testing::random_vector(rng, m, -2, 2);
    CHECK((cell_step(p, h, x) - loop_step(p, h, x)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("cell shapes are checked") {
  const CellParams p = CellParams::zeros(3, 2);
  CHECK(p.hidden_dim() == 3);
  CHECK(p.input_dim() == 2);
  CHECK(cell_step(p, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(2)) == Eigen::VectorXd::Constant(3, 0.5));
  CHECK_THROWS_AS(cell_step(p, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2)), DimensionError);
  CHECK_THROWS_AS(cell_step(p, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)), DimensionError);
}

TEST_CASE("cell gradients match central differences") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    const int m = 1 + static_cast<int>(rng.below(4));
    CellParams p = CellParams::random(n, m, rng, 0.8);
    Eigen::VectorXd h = testing::random_vector(rng, n);
    Eigen::VectorXd x = testing::random_vector(rng, m);
    const Eigen::VectorXd u = testing::random_vector(rng, n);
    auto loss = [&] { return u.dot(cell_step(p, h, x)); };

    CellTrace trace;
    cell_step(p, h, x, &trace);
    CellParams grad = CellParams::zeros(n, m);
    Eigen::VectorXd d_h, d_x;
    cell_backward(p, h, trace, u, grad, d_h, d_x);

    const double eps = 1e-6;
    auto probe = [&](double& slot, double analytic) {
      const double keep = slot;
      slot = keep + eps;
      const double up = loss();
      slot = keep - eps;
      const double down = loss();
      slot = keep;
      const double numeric = (up - down) / (2 * eps);
      CHECK(std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-7}) < 1e-4);
    };
    for (Eigen::Index k = 0; k < p.w_z.size(); ++k) probe(p.w_z.data()[k], grad.w_z.data()[k]);
    for (Eigen::Index k = 0; k < p.w_r.size(); ++k) probe(p.w_r.data()[k], grad.w_r.data()[k]);
    for (Eigen::Index k = 0; k < p.w.size(); ++k) probe(p.w.data()[k], grad.w.data()[k]);
    for (Eigen::Index k = 0; k < n; ++k) probe(h[k], d_h[k]);
    for (Eigen::Index k = 0; k < m; ++k) probe(x[k], d_x[k]);
  }
}
