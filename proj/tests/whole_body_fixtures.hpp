#pragma once

// Synthetic whole-body states and a dense KKT oracle for trunk QP checks.

#include <Eigen/Dense>
#include <random>

#include "locomip/trunk_qp.hpp"

namespace testing_fixtures {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using locomip::DenseQp;
using locomip::WholeBodyState;

// Quadruped-sized synthetic whole-body state: n = 12 joints, 4 legs.
inline WholeBodyState synthetic_state(std::mt19937& rng, double mass = 85.0) {
  std::normal_distribution<double> N(0.0, 1.0);
  WholeBodyState s;
  const int n = 12, nl = 4;
  s.mass = mass;
  s.q = VectorXd::Zero(n);
  s.qd = VectorXd::Zero(n);
  s.stance.assign(nl, true);
  s.M_bj = MatrixXd::NullaryExpr(6, n, [&] { return 0.1 * N(rng); });
  MatrixXd B = MatrixXd::NullaryExpr(n, n, [&] { return N(rng); });
  s.M_j = B * B.transpose() + MatrixXd::Identity(n, n);
  s.h_j = VectorXd::NullaryExpr(n, [&] { return 5.0 * N(rng); });
  s.J_c = MatrixXd::Zero(3 * nl, 6 + n);
  for (int l = 0; l < nl; ++l) {
    s.J_c.block<3, 3>(3 * l, 0) = Matrix3d::Identity();
    s.J_c.block<3, 3>(3 * l, 6 + 3 * l) = Matrix3d::NullaryExpr([&] { return N(rng); });
  }
  return s;
}

// Independent equality-constrained least-squares solution via the full KKT.
inline VectorXd kkt_oracle(const DenseQp& qp) {
  const int n = static_cast<int>(qp.H.rows());
  const int m = static_cast<int>(qp.A.rows());
  MatrixXd K = MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = qp.H;
  K.topRightCorner(n, m) = qp.A.transpose();
  K.bottomLeftCorner(m, n) = qp.A;
  VectorXd rhs(n + m);
  rhs << -qp.f, qp.b;
  return K.fullPivLu().solve(rhs).head(n);
}

}  // namespace testing_fixtures
