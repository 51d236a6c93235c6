#pragma once

// Standard conic form of a continuous MicpProblem after fixed-variable
// elimination:
//
//   minimize   1/2 x'Px + q'x + q0
//   subject to A x = b
//              G x + s = h,  s in R+^m_lin x (Q^3)^n_soc
//
// Each quadratic bound u >= (c.x + d)^2 becomes the 3-dimensional cone
// (u + 1, u - 1, 2(c.x + d)) in Q^3.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "locomip/micp.hpp"

namespace locomip {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct ConicForm {
  int n = 0;
  SparseMatrix P;  // full symmetric
  Eigen::VectorXd q;
  double q0 = 0.0;
  SparseMatrix A;
  Eigen::VectorXd b;
  SparseMatrix G;  // orthant rows first, then 3 rows per cone
  Eigen::VectorXd h;
  int n_orthant = 0;
  int n_soc = 0;

  // original index -> reduced index, or -1 when fixed to fixed_value.
  std::vector<int> reduced_index;
  std::vector<double> fixed_value;

  bool trivially_infeasible = false;
  std::string infeasible_reason;

  int n_original() const { return static_cast<int>(reduced_index.size()); }
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
  Eigen::VectorXd reduce(std::span<const double> original) const;
};

/// Throws ModelError if the problem still has free binary variables.
ConicForm build_conic_form(const MicpProblem& problem,
                           double fixed_tol = 1e-12);

}  // namespace locomip
