#pragma once

// LDL' factorization of quasi-definite matrices with dynamic pivot
// regularization: a pivot whose sign disagrees with the expected sign, or
// whose magnitude falls below eps, is replaced by sign * delta.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace locomip::detail {

struct PivotRegularization {
  double eps = 1e-13;
  double delta = 1e-7;
};

/// Up-looking sparse LDL' with a fill-reducing AMD ordering computed once.
class SparseLdl {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

  /// pattern: full symmetric matrix (both triangles).
  void analyze(const Matrix& pattern);
  /// Returns the number of regularized pivots.
  int factor(const Matrix& full, const Eigen::VectorXi& signs,
             const PivotRegularization& reg);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  int n_ = 0;
  std::vector<int> perm_, pinv_, parent_, lnz_, lp_;
  std::vector<int> li_;
  std::vector<double> lx_, d_;
  mutable std::vector<double> work_;
};

/// Dense LDL' in the natural order, same regularization rule.
class DenseLdl {
 public:
  int factor(const Eigen::MatrixXd& full, const Eigen::VectorXi& signs,
             const PivotRegularization& reg);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  Eigen::MatrixXd l_;
  Eigen::VectorXd d_;
};

}  // namespace locomip::detail
