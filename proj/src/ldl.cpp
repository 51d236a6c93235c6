#include "ldl.hpp"

#include <Eigen/OrderingMethods>
#include <cmath>

namespace locomip::detail {
namespace {

double regularize(double d, int sign, const PivotRegularization& reg) {
  return sign * d < reg.eps ? sign * reg.delta : d;
}

}  // namespace

void SparseLdl::analyze(const Matrix& pattern) {
  n_ = static_cast<int>(pattern.rows());
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> order;
  Eigen::AMDOrdering<int> amd;
  amd(pattern, order);
  perm_.assign(order.indices().data(), order.indices().data() + n_);
  pinv_.assign(n_, 0);
  for (int k = 0; k < n_; ++k) pinv_[perm_[k]] = k;

  // Elimination tree and column counts of L.
  parent_.assign(n_, -1);
  lnz_.assign(n_, 0);
  std::vector<int> flag(n_);
  for (int k = 0; k < n_; ++k) {
    flag[k] = k;
    const int kk = perm_[k];
    for (Matrix::InnerIterator it(pattern, kk); it; ++it) {
      for (int i = pinv_[it.row()]; i < k && flag[i] != k; i = parent_[i]) {
        if (parent_[i] == -1) parent_[i] = k;
        ++lnz_[i];
        flag[i] = k;
      }
    }
  }
  lp_.assign(n_ + 1, 0);
  for (int k = 0; k < n_; ++k) lp_[k + 1] = lp_[k] + lnz_[k];
  li_.assign(lp_[n_], 0);
  lx_.assign(lp_[n_], 0.0);
  d_.assign(n_, 0.0);
  work_.assign(n_, 0.0);
}

int SparseLdl::factor(const Matrix& full, const Eigen::VectorXi& signs,
                      const PivotRegularization& reg) {
  std::vector<double> y(n_, 0.0);
  std::vector<int> pattern(n_), flag(n_);
  int regularized = 0;
  for (int k = 0; k < n_; ++k) {
    int top = n_;
    flag[k] = k;
    lnz_[k] = 0;
    const int kk = perm_[k];
    for (Matrix::InnerIterator it(full, kk); it; ++it) {
      int i = pinv_[it.row()];
      if (i > k) continue;
      y[i] += it.value();
      int len = 0;
      for (; flag[i] != k; i = parent_[i]) {
        pattern[len++] = i;
        flag[i] = k;
      }
      while (len > 0) pattern[--top] = pattern[--len];
    }
    double dk = y[k];
    y[k] = 0.0;
    for (; top < n_; ++top) {
      const int i = pattern[top];
      const double yi = y[i];
      y[i] = 0.0;
      const int p2 = lp_[i] + lnz_[i];
      for (int p = lp_[i]; p < p2; ++p) y[li_[p]] -= lx_[p] * yi;
      const double lki = yi / d_[i];
      dk -= lki * yi;
      li_[p2] = k;
      lx_[p2] = lki;
      ++lnz_[i];
    }
    const double dr = regularize(dk, signs[kk], reg);
    if (dr != dk) ++regularized;
    d_[k] = dr;
  }
  return regularized;
}

Eigen::VectorXd SparseLdl::solve(const Eigen::VectorXd& b) const {
  std::vector<double>& x = work_;
  for (int k = 0; k < n_; ++k) x[k] = b[perm_[k]];
  for (int j = 0; j < n_; ++j) {
    const double xj = x[j];
    for (int p = lp_[j]; p < lp_[j + 1]; ++p) x[li_[p]] -= lx_[p] * xj;
  }
  for (int j = 0; j < n_; ++j) x[j] /= d_[j];
  for (int j = n_ - 1; j >= 0; --j) {
    double xj = x[j];
    for (int p = lp_[j]; p < lp_[j + 1]; ++p) xj -= lx_[p] * x[li_[p]];
    x[j] = xj;
  }
  Eigen::VectorXd out(n_);
  for (int k = 0; k < n_; ++k) out[perm_[k]] = x[k];
  return out;
}

int DenseLdl::factor(const Eigen::MatrixXd& full, const Eigen::VectorXi& signs,
                     const PivotRegularization& reg) {
  const int n = static_cast<int>(full.rows());
  l_ = full;
  d_.resize(n);
  int regularized = 0;
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) {
    const int below = n - j - 1;
    w.head(j) = l_.row(j).head(j).transpose().cwiseProduct(d_.head(j));
    const double dj = l_(j, j) - l_.row(j).head(j).dot(w.head(j));
    const double dr = regularize(dj, signs[j], reg);
    if (dr != dj) ++regularized;
    d_[j] = dr;
    l_(j, j) = 1.0;
    if (below > 0) {
      l_.col(j).tail(below).noalias() -= l_.bottomLeftCorner(below, j) * w.head(j);
      l_.col(j).tail(below) /= dr;
    }
  }
  return regularized;
}

Eigen::VectorXd DenseLdl::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x =
      l_.triangularView<Eigen::UnitLower>().solve(b);
  x.array() /= d_.array();
  return l_.transpose().triangularView<Eigen::UnitUpper>().solve(x);
}

}  // namespace locomip::detail
