#pragma once

// Primal-dual interior-point method on the homogeneous self-dual embedding of
//
//   min 1/2 x'Px + q'x  s.t.  Ax = b,  Gx + s = h,  s in R+^m x (Q^3)^k
//
// Nesterov-Todd scaling, Mehrotra predictor-corrector, quasi-definite KKT
// factorization with static regularization and iterative refinement.

#include <Eigen/Dense>
#include <optional>

#include "locomip/conic_form.hpp"

namespace locomip {

enum class ConvexStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter };

const char* to_string(ConvexStatus s);

enum class KktBackend { kSparseLdlt, kDenseLdlt };

struct IpmSettings {
  double tol_feas = 1e-9;
  double tol_gap_abs = 1e-9;
  double tol_gap_rel = 1e-9;
  /// Accepted for the best iterate when progress stalls.
  double tol_reduced = 1e-8;
  double tol_infeas = 1e-8;
  /// Accepted for the best certificate when progress stalls.
  double tol_infeas_reduced = 1e-7;
  int max_iter = 200;
  double static_reg = 1e-9;
  int refine_steps = 6;
  double step_fraction = 0.99;
  KktBackend kkt = KktBackend::kSparseLdlt;
};

struct IpmResult {
  ConvexStatus status = ConvexStatus::kMaxIter;
  Eigen::VectorXd x, y, z, s;  // reduced space, unscaled by tau
  double objective = 0.0;       // includes q0
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double certificate_norm = 0.0;
  int iterations = 0;
};

IpmResult solve_ipm(const ConicForm& problem, const IpmSettings& settings,
                    const Eigen::VectorXd* warm_x = nullptr);

namespace detail {

/// Nesterov-Todd scaling of one 3-dimensional second-order cone.
struct SocScaling {
  Eigen::Matrix3d W;
  Eigen::Matrix3d W_inv;
  Eigen::Vector3d lambda;
};

SocScaling soc_nt_scaling(const Eigen::Vector3d& s, const Eigen::Vector3d& z);
double soc_max_step(const Eigen::Vector3d& v, const Eigen::Vector3d& dv);

}  // namespace detail

}  // namespace locomip
