#pragma once

// Whole-body trunk controller on caller-supplied dynamics matrices: a
// virtual model producing reference accelerations, a tracking QP over
// generalized accelerations and contact forces, and the torque mapping.
//
// Decision vector x = [qdd (6 + n); lambda (3 n_l)]. qdd[0:3] is the base
// linear acceleration, qdd[3:6] the base angular acceleration and the rest
// are joint accelerations.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace locomip {

/// Rotation vector (axis * angle, angle in [0, pi]) of a rotation matrix.
Eigen::Vector3d rotation_log(const Eigen::Matrix3d& R);
Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& w);

struct VirtualModelGains {
  Eigen::Vector3d K_r = Eigen::Vector3d::Constant(100.0);
  Eigen::Vector3d D_r = Eigen::Vector3d::Constant(20.0);
  Eigen::Vector3d K_theta = Eigen::Vector3d::Constant(100.0);
  Eigen::Vector3d D_theta = Eigen::Vector3d::Constant(20.0);

  /// Throws InputError unless every diagonal entry is positive.
  void validate() const;
};

struct TrunkTarget {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Vector3d rd = Eigen::Vector3d::Zero();
  Eigen::Vector3d rdd = Eigen::Vector3d::Zero();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega_dot = Eigen::Vector3d::Zero();
};

struct TrunkMeasurement {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Vector3d rd = Eigen::Vector3d::Zero();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
};

struct ReferenceAccelerations {
  Eigen::Vector3d com;      // reference CoM acceleration
  Eigen::Vector3d angular;  // reference base angular acceleration
};

ReferenceAccelerations virtual_model(const TrunkTarget& desired,
                                     const TrunkMeasurement& actual,
                                     const VirtualModelGains& gains);

struct WholeBodyState {
  TrunkMeasurement trunk;
  Eigen::VectorXd q, qd;          // n joints
  std::vector<bool> stance;       // per leg
  double mass = 1.0;
  Eigen::Vector3d gravity = Eigen::Vector3d(0, 0, -9.81);

  Eigen::MatrixXd M_bj;   // 6 x n base/joint inertia coupling
  Eigen::MatrixXd M_j;    // n x n
  Eigen::VectorXd h_j;    // n
  Eigen::MatrixXd J_c;    // 3 n_l x (6 + n); joint block J_cj = rightCols(n)
  Eigen::VectorXd Jdot_qdot;  // 3 n_l, zero if empty

  // Optional floating-base rows [M_bb M_bj] qdd + h_b = J_cb' lambda. Both
  // empty skips dynamic consistency.
  Eigen::MatrixXd M_b;    // 6 x (6 + n)
  Eigen::VectorXd h_b;    // 6

  int n_joints() const { return static_cast<int>(q.size()); }
  int n_legs() const { return static_cast<int>(stance.size()); }
  /// Throws InputError on inconsistent shapes or a non-orthonormal R.
  void validate() const;
};

struct TrackingWeights {
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(6, 6);  // 6 x 6, PSD
  Eigen::MatrixXd W;  // (6 + n + 3 n_l) square, PSD; empty means 1e-6 I
};

struct ContactLimits {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double mu = 0.7;
  double min_normal = 0.0;
  /// A foot with max_normal <= 0 is held at lambda = 0.
  double max_normal = 1e4;
};

struct TrackingLimits {
  std::vector<ContactLimits> contacts;  // per leg; empty means no friction rows
  Eigen::VectorXd tau_max;              // n, empty disables torque rows
  Eigen::VectorXd qdd_min, qdd_max;     // n joint acceleration bounds, optional
  /// Swing-foot acceleration targets, 3 n_l (rows of stance legs unused).
  Eigen::VectorXd swing_acc;
  /// Strict inequalities are closed by this inward margin.
  double strict_margin = 1e-9;
};

enum class QpStatus { kOptimal, kInfeasible, kFailed };
const char* to_string(QpStatus s);

struct TrackingSolution {
  QpStatus status = QpStatus::kFailed;
  Eigen::VectorXd x;
  Eigen::VectorXd qdd, lambda;
  Eigen::VectorXd eq_multipliers, ineq_multipliers;  // ineq: >= 0 in C x >= d form
  double objective = 0.0;
  double kkt_residual = 0.0;
  double eq_residual = 0.0;
  int iterations = 0;
};

/// Dense convex QP  min 1/2 x'Hx + f'x  s.t.  A x = b,  lo <= C x <= hi.
/// Infinite bounds are allowed.
struct DenseQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd C;
  Eigen::VectorXd lo, hi;
};

TrackingSolution solve_dense_qp(const DenseQp& qp);

/// Assembles the tracking QP without solving it.
DenseQp build_tracking_qp(const WholeBodyState& state, const ReferenceAccelerations& refs,
                          const TrackingWeights& weights, const TrackingLimits& limits);

TrackingSolution solve_tracking_qp(const WholeBodyState& state,
                                   const ReferenceAccelerations& refs,
                                   const TrackingWeights& weights,
                                   const TrackingLimits& limits);

/// [M_bj' M_j] qdd + h_j - J_cj' lambda. Throws InputError on shape mismatch.
Eigen::VectorXd feedforward_torques(const Eigen::VectorXd& x, const WholeBodyState& state);

/// tau_ff + Kp (q_des - q) + Kd (qd_des - qd).
Eigen::VectorXd total_command(const Eigen::VectorXd& tau_ff, const Eigen::VectorXd& q_des,
                              const Eigen::VectorXd& qd_des, const Eigen::VectorXd& Kp,
                              const Eigen::VectorXd& Kd, const WholeBodyState& state);

}  // namespace locomip
