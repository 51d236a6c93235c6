#include "locomip/trunk_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "locomip/convex_solver.hpp"
#include "locomip/errors.hpp"

namespace locomip {
namespace {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector3d vee_skew(const Matrix3d& R) {
  return 0.5 * Vector3d(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
}

Matrix3d hat(const Vector3d& w) {
  Matrix3d K;
  K << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return K;
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw InputError("trunk_qp: shape mismatch in " + what);
}

// One-sided row c x >= d.
struct Row {
  VectorXd c;
  double d;
};

struct EqpResult {
  VectorXd x;
  VectorXd nu;  // multipliers of the stacked equality rows
  double residual = 0.0;
};

// Solves [H E'; E 0] [x; -nu] = [-f; e] with a rank-revealing factorization.
EqpResult solve_eqp(const MatrixXd& H, const VectorXd& f, const MatrixXd& E,
                    const VectorXd& e) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(E.rows());
  MatrixXd K = MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, m) = E.transpose();
  K.bottomLeftCorner(m, n) = E;
  VectorXd rhs(n + m);
  rhs << -f, e;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(K);
  VectorXd sol = cod.solve(rhs);
  // One refinement pass.
  sol += cod.solve(rhs - K * sol);
  EqpResult out;
  out.x = sol.head(n);
  out.nu = -sol.tail(m);
  out.residual = (K * sol - rhs).lpNorm<Eigen::Infinity>();
  return out;
}

MatrixXd stack_rows(const MatrixXd& A, const std::vector<Row>& rows,
                    const std::vector<int>& work, int n) {
  MatrixXd E(A.rows() + static_cast<int>(work.size()), n);
  E.topRows(A.rows()) = A;
  for (size_t k = 0; k < work.size(); ++k) E.row(A.rows() + k) = rows[work[k]].c.transpose();
  return E;
}

VectorXd stack_rhs(const VectorXd& b, const std::vector<Row>& rows,
                   const std::vector<int>& work) {
  VectorXd e(b.size() + static_cast<int>(work.size()));
  e.head(b.size()) = b;
  for (size_t k = 0; k < work.size(); ++k) e[b.size() + k] = rows[work[k]].d;
  return e;
}

int matrix_rank(const MatrixXd& M) {
  if (M.rows() == 0) return 0;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

// Feasible starting point from the conic interior-point solver.
ConvexSolution interior_start(const DenseQp& qp, const std::vector<Row>& rows) {
  const int n = static_cast<int>(qp.H.rows());
  MicpProblem p;
  std::vector<VarId> v(n);
  for (int i = 0; i < n; ++i) v[i] = p.add_continuous("x" + std::to_string(i), -kInf, kInf);
  auto expr_of = [&](const VectorXd& c) {
    LinExpr e;
    for (int i = 0; i < n; ++i) e.add(v[i], c[i]);
    return e;
  };
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (qp.H + qp.H.transpose()));
  const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  for (int k = 0; k < n; ++k) {
    const double s = eig.eigenvalues()[k];
    if (s > 1e-14 * top) p.add_squared_cost(0.5 * s, expr_of(eig.eigenvectors().col(k)));
  }
  p.add_linear_cost(expr_of(qp.f));
  for (int i = 0; i < qp.A.rows(); ++i) {
    p.add_constraint(expr_of(qp.A.row(i).transpose()), Sense::kEqual, qp.b[i]);
  }
  for (const Row& r : rows) p.add_constraint(expr_of(r.c), Sense::kGreaterEqual, r.d);
  return solve_convex(p, nullptr, "dense");
}

}  // namespace

Vector3d rotation_log(const Matrix3d& R) {
  const double cos_t = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_t);
  const Vector3d v = vee_skew(R);
  if (theta < 1e-6) return v * (1.0 + theta * theta / 6.0);
  if (theta < 2.5) return v * (theta / std::sin(theta));
  // Near pi: recover the axis from the symmetric part, sign from the skew part.
  const Matrix3d aat = (0.5 * (R + R.transpose()) - cos_t * Matrix3d::Identity()) / (1.0 - cos_t);
  int k = 0;
  aat.diagonal().maxCoeff(&k);
  Vector3d axis = aat.col(k) / std::sqrt(std::max(aat(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(v) < 0) axis = -axis;
  return theta * axis;
}

Matrix3d rotation_exp(const Vector3d& w) {
  const double theta = w.norm();
  const Matrix3d K = hat(w);
  double a, b;
  if (theta < 1e-6) {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Matrix3d::Identity() + a * K + b * K * K;
}

void VirtualModelGains::validate() const {
  for (const Vector3d* g : {&K_r, &D_r, &K_theta, &D_theta}) {
    if (!((g->array() > 0).all())) throw InputError("virtual model gains must be positive");
  }
}

ReferenceAccelerations virtual_model(const TrunkTarget& desired,
                                     const TrunkMeasurement& actual,
                                     const VirtualModelGains& gains) {
  gains.validate();
  ReferenceAccelerations out;
  out.com = desired.rdd + gains.K_r.cwiseProduct(desired.r - actual.r) +
            gains.D_r.cwiseProduct(desired.rd - actual.rd);
  out.angular = desired.omega_dot +
                gains.K_theta.cwiseProduct(rotation_log(desired.R * actual.R.transpose())) +
                gains.D_theta.cwiseProduct(desired.omega - actual.omega);
  return out;
}

void WholeBodyState::validate() const {
  const int n = n_joints();
  const int nl = n_legs();
  require_shape(qd.size() == n, "qd");
  require_shape(M_bj.rows() == 6 && M_bj.cols() == n, "M_bj");
  require_shape(M_j.rows() == n && M_j.cols() == n, "M_j");
  require_shape(h_j.size() == n, "h_j");
  require_shape(J_c.rows() == 3 * nl && J_c.cols() == 6 + n, "J_c");
  require_shape(Jdot_qdot.size() == 0 || Jdot_qdot.size() == 3 * nl, "Jdot_qdot");
  const bool has_base = M_b.size() > 0 || h_b.size() > 0;
  require_shape(!has_base || (M_b.rows() == 6 && M_b.cols() == 6 + n && h_b.size() == 6),
                "M_b/h_b");
  if (!(mass > 0)) throw InputError("trunk_qp: mass must be positive");
  const double orth =
      (trunk.R.transpose() * trunk.R - Matrix3d::Identity()).lpNorm<Eigen::Infinity>();
  if (orth > 1e-9) throw InputError("trunk_qp: trunk rotation is not orthonormal");
}

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kFailed: return "failed";
  }
  return "?";
}

TrackingSolution solve_dense_qp(const DenseQp& qp) {
  const int n = static_cast<int>(qp.H.rows());
  require_shape(qp.H.cols() == n && qp.f.size() == n, "H/f");
  require_shape(qp.A.size() == 0 || (qp.A.cols() == n && qp.A.rows() == qp.b.size()), "A/b");
  require_shape(qp.C.size() == 0 ||
                    (qp.C.cols() == n && qp.C.rows() == qp.lo.size() && qp.C.rows() == qp.hi.size()),
                "C/lo/hi");

  MatrixXd A = qp.A.size() ? qp.A : MatrixXd(0, n);
  VectorXd b = qp.A.size() ? qp.b : VectorXd(0);
  std::vector<Row> rows;
  std::vector<int> row_source;  // signed C row, +i+1 lower, -(i+1) upper
  std::vector<std::pair<VectorXd, double>> extra_eq;
  for (int i = 0; i < qp.C.rows(); ++i) {
    const VectorXd c = qp.C.row(i).transpose();
    if (std::isfinite(qp.lo[i]) && qp.lo[i] == qp.hi[i]) {
      extra_eq.emplace_back(c, qp.lo[i]);
      continue;
    }
    if (std::isfinite(qp.lo[i])) {
      rows.push_back({c, qp.lo[i]});
      row_source.push_back(i + 1);
    }
    if (std::isfinite(qp.hi[i])) {
      rows.push_back({-c, -qp.hi[i]});
      row_source.push_back(-(i + 1));
    }
  }
  if (!extra_eq.empty()) {
    const int p0 = static_cast<int>(A.rows());
    A.conservativeResize(p0 + static_cast<int>(extra_eq.size()), n);
    b.conservativeResize(A.rows());
    for (size_t k = 0; k < extra_eq.size(); ++k) {
      A.row(p0 + k) = extra_eq[k].first.transpose();
      b[p0 + k] = extra_eq[k].second;
    }
  }
  const MatrixXd H = 0.5 * (qp.H + qp.H.transpose());
  const double scale = std::max({1.0, H.lpNorm<Eigen::Infinity>(), qp.f.lpNorm<Eigen::Infinity>()});

  TrackingSolution out;
  VectorXd x;
  std::vector<int> work;
  if (rows.empty()) {
    x = VectorXd::Zero(n);
  } else {
    ConvexSolution start = interior_start(qp, rows);
    if (start.status == ConvexStatus::kInfeasible) {
      out.status = QpStatus::kInfeasible;
      return out;
    }
    // The active-set phase only needs a feasible point.
    if (start.status != ConvexStatus::kOptimal && !(start.primal_residual <= 1e-6)) return out;
    x = Eigen::Map<const VectorXd>(start.x.data(), n);
    // Working set: active rows, kept linearly independent of the equalities.
    std::vector<int> order(rows.size());
    for (size_t j = 0; j < rows.size(); ++j) order[j] = static_cast<int>(j);
    auto slack = [&](int j) { return rows[j].c.dot(x) - rows[j].d; };
    std::sort(order.begin(), order.end(), [&](int a, int c) { return slack(a) < slack(c); });
    int rank = matrix_rank(A);
    for (int j : order) {
      if (slack(j) > 1e-7 * (1.0 + std::abs(rows[j].d))) break;
      work.push_back(j);
      const int r = matrix_rank(stack_rows(A, rows, work, n));
      if (r > rank) {
        rank = r;
      } else {
        work.pop_back();
      }
    }
  }

  // Primal active set from the interior start.
  const int max_iter = 50 * (n + static_cast<int>(rows.size()) + 1);
  EqpResult eqp;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    eqp = solve_eqp(H, qp.f, stack_rows(A, rows, work, n), stack_rhs(b, rows, work));
    if (eqp.residual > 1e-6 * scale * std::max(1.0, eqp.x.lpNorm<Eigen::Infinity>())) {
      // Inconsistent equalities.
      out.status = rows.empty() ? QpStatus::kInfeasible : QpStatus::kFailed;
      return out;
    }
    if (rows.empty()) {
      x = eqp.x;
      converged = true;
      break;
    }
    const VectorXd step = eqp.x - x;
    if (step.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      x = eqp.x;
      int worst = -1;
      double worst_mu = -1e-10 * scale;
      for (size_t k = 0; k < work.size(); ++k) {
        const double mu = eqp.nu[A.rows() + k];
        if (mu < worst_mu) {
          worst_mu = mu;
          worst = static_cast<int>(k);
        }
      }
      if (worst < 0) {
        converged = true;
        break;
      }
      work.erase(work.begin() + worst);
      continue;
    }
    double t = 1.0;
    int block = -1;
    for (size_t j = 0; j < rows.size(); ++j) {
      if (std::find(work.begin(), work.end(), static_cast<int>(j)) != work.end()) continue;
      const double cp = rows[j].c.dot(step);
      if (cp >= -1e-14 * rows[j].c.lpNorm<Eigen::Infinity>() * step.lpNorm<Eigen::Infinity>()) {
        continue;
      }
      const double tj = std::max(0.0, rows[j].c.dot(x) - rows[j].d) / -cp;
      if (tj < t) {
        t = tj;
        block = static_cast<int>(j);
      }
    }
    x += t * step;
    if (block >= 0) work.push_back(block);
  }
  if (!converged) return out;

  out.x = x;
  out.eq_multipliers = eqp.nu.head(qp.A.rows());
  out.ineq_multipliers = VectorXd::Zero(qp.C.rows());
  VectorXd grad = H * x + qp.f - A.transpose() * eqp.nu.head(A.rows());
  for (size_t k = 0; k < work.size(); ++k) {
    const double mu = eqp.nu[A.rows() + k];
    grad -= mu * rows[work[k]].c;
    const int src = row_source[work[k]];
    out.ineq_multipliers[std::abs(src) - 1] += src > 0 ? mu : -mu;
  }
  double kkt = grad.lpNorm<Eigen::Infinity>();
  out.eq_residual = A.rows() ? (A * x - b).lpNorm<Eigen::Infinity>() : 0.0;
  kkt = std::max(kkt, out.eq_residual);
  for (const Row& r : rows) kkt = std::max(kkt, r.d - r.c.dot(x));
  for (size_t k = 0; k < work.size(); ++k) kkt = std::max(kkt, -eqp.nu[A.rows() + k]);
  out.kkt_residual = kkt;
  out.objective = 0.5 * x.dot(H * x) + qp.f.dot(x);
  out.status = QpStatus::kOptimal;
  return out;
}

DenseQp build_tracking_qp(const WholeBodyState& state, const ReferenceAccelerations& refs,
                          const TrackingWeights& weights, const TrackingLimits& limits) {
  state.validate();
  const int n = state.n_joints();
  const int nl = state.n_legs();
  const int nq = 6 + n;
  const int nx = nq + 3 * nl;
  require_shape(weights.S.rows() == 6 && weights.S.cols() == 6, "S");
  require_shape(weights.W.size() == 0 || (weights.W.rows() == nx && weights.W.cols() == nx), "W");
  require_shape(limits.contacts.empty() || static_cast<int>(limits.contacts.size()) == nl,
                "contact limits");
  require_shape(limits.tau_max.size() == 0 || limits.tau_max.size() == n, "tau_max");
  require_shape(limits.qdd_min.size() == 0 || limits.qdd_min.size() == n, "qdd_min");
  require_shape(limits.qdd_max.size() == 0 || limits.qdd_max.size() == n, "qdd_max");
  require_shape(limits.swing_acc.size() == 0 || limits.swing_acc.size() == 3 * nl, "swing_acc");

  // Tracking rows: CoM acceleration from forces, angular acceleration from qdd.
  MatrixXd G = MatrixXd::Zero(6, nx);
  for (int l = 0; l < nl; ++l) G.block<3, 3>(0, nq + 3 * l) = Matrix3d::Identity() / state.mass;
  G.block<3, 3>(3, 3) = Matrix3d::Identity();
  VectorXd g0(6);
  g0 << refs.com - state.gravity, refs.angular;

  const MatrixXd W = weights.W.size() ? weights.W : MatrixXd(1e-6 * MatrixXd::Identity(nx, nx));
  DenseQp qp;
  qp.H = 2.0 * (G.transpose() * weights.S * G + W);
  qp.f = -2.0 * G.transpose() * weights.S * g0;

  std::vector<VectorXd> eq_rows;
  std::vector<double> eq_rhs;
  auto add_eq = [&](const VectorXd& row, double rhs) {
    eq_rows.push_back(row);
    eq_rhs.push_back(rhs);
  };
  const VectorXd Jdq = state.Jdot_qdot.size() ? state.Jdot_qdot : VectorXd(VectorXd::Zero(3 * nl));
  if (state.M_b.size()) {
    for (int i = 0; i < 6; ++i) {
      VectorXd row = VectorXd::Zero(nx);
      row.head(nq) = state.M_b.row(i).transpose();
      row.tail(3 * nl) = -state.J_c.col(i);
      add_eq(row, -state.h_b[i]);
    }
  }
  for (int l = 0; l < nl; ++l) {
    const bool unloaded =
        !state.stance[l] || (!limits.contacts.empty() && limits.contacts[l].max_normal <= 0.0);
    for (int a = 0; a < 3; ++a) {
      const int r = 3 * l + a;
      VectorXd row = VectorXd::Zero(nx);
      row.head(nq) = state.J_c.row(r).transpose();
      if (state.stance[l]) {
        add_eq(row, -Jdq[r]);
      } else if (limits.swing_acc.size()) {
        add_eq(row, limits.swing_acc[r] - Jdq[r]);
      }
      if (unloaded) {
        VectorXd f = VectorXd::Zero(nx);
        f[nq + r] = 1.0;
        add_eq(f, 0.0);
      }
    }
  }
  qp.A.resize(static_cast<int>(eq_rows.size()), nx);
  qp.b.resize(static_cast<int>(eq_rows.size()));
  for (size_t i = 0; i < eq_rows.size(); ++i) {
    qp.A.row(i) = eq_rows[i].transpose();
    qp.b[i] = eq_rhs[i];
  }

  std::vector<VectorXd> c_rows;
  std::vector<double> c_lo, c_hi;
  const double eps = limits.strict_margin;
  auto add_ineq = [&](const VectorXd& row, double lo, double hi) {
    c_rows.push_back(row);
    c_lo.push_back(std::isfinite(lo) ? lo + eps : lo);
    c_hi.push_back(std::isfinite(hi) ? hi - eps : hi);
  };
  for (int l = 0; l < static_cast<int>(limits.contacts.size()); ++l) {
    const ContactLimits& cl = limits.contacts[l];
    if (!state.stance[l] || cl.max_normal <= 0.0) continue;
    const Vector3d nrm = cl.normal.normalized();
    Vector3d t1 = nrm.unitOrthogonal();
    Vector3d t2 = nrm.cross(t1);
    auto force_row = [&](const Vector3d& dir) {
      VectorXd row = VectorXd::Zero(nx);
      row.segment<3>(nq + 3 * l) = dir;
      return row;
    };
    add_ineq(force_row(nrm), cl.min_normal, cl.max_normal);
    for (const Vector3d& t : {t1, t2}) {
      add_ineq(force_row(t - cl.mu * nrm), -kInf, 0.0);
      add_ineq(force_row(t + cl.mu * nrm), 0.0, kInf);
    }
  }
  if (limits.tau_max.size()) {
    // tau = M_bj' qdd_b + M_j qdd_j + h_j - J_cj' lambda.
    for (int j = 0; j < n; ++j) {
      VectorXd row(nx);
      row.head(6) = state.M_bj.col(j);
      row.segment(6, n) = state.M_j.row(j).transpose();
      row.tail(3 * nl) = -state.J_c.col(6 + j);
      add_ineq(row, -limits.tau_max[j] - state.h_j[j], limits.tau_max[j] - state.h_j[j]);
    }
  }
  if (limits.qdd_min.size() || limits.qdd_max.size()) {
    for (int j = 0; j < n; ++j) {
      VectorXd row = VectorXd::Zero(nx);
      row[6 + j] = 1.0;
      add_ineq(row, limits.qdd_min.size() ? limits.qdd_min[j] : -kInf,
               limits.qdd_max.size() ? limits.qdd_max[j] : kInf);
    }
  }
  qp.C.resize(static_cast<int>(c_rows.size()), nx);
  qp.lo.resize(qp.C.rows());
  qp.hi.resize(qp.C.rows());
  for (size_t i = 0; i < c_rows.size(); ++i) {
    qp.C.row(i) = c_rows[i].transpose();
    qp.lo[i] = c_lo[i];
    qp.hi[i] = c_hi[i];
  }
  return qp;
}

TrackingSolution solve_tracking_qp(const WholeBodyState& state,
                                   const ReferenceAccelerations& refs,
                                   const TrackingWeights& weights,
                                   const TrackingLimits& limits) {
  if (std::none_of(state.stance.begin(), state.stance.end(), [](bool s) { return s; })) {
    throw InputError("trunk_qp: needs at least one stance contact");
  }
  TrackingSolution sol = solve_dense_qp(build_tracking_qp(state, refs, weights, limits));
  if (sol.status == QpStatus::kOptimal) {
    const int nq = 6 + state.n_joints();
    sol.qdd = sol.x.head(nq);
    sol.lambda = sol.x.tail(3 * state.n_legs());
  }
  return sol;
}

VectorXd feedforward_torques(const VectorXd& x, const WholeBodyState& state) {
  const int n = state.n_joints();
  const int nl = state.n_legs();
  require_shape(x.size() == 6 + n + 3 * nl, "x");
  require_shape(state.M_bj.rows() == 6 && state.M_bj.cols() == n, "M_bj");
  require_shape(state.M_j.rows() == n && state.M_j.cols() == n, "M_j");
  require_shape(state.h_j.size() == n, "h_j");
  require_shape(state.J_c.rows() == 3 * nl && state.J_c.cols() == 6 + n, "J_c");
  const VectorXd qdd = x.head(6 + n);
  const VectorXd lambda = x.tail(3 * nl);
  return state.M_bj.transpose() * qdd.head(6) + state.M_j * qdd.tail(n) + state.h_j -
         state.J_c.rightCols(n).transpose() * lambda;
}

VectorXd total_command(const VectorXd& tau_ff, const VectorXd& q_des, const VectorXd& qd_des,
                       const VectorXd& Kp, const VectorXd& Kd, const WholeBodyState& state) {
  const int n = state.n_joints();
  require_shape(tau_ff.size() == n && q_des.size() == n && qd_des.size() == n &&
                    Kp.size() == n && Kd.size() == n && state.qd.size() == n,
                "PD command");
  return tau_ff + Kp.cwiseProduct(q_des - state.q) + Kd.cwiseProduct(qd_des - state.qd);
}

}  // namespace locomip
