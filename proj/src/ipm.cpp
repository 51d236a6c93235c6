#include "locomip/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "ldl.hpp"

namespace locomip {

const char* to_string(ConvexStatus s) {
  switch (s) {
    case ConvexStatus::kOptimal: return "optimal";
    case ConvexStatus::kInfeasible: return "infeasible";
    case ConvexStatus::kUnbounded: return "unbounded";
    case ConvexStatus::kMaxIter: return "max-iter";
  }
  return "unknown";
}

namespace detail {
namespace {

// v0^2 - |v1|^2 in factored form to avoid cancellation near the boundary.
double soc_residual(const Eigen::Vector3d& v) {
  const double t = v.tail<2>().norm();
  return (v[0] - t) * (v[0] + t);
}

}  // namespace

SocScaling soc_nt_scaling(const Eigen::Vector3d& s, const Eigen::Vector3d& z) {
  const double s_res = std::max(soc_residual(s), 1e-300);
  const double z_res = std::max(soc_residual(z), 1e-300);
  const double s_norm = std::sqrt(s_res);
  const double z_norm = std::sqrt(z_res);
  const Eigen::Vector3d sb = s / s_norm;
  const Eigen::Vector3d zb = z / z_norm;
  const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
  const double w0 = (sb[0] + zb[0]) / (2.0 * gamma);
  const Eigen::Vector2d w1 = (sb.tail<2>() - zb.tail<2>()) / (2.0 * gamma);
  const double eta = std::sqrt(s_norm / z_norm);

  SocScaling out;
  Eigen::Matrix3d core;
  core(0, 0) = w0;
  core.block<1, 2>(0, 1) = w1.transpose();
  core.block<2, 1>(1, 0) = w1;
  core.block<2, 2>(1, 1) =
      Eigen::Matrix2d::Identity() + w1 * w1.transpose() / (1.0 + w0);
  out.W = eta * core;
  Eigen::Matrix3d inv = core;
  inv.block<1, 2>(0, 1) = -w1.transpose();
  inv.block<2, 1>(1, 0) = -w1;
  out.W_inv = inv / eta;
  out.lambda = out.W * z;
  return out;
}

double soc_max_step(const Eigen::Vector3d& v, const Eigen::Vector3d& dv) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double a = dv[0] * dv[0] - dv.tail<2>().squaredNorm();
  const double b = 2.0 * (v[0] * dv[0] - v.tail<2>().dot(dv.tail<2>()));
  const double c = std::max(soc_residual(v), 0.0);
  double best = kInf;
  auto consider = [&](double t) {
    if (t > 0.0 && t < best) best = t;
  };
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return kInf;
  if (std::abs(a) <= 1e-14 * scale) {
    if (b < 0.0) consider(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
      if (qq != 0.0) {
        consider(qq / a);
        consider(c / qq);
      } else {
        consider(0.0);
      }
    }
  }
  // Leaving through the apex keeps f >= 0 but flips the first coordinate.
  if (dv[0] < 0.0) consider(-v[0] / dv[0] * (1.0 + 1e-15));
  return best;
}

}  // namespace detail

namespace {

using Eigen::VectorXd;
using detail::SocScaling;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cone bookkeeping for s, z in R+^m_lin x (Q^3)^k

struct ConeLayout {
  int m_lin = 0;
  int n_soc = 0;
  int m() const { return m_lin + 3 * n_soc; }
  int degree() const { return m_lin + n_soc; }
  int soc_offset(int k) const { return m_lin + 3 * k; }
};

struct Scaling {
  VectorXd w_lin;       // sqrt(s/z)
  VectorXd lambda;      // full length m
  std::vector<SocScaling> soc;
};

Scaling compute_scaling(const ConeLayout& c, const VectorXd& s,
                        const VectorXd& z) {
  Scaling sc;
  sc.w_lin.resize(c.m_lin);
  sc.lambda.resize(c.m());
  for (int i = 0; i < c.m_lin; ++i) {
    sc.w_lin[i] = std::sqrt(s[i] / z[i]);
    sc.lambda[i] = std::sqrt(s[i] * z[i]);
  }
  sc.soc.resize(c.n_soc);
  for (int k = 0; k < c.n_soc; ++k) {
    const int o = c.soc_offset(k);
    sc.soc[k] = detail::soc_nt_scaling(s.segment<3>(o), z.segment<3>(o));
    sc.lambda.segment<3>(o) = sc.soc[k].lambda;
  }
  return sc;
}

VectorXd apply_w(const ConeLayout& c, const Scaling& sc, const VectorXd& v) {
  VectorXd out(c.m());
  for (int i = 0; i < c.m_lin; ++i) out[i] = sc.w_lin[i] * v[i];
  for (int k = 0; k < c.n_soc; ++k) {
    const int o = c.soc_offset(k);
    out.segment<3>(o) = sc.soc[k].W * v.segment<3>(o);
  }
  return out;
}

VectorXd apply_w_inv(const ConeLayout& c, const Scaling& sc, const VectorXd& v) {
  VectorXd out(c.m());
  for (int i = 0; i < c.m_lin; ++i) out[i] = v[i] / sc.w_lin[i];
  for (int k = 0; k < c.n_soc; ++k) {
    const int o = c.soc_offset(k);
    out.segment<3>(o) = sc.soc[k].W_inv * v.segment<3>(o);
  }
  return out;
}

VectorXd jordan_product(const ConeLayout& c, const VectorXd& u,
                        const VectorXd& v) {
  VectorXd out(c.m());
  for (int i = 0; i < c.m_lin; ++i) out[i] = u[i] * v[i];
  for (int k = 0; k < c.n_soc; ++k) {
    const int o = c.soc_offset(k);
    out[o] = u.segment<3>(o).dot(v.segment<3>(o));
    out.segment<2>(o + 1) =
        u[o] * v.segment<2>(o + 1) + v[o] * u.segment<2>(o + 1);
  }
  return out;
}

// x such that lambda o x = v
VectorXd jordan_divide(const ConeLayout& c, const VectorXd& lambda,
                       const VectorXd& v) {
  VectorXd out(c.m());
  for (int i = 0; i < c.m_lin; ++i) out[i] = v[i] / lambda[i];
  for (int k = 0; k < c.n_soc; ++k) {
    const int o = c.soc_offset(k);
    const double l0 = lambda[o];
    const Eigen::Vector2d l1 = lambda.segment<2>(o + 1);
    const double rho = detail::soc_residual(lambda.segment<3>(o));
    const double nu = l1.dot(v.segment<2>(o + 1));
    const double x0 = (l0 * v[o] - nu) / rho;
    out[o] = x0;
    out.segment<2>(o + 1) = (v.segment<2>(o + 1) - x0 * l1) / l0;
  }
  return out;
}

void add_identity(const ConeLayout& c, VectorXd& v, double t) {
  for (int i = 0; i < c.m_lin; ++i) v[i] += t;
  for (int k = 0; k < c.n_soc; ++k) v[c.soc_offset(k)] += t;
}

// Smallest t with v + t e in the cone.
double cone_shift(const ConeLayout& c, const VectorXd& v) {
  double t = -kInf;
  for (int i = 0; i < c.m_lin; ++i) t = std::max(t, -v[i]);
  for (int k = 0; k < c.n_soc; ++k) {
    const int o = c.soc_offset(k);
    t = std::max(t, v.segment<2>(o + 1).norm() - v[o]);
  }
  return t;
}

double max_step(const ConeLayout& c, const VectorXd& v, const VectorXd& dv) {
  double best = kInf;
  for (int i = 0; i < c.m_lin; ++i) {
    if (dv[i] < 0.0) best = std::min(best, -v[i] / dv[i]);
  }
  for (int k = 0; k < c.n_soc; ++k) {
    const int o = c.soc_offset(k);
    best = std::min(best, detail::soc_max_step(v.segment<3>(o), dv.segment<3>(o)));
  }
  return best;
}

void shift_into_cone(const ConeLayout& c, VectorXd& v) {
  if (c.m() == 0) return;
  const double t = cone_shift(c, v);
  if (t >= -1e-8 * std::max(1.0, v.lpNorm<Eigen::Infinity>())) {
    add_identity(c, v, 1.0 + t);
  }
}

// Quasi-definite KKT system
//   [ P    A'   G' ]
//   [ A    0    0  ]
//   [ G    0   -H  ]
// factorized with static regularization, solved with refinement against the
// unregularized operator.

class KktSystem {
 public:
  KktSystem(const ConicForm& cf, const ConeLayout& cones,
            const IpmSettings& st)
      : cf_(cf), cones_(cones), st_(st) {
    n_ = cf.n;
    p_ = static_cast<int>(cf.A.rows());
    m_ = cones.m();
    dim_ = n_ + p_ + m_;
    h_lin_.setZero(cones.m_lin);
    h_soc_.assign(cones.n_soc, Eigen::Matrix3d::Zero());
    signs_ = Eigen::VectorXi::Constant(dim_, -1);
    signs_.head(n_).setOnes();
  }

  void set_identity_scaling() {
    h_lin_.setOnes();
    for (auto& b : h_soc_) b.setIdentity();
  }

  void set_scaling(const Scaling& sc) {
    for (int i = 0; i < cones_.m_lin; ++i) h_lin_[i] = sc.w_lin[i] * sc.w_lin[i];
    for (int k = 0; k < cones_.n_soc; ++k) h_soc_[k] = sc.soc[k].W * sc.soc[k].W;
  }

  bool factor() {
    if (!assembled_) assemble();
    double max_diag = h_lin_.size() ? h_lin_.maxCoeff() : 0.0;
    for (const auto& b : h_soc_) max_diag = std::max(max_diag, b.diagonal().maxCoeff());
    max_diag = std::max(max_diag, max_p_diag_);
    const double d = st_.static_reg + 1e-16 * max_diag;

    double* v = full_.valuePtr();
    std::copy(base_.begin(), base_.end(), v);
    for (int j = 0; j < n_ + p_; ++j) v[diag_slot_[j]] += j < n_ ? d : -d;
    const int zo = n_ + p_;
    for (int i = 0; i < cones_.m_lin; ++i) v[diag_slot_[zo + i]] -= h_lin_[i] + d;
    for (int k = 0; k < cones_.n_soc; ++k) {
      const int* slot = &soc_slot_[9 * k];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          v[slot[3 * a + b]] -= h_soc_[k](a, b) + (a == b ? d : 0.0);
        }
      }
    }
    detail::PivotRegularization reg;
    if (st_.kkt == KktBackend::kDenseLdlt) {
      dense_.factor(Eigen::MatrixXd(full_), signs_, reg);
      return true;
    }
    sparse_.factor(full_, signs_, reg);
    return true;
  }

  // Builds the symmetric pattern once; factor() only rewrites values.
  void assemble() {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(cf_.P.nonZeros() + cf_.A.nonZeros() + cf_.G.nonZeros() +
                 dim_ + 6 * cones_.n_soc);
    for (int j = 0; j < n_; ++j) {
      trip.emplace_back(j, j, 0.0);
      for (SparseMatrix::InnerIterator it(cf_.P, j); it; ++it) {
        if (it.row() >= j) trip.emplace_back(it.row(), j, it.value());
        if (it.row() == j) max_p_diag_ = std::max(max_p_diag_, it.value());
      }
    }
    for (int j = 0; j < n_; ++j) {
      for (SparseMatrix::InnerIterator it(cf_.A, j); it; ++it) {
        trip.emplace_back(n_ + it.row(), j, it.value());
      }
      for (SparseMatrix::InnerIterator it(cf_.G, j); it; ++it) {
        trip.emplace_back(n_ + p_ + it.row(), j, it.value());
      }
    }
    for (int i = n_; i < dim_; ++i) trip.emplace_back(i, i, 0.0);
    const int zo = n_ + p_;
    for (int k = 0; k < cones_.n_soc; ++k) {
      const int o = zo + cones_.soc_offset(k);
      for (int a = 1; a < 3; ++a) {
        for (int b = 0; b < a; ++b) trip.emplace_back(o + a, o + b, 0.0);
      }
    }
    SparseMatrix K(dim_, dim_);
    K.setFromTriplets(trip.begin(), trip.end());
    full_ = K.selfadjointView<Eigen::Lower>();
    full_.makeCompressed();
    base_.assign(full_.valuePtr(), full_.valuePtr() + full_.nonZeros());

    auto slot = [&](int r, int c) {
      const int* begin = full_.innerIndexPtr() + full_.outerIndexPtr()[c];
      const int* end = full_.innerIndexPtr() + full_.outerIndexPtr()[c + 1];
      const int* it = std::lower_bound(begin, end, r);
      return static_cast<int>(it - full_.innerIndexPtr());
    };
    diag_slot_.resize(dim_);
    for (int i = 0; i < dim_; ++i) diag_slot_[i] = slot(i, i);
    soc_slot_.resize(9 * cones_.n_soc);
    for (int k = 0; k < cones_.n_soc; ++k) {
      const int o = zo + cones_.soc_offset(k);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) soc_slot_[9 * k + 3 * a + b] = slot(o + a, o + b);
      }
    }
    if (st_.kkt != KktBackend::kDenseLdlt) sparse_.analyze(full_);
    assembled_ = true;
  }

  VectorXd solve(const VectorXd& rhs) const {
    VectorXd x = raw_solve(rhs);
    const double rnorm = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    VectorXd r = rhs - multiply(x);
    double err = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < st_.refine_steps && err > 1e-14 * rnorm; ++it) {
      const VectorXd cand = x + raw_solve(r);
      const VectorXd rc = rhs - multiply(cand);
      const double ec = rc.lpNorm<Eigen::Infinity>();
      if (!(ec < err)) break;
      x = cand;
      r = rc;
      // Stagnating: further passes only chase roundoff.
      const bool slow = ec > 0.5 * err;
      err = ec;
      if (slow) break;
    }
    return x;
  }

  int n() const { return n_; }
  int p() const { return p_; }
  int m() const { return m_; }
  int dim() const { return dim_; }

 private:
  VectorXd raw_solve(const VectorXd& rhs) const {
    if (st_.kkt == KktBackend::kDenseLdlt) return dense_.solve(rhs);
    return sparse_.solve(rhs);
  }

  VectorXd multiply(const VectorXd& v) const {
    VectorXd out(dim_);
    const auto vx = v.head(n_);
    const auto vy = v.segment(n_, p_);
    const auto vz = v.tail(m_);
    out.head(n_) = cf_.P * vx + cf_.A.transpose() * vy + cf_.G.transpose() * vz;
    out.segment(n_, p_) = cf_.A * vx;
    VectorXd hz(m_);
    for (int i = 0; i < cones_.m_lin; ++i) hz[i] = h_lin_[i] * vz[i];
    for (int k = 0; k < cones_.n_soc; ++k) {
      const int o = cones_.soc_offset(k);
      hz.segment<3>(o) = h_soc_[k] * vz.segment<3>(o);
    }
    out.tail(m_) = cf_.G * vx - hz;
    return out;
  }

  const ConicForm& cf_;
  ConeLayout cones_;
  IpmSettings st_;
  int n_ = 0, p_ = 0, m_ = 0, dim_ = 0;
  VectorXd h_lin_;
  std::vector<Eigen::Matrix3d> h_soc_;
  Eigen::VectorXi signs_;
  bool assembled_ = false;
  SparseMatrix full_;
  std::vector<double> base_;
  std::vector<int> diag_slot_, soc_slot_;
  double max_p_diag_ = 0.0;
  detail::SparseLdl sparse_;
  detail::DenseLdl dense_;
};

struct Direction {
  VectorXd dx, dy, dz, ds;
  double dtau = 0.0;
  double dkappa = 0.0;
};

}  // namespace

IpmResult solve_ipm(const ConicForm& cf, const IpmSettings& st,
                    const VectorXd* warm_x) {
  IpmResult res;
  ConeLayout cones{cf.n_orthant, cf.n_soc};
  const int n = cf.n;
  const int p = static_cast<int>(cf.A.rows());
  const int m = cones.m();

  if (cf.trivially_infeasible) {
    res.status = ConvexStatus::kInfeasible;
    res.x = VectorXd::Zero(n);
    return res;
  }

  KktSystem kkt(cf, cones, st);

  // Initial point from the identity-scaled KKT system.
  VectorXd x(n), y(p), z(m), s(m);
  {
    kkt.set_identity_scaling();
    if (!kkt.factor()) {
      res.status = ConvexStatus::kMaxIter;
      res.x = VectorXd::Zero(n);
      return res;
    }
    VectorXd rhs(kkt.dim());
    rhs << -cf.q, cf.b, cf.h;
    const VectorXd sol = kkt.solve(rhs);
    x = sol.head(n);
    y = sol.segment(n, p);
    z = sol.tail(m);
    if (warm_x != nullptr && warm_x->size() == n) x = *warm_x;
    s = cf.h - cf.G * x;
    shift_into_cone(cones, s);
    shift_into_cone(cones, z);
  }
  double tau = 1.0;
  double kappa = 1.0;

  struct Best {
    double score = kInf;
    VectorXd x, y, z, s;
    double pobj = 0.0, dobj = 0.0, pres = 0.0, dres = 0.0;
  } best;
  struct {
    double norm = kInf;
    VectorXd y, z;
  } best_cert;

  const double norm_q = cf.q.size() ? cf.q.lpNorm<Eigen::Infinity>() : 0.0;
  const double norm_b = cf.b.size() ? cf.b.lpNorm<Eigen::Infinity>() : 0.0;
  const double norm_h = cf.h.size() ? cf.h.lpNorm<Eigen::Infinity>() : 0.0;
  const double degree = cones.degree();

  auto inf_norm = [](const VectorXd& v) {
    return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
  };

  for (int iter = 0; iter <= st.max_iter; ++iter) {
    res.iterations = iter;
    const VectorXd Px = cf.P * x;
    const double xPx = x.dot(Px);
    const VectorXd Aty = cf.A.transpose() * y;
    const VectorXd Gtz = cf.G.transpose() * z;
    const VectorXd rx = Px + Aty + Gtz + cf.q * tau;
    const VectorXd ry = cf.A * x - cf.b * tau;
    const VectorXd rz = cf.G * x + s - cf.h * tau;
    const double qx = cf.q.dot(x);
    const double bty = cf.b.dot(y) + cf.h.dot(z);
    const double rtau = kappa + qx + bty + xPx / tau;

    // Convergence on the unscaled iterate.
    const double pobj = 0.5 * xPx / (tau * tau) + qx / tau + cf.q0;
    const double dobj = -0.5 * xPx / (tau * tau) - bty / tau + cf.q0;
    const double xnorm = inf_norm(x) / tau;
    const double pres = std::max(inf_norm(ry), inf_norm(rz)) / tau /
                        (1.0 + std::max({norm_b, norm_h, xnorm}));
    const double dres = inf_norm(rx) / tau /
                        (1.0 + std::max(norm_q, inf_norm(Px) / tau));
    const double gap_abs = std::abs(pobj - dobj);
    const double gap_rel =
        gap_abs / std::max(1.0, std::min(std::abs(pobj), std::abs(dobj)));
    res.primal_residual = pres;
    res.dual_residual = dres;
    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(pobj)) {
      break;
    }
    const double score = std::max({pres, dres, std::min(gap_abs, gap_rel)});
    if (score < best.score) {
      best = {score, x / tau, y / tau, z / tau, s / tau, pobj, dobj, pres, dres};
    }
    if (pres <= st.tol_feas && dres <= st.tol_feas &&
        (gap_abs <= st.tol_gap_abs || gap_rel <= st.tol_gap_rel)) {
      res.status = ConvexStatus::kOptimal;
      res.x = x / tau;
      res.y = y / tau;
      res.z = z / tau;
      res.s = s / tau;
      res.objective = pobj;
      res.dual_objective = dobj;
      return res;
    }

    if (tau < kappa) {
      if (bty < 0.0) {
        const double cert = inf_norm(Aty + Gtz) / -bty;
        if (cert < best_cert.norm) best_cert = {cert, y / -bty, z / -bty};
        if (cert <= st.tol_infeas) {
          res.status = ConvexStatus::kInfeasible;
          res.certificate_norm = cert;
          res.x = x;
          res.y = y / -bty;
          res.z = z / -bty;
          return res;
        }
      }
      if (qx < 0.0) {
        const double r = std::max({inf_norm(Px), inf_norm(cf.A * x),
                                   inf_norm(cf.G * x + s)}) / -qx;
        if (r <= st.tol_infeas) {
          res.status = ConvexStatus::kUnbounded;
          res.certificate_norm = r;
          res.x = x / -qx;
          return res;
        }
      }
    }
    if (iter == st.max_iter) break;

    const Scaling sc = compute_scaling(cones, s, z);
    const double mu = (s.dot(z) + tau * kappa) / (degree + 1.0);
    kkt.set_scaling(sc);
    if (!kkt.factor()) break;

    VectorXd rhs1(kkt.dim());
    rhs1 << -cf.q, cf.b, cf.h;
    const VectorXd sol1 = kkt.solve(rhs1);
    const VectorXd x1 = sol1.head(n);
    const VectorXd y1 = sol1.segment(n, p);
    const VectorXd z1 = sol1.tail(m);
    const VectorXd c_vec = cf.q + 2.0 * Px / tau;
    const double den = c_vec.dot(x1) + cf.b.dot(y1) + cf.h.dot(z1) -
                       xPx / (tau * tau) - kappa / tau;

    auto direction = [&](const VectorXd& d_s, double d_kappa, double eta) {
      Direction d;
      const VectorXd w_ld = apply_w(cones, sc, jordan_divide(cones, sc.lambda, d_s));
      VectorXd rhs(kkt.dim());
      rhs << -eta * rx, -eta * ry, -eta * rz - w_ld;
      const VectorXd sol2 = kkt.solve(rhs);
      const auto x2 = sol2.head(n);
      const auto y2 = sol2.segment(n, p);
      const auto z2 = sol2.tail(m);
      const double num = -eta * rtau - c_vec.dot(x2) - cf.b.dot(y2) -
                         cf.h.dot(z2) - d_kappa / tau;
      d.dtau = num / den;
      d.dx = x2 + d.dtau * x1;
      d.dy = y2 + d.dtau * y1;
      d.dz = z2 + d.dtau * z1;
      d.ds = w_ld - apply_w(cones, sc, apply_w(cones, sc, d.dz));
      d.dkappa = (d_kappa - kappa * d.dtau) / tau;
      return d;
    };

    auto step_length = [&](const Direction& d) {
      double a = std::min(max_step(cones, s, d.ds), max_step(cones, z, d.dz));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    // Predictor.
    const VectorXd ll = jordan_product(cones, sc.lambda, sc.lambda);
    Direction aff = direction(-ll, -tau * kappa, 1.0);
    const double a_aff = std::min(1.0, step_length(aff));
    const double sigma = std::pow(1.0 - a_aff, 3);

    // Corrector.
    VectorXd d_s = -ll;
    add_identity(cones, d_s, sigma * mu);
    d_s -= jordan_product(cones, apply_w_inv(cones, sc, aff.ds),
                          apply_w(cones, sc, aff.dz));
    const double d_k = -tau * kappa + sigma * mu - aff.dtau * aff.dkappa;
    Direction dir = direction(d_s, d_k, 1.0 - sigma);
    const double alpha = std::min(1.0, st.step_fraction * step_length(dir));
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !std::isfinite(dir.dtau) ||
        !dir.dx.allFinite() || !dir.dz.allFinite()) {
      break;
    }

    x += alpha * dir.dx;
    y += alpha * dir.dy;
    z += alpha * dir.dz;
    s += alpha * dir.ds;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
  }

  // Stalled: accept the best iterate if it meets the reduced tolerance.
  if (best.score <= st.tol_reduced) {
    res.status = ConvexStatus::kOptimal;
    res.x = best.x;
    res.y = best.y;
    res.z = best.z;
    res.s = best.s;
    res.objective = best.pobj;
    res.dual_objective = best.dobj;
    res.primal_residual = best.pres;
    res.dual_residual = best.dres;
    return res;
  }
  if (best_cert.norm <= st.tol_infeas_reduced) {
    res.status = ConvexStatus::kInfeasible;
    res.certificate_norm = best_cert.norm;
    res.x = x;
    res.y = best_cert.y;
    res.z = best_cert.z;
    return res;
  }
  res.status = ConvexStatus::kMaxIter;
  res.x = x / tau;
  res.y = y / tau;
  res.z = z / tau;
  res.s = s / tau;
  const VectorXd Px = cf.P * res.x;
  res.objective = 0.5 * res.x.dot(Px) + cf.q.dot(res.x) + cf.q0;
  return res;
}

}  // namespace locomip
