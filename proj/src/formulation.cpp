#include "locomip/formulation.hpp"

#include <cmath>
#include <numbers>

namespace locomip {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string idx(const char* base, std::initializer_list<int> ids) {
  std::string s = base;
  s += '[';
  bool first = true;
  for (int i : ids) {
    if (!first) s += ',';
    s += std::to_string(i);
    first = false;
  }
  s += ']';
  return s;
}

const char* kAxis[3] = {".x", ".y", ".z"};

LinearConstraint row(LinExpr e, Sense s, double rhs, std::string name) {
  return LinearConstraint{std::move(e), s, rhs, std::move(name)};
}

bool never_active(const LinExpr& trig) {
  LinExpr t = trig;
  t.canonicalize();
  return t.is_constant() && t.constant() <= 0.0;
}

}  // namespace

void PlanDims::validate() const {
  if (n_l < 1 || N_t < 1 || N_k < 1 || N_r < 1 || N_s < 1 || N_e < 3) {
    throw ModelError("dims: counts must be positive");
  }
  if (N_f < 0 || N_f % n_l != 0) {
    throw ModelError("dims: N_f must be a nonnegative multiple of n_l");
  }
  if (!(dt > 0)) throw ModelError("dims: dt must be positive");
}

LinExpr VariableMap::slot(int contact) const {
  LinExpr e;
  for (std::size_t j = 0; j < T[contact].size(); ++j) {
    e.add(T[contact][j], static_cast<double>(j + 1));
  }
  return e;
}

int Formulation::expected_binaries(const PlanDims& d) {
  return d.N_f * (d.N_t + d.N_r + 2 * d.N_s);
}

Census Formulation::census() const {
  Census c;
  c.variables = problem.num_vars();
  c.binaries = problem.num_binaries();
  for (const auto& row : map.T) c.gait_binaries += static_cast<int>(row.size());
  for (const auto& row : map.H) c.region_binaries += static_cast<int>(row.size());
  for (const auto& row : map.S) c.trig_binaries += static_cast<int>(row.size());
  for (const auto& row : map.C) c.trig_binaries += static_cast<int>(row.size());
  c.linear_rows = static_cast<int>(problem.constraints().size());
  c.implications = static_cast<int>(problem.implications().size());
  c.quadratic_bounds = static_cast<int>(problem.quadratic_bounds().size());
  c.squared_costs = static_cast<int>(problem.squared_costs().size());
  return c;
}

std::vector<std::pair<int, double>> Formulation::gait_assignment(
    const Eigen::MatrixXi& pattern) const {
  if (pattern.rows() != dims.N_f || pattern.cols() != dims.N_t) {
    throw InputError("gait pattern must be N_f x N_t");
  }
  std::vector<std::pair<int, double>> out;
  for (int i = 0; i < dims.N_f; ++i) {
    for (int j = 0; j < dims.N_t; ++j) {
      out.emplace_back(map.T[i][j].index, pattern(i, j) != 0 ? 1.0 : 0.0);
    }
  }
  return out;
}

void Formulation::fix_gait(const Eigen::MatrixXi& pattern) {
  for (const auto& [index, value] : gait_assignment(pattern)) {
    problem.set_bounds(VarId{index}, value, value);
  }
}

FormulationBuilder::FormulationBuilder(const TerrainScene& scene,
                                       const RobotModel& robot, const Task& task,
                                       FormulationOptions opts)
    : scene_(scene), robot_(robot), task_(task) {
  robot.validate();
  PlanDims& d = out_.dims;
  d.n_l = robot.n_legs();
  d.N_f = task.N_f;
  d.N_t = task.N_t;
  d.N_k = task.N_k;
  d.N_r = scene.num_regions();
  d.N_s = task.trig_segments;
  d.N_e = 3;
  for (const auto& r : scene.regions) {
    d.N_e = std::max(d.N_e, static_cast<int>(r.cone_edges.size()));
  }
  d.dt = task.dt;
  d.validate();
  if (d.N_t < d.cycles()) {
    out_.warnings.push_back(
        "N_t < N_f/n_l: contact ordering cannot be satisfied");
  }
  out_.options = opts;
  out_.trig = build_trig_table(d.N_s, task.yaw_lo, task.yaw_hi);
  out_.weight = robot.mass * scene.gravity.norm();

  lo_ = scene.lower_corner();
  hi_ = scene.upper_corner();
  for (const auto& p : robot.initial_feet) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  for (int l = 0; l < d.n_l; ++l) {
    const int r = scene.locate(robot.initial_feet[l]);
    if (r < 0) {
      throw ModelError("initial foot of leg '" + robot.legs[l].name +
                       "' is not on any safe region");
    }
    out_.initial_regions.push_back(r);
  }
}

LinExpr FormulationBuilder::reached(int contact, int knot) const {
  LinExpr e;
  const PlanDims& d = out_.dims;
  for (int j = 0; j < d.N_t && d.touchdown_knot(j) <= knot; ++j) {
    e.add(out_.map.T[contact][j], 1.0);
  }
  return e;
}

LinExpr FormulationBuilder::active(int contact, int knot) const {
  LinExpr e = reached(contact, knot);
  const int next = contact + out_.dims.n_l;
  if (next < out_.dims.N_f) e -= reached(next, knot);
  return e;
}

LinExpr FormulationBuilder::initial_active(int leg, int knot) const {
  if (leg >= out_.dims.N_f) return LinExpr(1.0);
  return LinExpr(1.0) - reached(leg, knot);
}

void FormulationBuilder::allocate() {
  const PlanDims& d = out_.dims;
  MicpProblem& P = out_.problem;
  VariableMap& m = out_.map;
  const int N = d.N();
  const double F = task_.force_limit;
  const double V = task_.velocity_limit;

  auto vec3 = [&](const std::string& name, const Eigen::Vector3d& lo,
                  const Eigen::Vector3d& hi) {
    Vec3Id id;
    for (int a = 0; a < 3; ++a) id[a] = P.add_continuous(name + kAxis[a], lo[a], hi[a]);
    return id;
  };
  auto fixed3 = [&](const std::string& name, const Eigen::Vector3d& x) {
    return vec3(name, x, x);
  };

  const Eigen::Vector3d com_lo = lo_ - Eigen::Vector3d(1.0, 1.0, 1.0);
  const Eigen::Vector3d com_hi = hi_ + Eigen::Vector3d(1.0, 1.0, 2.0);
  const Eigen::Vector3d vlim = Eigen::Vector3d::Constant(V);
  const Eigen::Vector3d klim = Eigen::Vector3d::Constant(5.0);
  const Eigen::Vector3d flim = Eigen::Vector3d::Constant(F);

  m.r.push_back(fixed3("r[0]", robot_.initial_com));
  m.v.push_back(fixed3("v[0]", Eigen::Vector3d::Zero()));
  for (int k = 1; k <= N; ++k) {
    m.r.push_back(vec3(idx("r", {k}), com_lo, com_hi));
    m.v.push_back(vec3(idx("v", {k}), -vlim, vlim));
  }
  if (out_.options.angular_dynamics) {
    m.k.push_back(fixed3("k[0]", Eigen::Vector3d::Zero()));
    for (int k = 1; k <= N; ++k) m.k.push_back(vec3(idx("k", {k}), -klim, klim));
  }

  m.p.resize(d.n_l);
  m.lambda.assign(d.n_l, std::vector<Vec3Id>(N + 1));
  m.alpha.assign(d.n_l, std::vector<VarId>(N + 1));
  for (int l = 0; l < d.n_l; ++l) {
    const bool moves = l < d.N_f;
    Vec3Id held = fixed3(idx("p", {l, 0}), robot_.initial_feet[l]);
    m.p[l].push_back(held);
    for (int j = 0; j < d.N_t; ++j) {
      for (int t = 1; t <= d.N_k; ++t) {
        if (t == d.N_k && moves) {
          held = vec3(idx("p", {l, d.knot(j, t)}), lo_, hi_);
        }
        m.p[l].push_back(held);
      }
    }
    for (int k = 1; k <= N; ++k) {
      m.lambda[l][k] = vec3(idx("lambda", {l, k}), -flim, flim);
      m.alpha[l][k] = P.add_continuous(idx("alpha", {l, k}), 0.0, std::sqrt(3.0) * F);
    }
  }

  if (out_.options.angular_dynamics) {
    m.u.assign(d.n_l, std::vector<std::array<std::array<VarId, 2>, 6>>(N + 1));
    for (int l = 0; l < d.n_l; ++l) {
      for (int k = 1; k <= N; ++k) {
        for (int q = 0; q < 6; ++q) {
          m.u[l][k][q][0] = P.add_continuous(idx("u+", {l, k, q}), 0.0, kInf);
          m.u[l][k][q][1] = P.add_continuous(idx("u-", {l, k, q}), 0.0, kInf);
        }
      }
    }
  }

  const TrigTable& tt = out_.trig;
  for (int i = 0; i < d.N_f; ++i) {
    m.f.push_back(vec3(idx("f", {i}), scene_.lower_corner(), scene_.upper_corner()));
    m.theta.push_back(P.add_continuous(idx("theta", {i}), tt.lower(), tt.upper()));
    m.s.push_back(P.add_continuous(idx("s", {i}), -1.0, 1.0));
    m.c.push_back(P.add_continuous(idx("c", {i}), -1.0, 1.0));
    m.rT.push_back({P.add_continuous(idx("rT", {i}) + ".x", com_lo.x(), com_hi.x()),
                    P.add_continuous(idx("rT", {i}) + ".y", com_lo.y(), com_hi.y())});
    m.T.emplace_back();
    // Gait first, then regions, then trig segments.
    for (int j = 0; j < d.N_t; ++j) {
      m.T.back().push_back(P.add_binary(idx("T", {i, j})));
      P.set_branch_priority(m.T.back().back(), 2);
    }
    m.H.emplace_back();
    for (int r = 0; r < d.N_r; ++r) {
      m.H.back().push_back(P.add_binary(idx("H", {i, r})));
      P.set_branch_priority(m.H.back().back(), 1);
    }
    m.S.emplace_back();
    m.C.emplace_back();
    for (int q = 0; q < d.N_s; ++q) {
      m.S.back().push_back(P.add_binary(idx("S", {i, q})));
      m.C.back().push_back(P.add_binary(idx("C", {i, q})));
    }
    if (d.N_r == 1) P.set_bounds(m.H[i][0], 1.0, 1.0);
    if (d.N_s == 1) {
      P.set_bounds(m.S[i][0], 1.0, 1.0);
      P.set_bounds(m.C[i][0], 1.0, 1.0);
    }
  }
}

void FormulationBuilder::add_gait_constraints() {
  const PlanDims& d = out_.dims;
  MicpProblem& P = out_.problem;
  const VariableMap& m = out_.map;
  for (int i = 0; i < d.N_f; ++i) {
    LinExpr once;
    for (VarId t : m.T[i]) once.add(t, 1.0);
    P.add_constraint(once, Sense::kEqual, 1.0, idx("gait.once", {i}));
    if (i >= d.n_l) {
      P.add_constraint(m.slot(i) - m.slot(i - d.n_l), Sense::kGreaterEqual, 1.0,
                       idx("gait.order", {i}));
    }
  }
}

void FormulationBuilder::add_region_and_reach() {
  const PlanDims& d = out_.dims;
  MicpProblem& P = out_.problem;
  const VariableMap& m = out_.map;
  const TrigTable& tt = out_.trig;

  for (int i = 0; i < d.N_f; ++i) {
    LinExpr one;
    for (VarId h : m.H[i]) one.add(h, 1.0);
    P.add_constraint(one, Sense::kEqual, 1.0, idx("region.once", {i}));
    for (int r = 0; r < d.N_r; ++r) {
      const SafeRegion& reg = scene_.regions[r];
      for (int q = 0; q < reg.A.rows(); ++q) {
        LinExpr e;
        for (int a = 0; a < 3; ++a) e.add(m.f[i][a], reg.A(q, a));
        P.add_implication(m.H[i][r],
                          row(e, Sense::kLessEqual, reg.b[q], idx("region", {i, r, q})));
      }
    }

    // CoM after transitioning.
    for (int j = 0; j < d.N_t; ++j) {
      const Vec3Id& rk = m.r[d.touchdown_knot(j)];
      for (int a = 0; a < 2; ++a) {
        P.add_implication(m.T[i][j],
                          row(LinExpr(m.rT[i][a]) - LinExpr(rk[a]), Sense::kEqual, 0.0,
                              idx("reach.com", {i, j}) + kAxis[a]));
      }
    }

    const LegParams& leg = robot_.legs[d.leg_of(i)];
    const double cp = std::cos(leg.phi), sp = std::sin(leg.phi);
    LinExpr hx = LinExpr(m.f[i][0]) - LinExpr(m.rT[i][0]);
    hx.add(m.c[i], -leg.L * cp).add(m.s[i], leg.L * sp);
    LinExpr hy = LinExpr(m.f[i][1]) - LinExpr(m.rT[i][1]);
    hy.add(m.s[i], -leg.L * cp).add(m.c[i], -leg.L * sp);
    P.add_constraint(hx, Sense::kLessEqual, robot_.d_lim, idx("reach", {i}) + ".x+");
    P.add_constraint(hx, Sense::kGreaterEqual, -robot_.d_lim, idx("reach", {i}) + ".x-");
    P.add_constraint(hy, Sense::kLessEqual, robot_.d_lim, idx("reach", {i}) + ".y+");
    P.add_constraint(hy, Sense::kGreaterEqual, -robot_.d_lim, idx("reach", {i}) + ".y-");

    LinExpr s_one, c_one;
    for (int q = 0; q < d.N_s; ++q) {
      const VarId S = m.S[i][q], C = m.C[i][q];
      s_one.add(S, 1.0);
      c_one.add(C, 1.0);
      const double a = tt.boundaries[q], b = tt.boundaries[q + 1];
      for (VarId z : {S, C}) {
        P.add_implication(z, row(m.theta[i], Sense::kGreaterEqual, a,
                                 idx("trig.seg", {i, q}) + ".lo"));
        P.add_implication(z, row(m.theta[i], Sense::kLessEqual, b,
                                 idx("trig.seg", {i, q}) + ".hi"));
      }
      P.add_implication(S, row(LinExpr(m.s[i]).add(m.theta[i], -tt.sin_slope[q]),
                               Sense::kEqual, tt.sin_intercept[q],
                               idx("trig.sin", {i, q})));
      P.add_implication(C, row(LinExpr(m.c[i]).add(m.theta[i], -tt.cos_slope[q]),
                               Sense::kEqual, tt.cos_intercept[q],
                               idx("trig.cos", {i, q})));
      // Shared breakpoints: both tables may pick the same segment.
      if (d.N_s > 1) {
        P.add_constraint(LinExpr(S) - LinExpr(C), Sense::kEqual, 0.0,
                         idx("trig.tie", {i, q}));
      }
    }
    P.add_constraint(s_one, Sense::kEqual, 1.0, idx("trig.sin.once", {i}));
    P.add_constraint(c_one, Sense::kEqual, 1.0, idx("trig.cos.once", {i}));

    if (out_.options.trig_hull_cuts) {
      // (c, s) lies on a chord of the breakpoint polygon.
      for (int q = 0; q < d.N_s; ++q) {
        const double a = tt.boundaries[q], b = tt.boundaries[q + 1];
        const double mid = 0.5 * (a + b);
        P.add_constraint(LinExpr().add(m.c[i], std::cos(mid)).add(m.s[i], std::sin(mid)),
                         Sense::kLessEqual, std::cos(0.5 * (b - a)),
                         idx("trig.hull", {i, q}));
      }
      const double span = tt.upper() - tt.lower();
      if (span < 2.0 * std::numbers::pi - 1e-9) {
        const double mid = 0.5 * (tt.upper() + tt.lower());
        P.add_constraint(LinExpr().add(m.c[i], std::cos(mid)).add(m.s[i], std::sin(mid)),
                         Sense::kGreaterEqual, std::cos(0.5 * span),
                         idx("trig.hull", {i, d.N_s}));
      }
    }
  }
}

void FormulationBuilder::add_swing_and_box() {
  const PlanDims& d = out_.dims;
  MicpProblem& P = out_.problem;
  const VariableMap& m = out_.map;

  for (int l = 0; l < d.n_l && l < d.N_f; ++l) {
    for (int j = 0; j < d.N_t; ++j) {
      const int td = d.touchdown_knot(j);
      LinExpr moving;
      for (int i = l; i < d.N_f; i += d.n_l) {
        moving.add(m.T[i][j], 1.0);
        for (int a = 0; a < 3; ++a) {
          P.add_implication(m.T[i][j],
                            row(LinExpr(m.p[l][td][a]) - LinExpr(m.f[i][a]), Sense::kEqual,
                                0.0, idx("swing.land", {i, j}) + kAxis[a]));
        }
      }
      for (int a = 0; a < 3; ++a) {
        P.add_implication(LinExpr(1.0) - moving,
                          row(LinExpr(m.p[l][td][a]) - LinExpr(m.p[l][td - 1][a]),
                              Sense::kEqual, 0.0, idx("swing.hold", {l, j}) + kAxis[a]));
      }
    }
  }

  const double inv = 1.0 / d.n_l;
  for (int k = 1; k <= d.N(); ++k) {
    for (int a = 0; a < 3; ++a) {
      LinExpr e(m.r[k][a]);
      for (int l = 0; l < d.n_l; ++l) e.add(m.p[l][k][a], -inv);
      P.add_constraint(e, Sense::kLessEqual, robot_.box_max[a],
                       idx("box", {k}) + kAxis[a] + "+");
      P.add_constraint(e, Sense::kGreaterEqual, robot_.box_min[a],
                       idx("box", {k}) + kAxis[a] + "-");
    }
  }
}

void FormulationBuilder::add_dynamics() {
  const PlanDims& d = out_.dims;
  MicpProblem& P = out_.problem;
  VariableMap& m = out_.map;
  const Eigen::Vector3d& g = scene_.gravity;
  const double gn = g.norm();

  for (int k = 1; k <= d.N(); ++k) {
    for (int a = 0; a < 3; ++a) {
      LinExpr lin = LinExpr(m.v[k][a]) - LinExpr(m.v[k - 1][a]);
      for (int l = 0; l < d.n_l; ++l) lin.add(m.lambda[l][k][a], -d.dt * gn);
      P.add_constraint(lin, Sense::kEqual, d.dt * g[a], idx("dyn.lin", {k}) + kAxis[a]);
      LinExpr pos = LinExpr(m.r[k][a]) - LinExpr(m.r[k - 1][a]);
      pos.add(m.v[k][a], -d.dt);
      P.add_constraint(pos, Sense::kEqual, 0.0, idx("dyn.pos", {k}) + kAxis[a]);
    }
  }
  if (!out_.options.angular_dynamics) return;

  // Factor pairs (lever axis, force axis) of each product.
  static const int kPairs[6][2] = {{1, 2}, {2, 1}, {2, 0}, {0, 2}, {0, 1}, {1, 0}};
  for (int k = 1; k <= d.N(); ++k) {
    LinExpr ang[3];
    for (int a = 0; a < 3; ++a) ang[a] = LinExpr(m.k[k][a]) - LinExpr(m.k[k - 1][a]);
    for (int l = 0; l < d.n_l; ++l) {
      LinExpr prod[6];
      for (int q = 0; q < 6; ++q) {
        const int da = kPairs[q][0], fa = kPairs[q][1];
        const LinExpr lever = LinExpr(m.p[l][k][da]) - LinExpr(m.r[k][da]);
        const LinExpr force(m.lambda[l][k][fa]);
        const auto& uq = m.u[l][k][q];
        P.add_quadratic_bound(uq[0], lever + force, idx("decomp+", {l, k, q}));
        P.add_quadratic_bound(uq[1], lever - force, idx("decomp-", {l, k, q}));
        prod[q] = LinExpr().add(uq[0], 0.25).add(uq[1], -0.25);
      }
      ang[0] -= d.dt * (prod[0] - prod[1]);
      ang[1] -= d.dt * (prod[2] - prod[3]);
      ang[2] -= d.dt * (prod[4] - prod[5]);
    }
    for (int a = 0; a < 3; ++a) {
      P.add_constraint(ang[a], Sense::kEqual, 0.0, idx("dyn.ang", {k}) + kAxis[a]);
    }
  }
}

void FormulationBuilder::add_contact_forces() {
  const PlanDims& d = out_.dims;
  MicpProblem& P = out_.problem;
  const VariableMap& m = out_.map;
  const double W = out_.weight;

  auto cone_rows = [&](const LinExpr& trigger, const SafeRegion& reg, int l, int k,
                       const std::string& tag) {
    if (never_active(trigger)) return;
    const auto facets = reg.cone_facets();
    for (std::size_t e = 0; e < facets.size(); ++e) {
      const Eigen::Vector3d& nu = facets[e];
      LinExpr x;
      for (int a = 0; a < 3; ++a) x.add(m.lambda[l][k][a], nu[a]);
      x.add(m.alpha[l][k], -nu.dot(reg.normal));
      P.add_implication(trigger, row(x, Sense::kGreaterEqual, 0.0,
                                     tag + "[" + std::to_string(e) + "]"));
    }
  };

  // Outer pyramid over every region's cone and normal, valid whatever the
  // assignment. Skipped if some cone reaches below the horizontal.
  double kappa = 0.0, nz_min = 1.0;
  bool outer = true;
  for (const SafeRegion& reg : scene_.regions) {
    std::vector<Eigen::Vector3d> rays = reg.cone_edges;
    rays.push_back(reg.normal);
    for (const Eigen::Vector3d& e : rays) {
      if (e.z() <= 1e-9) outer = false;
      kappa = std::max({kappa, std::abs(e.x()) / e.z(), std::abs(e.y()) / e.z()});
    }
    nz_min = std::min(nz_min, reg.normal.z());
  }

  for (int l = 0; l < d.n_l; ++l) {
    const LegParams& leg = robot_.legs[l];
    for (int k = 1; k <= d.N(); ++k) {
      if (outer) {
        const Vec3Id& lam = m.lambda[l][k];
        for (int a = 0; a < 2; ++a) {
          P.add_constraint(LinExpr().add(lam[a], 1.0).add(lam[2], -kappa),
                           Sense::kLessEqual, 0.0, idx("cone.outer", {l, k, a}) + "+");
          P.add_constraint(LinExpr().add(lam[a], -1.0).add(lam[2], -kappa),
                           Sense::kLessEqual, 0.0, idx("cone.outer", {l, k, a}) + "-");
        }
        P.add_constraint(LinExpr().add(m.alpha[l][k], nz_min).add(lam[2], -1.0),
                         Sense::kLessEqual, 0.0, idx("cone.margin", {l, k}));
      }
      for (int q = 0; q < 3; ++q) {
        LinExpr tau;
        for (int a = 0; a < 3; ++a) tau.add(m.lambda[l][k][a], leg.J_nominal(a, q));
        const double lim = leg.tau_max[q] / W;
        P.add_constraint(tau, Sense::kLessEqual, lim, idx("torque", {l, k, q}) + "+");
        P.add_constraint(tau, Sense::kGreaterEqual, -lim, idx("torque", {l, k, q}) + "-");
      }

      cone_rows(initial_active(l, k), scene_.regions[out_.initial_regions[l]], l, k,
                idx("cone.init", {l, k}));
      for (int i = l; i < d.N_f; i += d.n_l) {
        const LinExpr act = active(i, k);
        if (never_active(act)) continue;
        for (int r = 0; r < d.N_r; ++r) {
          cone_rows(act + LinExpr(m.H[i][r]) - LinExpr(1.0), scene_.regions[r], l, k,
                    idx("cone", {i, r, k}));
        }
      }

      if (k != d.touchdown_knot(d.slot_of_knot(k)) && l < d.N_f) {
        const int j = d.slot_of_knot(k);
        LinExpr swinging;
        for (int i = l; i < d.N_f; i += d.n_l) swinging.add(m.T[i][j], 1.0);
        for (int a = 0; a < 3; ++a) {
          P.add_implication(swinging, row(m.lambda[l][k][a], Sense::kEqual, 0.0,
                                          idx("swing.force", {l, k}) + kAxis[a]));
        }
      }
    }
  }
}

void FormulationBuilder::add_objective() {
  const PlanDims& d = out_.dims;
  MicpProblem& P = out_.problem;
  const VariableMap& m = out_.map;
  const Weights& w = task_.weights;
  const double W = out_.weight;
  for (const Eigen::Vector3d* q : {&w.Qv, &w.QF, &w.Qg, &w.Qk}) {
    if ((q->array() < 0).any()) throw ModelError("weights must be nonnegative");
  }
  if (w.qu < 0 || w.qt < 0 || w.qalpha < 0) {
    throw ModelError("weights must be nonnegative");
  }

  LinExpr lin;
  for (int k = 1; k <= d.N(); ++k) {
    for (int a = 0; a < 3; ++a) {
      if (w.Qv[a] > 0) {
        P.add_squared_cost(w.Qv[a],
                           (LinExpr(m.v[k][a]) - LinExpr(m.v[k - 1][a])) * (1.0 / d.dt));
      }
      if (w.Qk[a] > 0 && out_.options.angular_dynamics) {
        P.add_squared_cost(w.Qk[a] * W * W,
                           (LinExpr(m.k[k][a]) - LinExpr(m.k[k - 1][a])) * (1.0 / d.dt));
      }
    }
    for (int l = 0; l < d.n_l; ++l) {
      for (int a = 0; a < 3; ++a) {
        if (w.QF[a] > 0) P.add_squared_cost(w.QF[a] * W * W, m.lambda[l][k][a]);
      }
      if (w.qalpha > 0) lin.add(m.alpha[l][k], -w.qalpha * W);
      if (w.qu > 0 && out_.options.angular_dynamics) {
        for (const auto& uq : m.u[l][k]) lin.add(uq[0], w.qu).add(uq[1], w.qu);
      }
    }
  }
  if (w.qt > 0) {
    for (int i = 0; i < d.N_f; ++i) lin += w.qt * m.slot(i);
  }
  for (int a = 0; a < 3; ++a) {
    if (w.Qg[a] > 0) {
      P.add_squared_cost(w.Qg[a], LinExpr(m.r[d.N()][a]) - LinExpr(task_.goal[a]));
    }
  }
  P.add_linear_cost(lin);
}

Formulation build_formulation(const TerrainScene& scene, const RobotModel& robot,
                              const Task& task, FormulationOptions opts) {
  FormulationBuilder b(scene, robot, task, opts);
  b.allocate();
  b.add_gait_constraints();
  b.add_region_and_reach();
  b.add_swing_and_box();
  b.add_dynamics();
  b.add_contact_forces();
  b.add_objective();
  Formulation f = std::move(b.result());
  if (task.gait == "explicit") {
    f.fix_gait(task.gait_pattern);
  } else if (task.gait != "free") {
    f.fix_gait(gait_preset(task.gait, f.dims.n_l, f.dims.N_f, f.dims.N_t));
  }
  return f;
}

}  // namespace locomip
