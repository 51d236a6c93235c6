#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "locomip/plan.hpp"

namespace locomip {
namespace {

using Eigen::Vector3d;

// Running maximum per constraint family, keeping the worst location.
class Residuals {
 public:
  void add(const std::string& family, double value, int knot = -1, int index = -1) {
    auto [it, fresh] = worst_.try_emplace(family);
    if (fresh) order_.push_back(family);
    FamilyResidual& f = it->second;
    f.family = family;
    if (fresh || value > f.max_residual) {
      f.max_residual = std::max(0.0, value);
      if (value > 0) {
        f.knot = knot;
        f.index = index;
      }
    }
  }
  std::vector<FamilyResidual> take(double tol) {
    std::vector<FamilyResidual> out;
    for (const auto& name : order_) {
      FamilyResidual f = worst_[name];
      f.pass = f.max_residual <= tol;
      out.push_back(f);
    }
    return out;
  }

 private:
  std::map<std::string, FamilyResidual> worst_;
  std::vector<std::string> order_;
};

// Chord interpolation of sin/cos on n equal segments of [lo, hi].
std::pair<double, double> chord_trig(double theta, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  int k = static_cast<int>(std::floor((theta - lo) / h));
  k = std::clamp(k, 0, n - 1);
  const double a = lo + k * h;
  const double b = k == n - 1 ? hi : lo + (k + 1) * h;
  const double w = (theta - a) / (b - a);
  return {std::sin(a) + w * (std::sin(b) - std::sin(a)),
          std::cos(a) + w * (std::cos(b) - std::cos(a))};
}

double axis_excess(double value, double lo, double hi) {
  return std::max({0.0, value - hi, lo - value});
}

}  // namespace

const FamilyResidual* ValidationReport::find(const std::string& family) const {
  for (const auto& f : families) {
    if (f.family == family) return &f;
  }
  return nullptr;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  char buf[160];
  for (const auto& f : families) {
    std::snprintf(buf, sizeof buf, "%-20s %.3e %s", f.family.c_str(), f.max_residual,
                  f.pass ? "ok" : "FAIL");
    os << buf;
    if (!f.pass && f.knot >= 0) os << " (knot " << f.knot << ", index " << f.index << ")";
    os << '\n';
  }
  std::snprintf(buf, sizeof buf,
                "min decomposition slack %.3e, cross-product gap %.3e, exact-trig reach "
                "%.3e m\n",
                min_tightness, max_cross_gap, exact_trig_reach);
  os << buf << (passed ? "PASS" : "FAIL") << '\n';
  return os.str();
}

ValidationReport validate(const LocomotionPlan& plan, const TerrainScene& scene,
                          const RobotModel& robot, const Tolerances& tol) {
  ValidationReport rep;
  Residuals res;
  const PlanDims& d = plan.dims;
  const int N = d.N();
  const int nl = d.n_l;
  const double W = robot.mass * scene.gravity.norm();
  const double tiny = 1e-300;

  auto shape_ok = [&] {
    if (nl != robot.n_legs() || static_cast<int>(plan.com.size()) != N + 1 ||
        static_cast<int>(plan.foot.size()) != nl || static_cast<int>(plan.force.size()) != nl) {
      return false;
    }
    for (int l = 0; l < nl; ++l) {
      if (static_cast<int>(plan.foot[l].size()) != N + 1 ||
          static_cast<int>(plan.force[l].size()) != N + 1 ||
          static_cast<int>(plan.alpha[l].size()) != N + 1) {
        return false;
      }
    }
    return true;
  };
  if (!shape_ok()) {
    rep.families.push_back({"shape", 1.0, -1, -1, false});
    rep.passed = false;
    return rep;
  }

  // Initial state.
  double init = (plan.com[0] - robot.initial_com).lpNorm<Eigen::Infinity>();
  init = std::max(init, plan.vel[0].lpNorm<Eigen::Infinity>());
  for (int l = 0; l < nl; ++l) {
    init = std::max(init, (plan.foot[l][0] - robot.initial_feet[l]).lpNorm<Eigen::Infinity>());
  }
  res.add("initial", init, 0);
  for (int k = 1; k <= N; ++k) {
    res.add("time", std::abs(plan.time[k] - plan.time[k - 1] - d.dt), k);
  }

  // Gait: every contact once, ordered per leg.
  std::vector<int> seen(d.N_f, 0);
  for (const ContactEntry& e : plan.schedule) {
    if (e.contact >= 0 && e.contact < d.N_f) ++seen[e.contact];
    res.add("gait.leg", e.leg == e.contact % nl ? 0.0 : 1.0, -1, e.contact);
  }
  for (int i = 0; i < d.N_f; ++i) res.add("gait.once", std::abs(seen[i] - 1.0), -1, i);
  for (const ContactEntry& e : plan.schedule) {
    for (const ContactEntry& prev : plan.schedule) {
      if (prev.contact == e.contact - nl) {
        res.add("gait.order", static_cast<double>(prev.slot + 1 - e.slot), -1, e.contact);
      }
    }
  }

  // Footholds, reach and PWL trig.
  for (const ContactEntry& e : plan.schedule) {
    if (e.region < 0 || e.region >= scene.num_regions()) {
      res.add("region", 1.0, -1, e.contact);
      continue;
    }
    const SafeRegion& reg = scene.regions[e.region];
    res.add("region", (reg.A * e.position - reg.b).maxCoeff(), -1, e.contact);

    const auto [s_ref, c_ref] = chord_trig(e.theta, plan.yaw_lo, plan.yaw_hi, d.N_s);
    res.add("trig", std::max(std::abs(e.s - s_ref), std::abs(e.c - c_ref)), -1, e.contact);
    res.add("trig.range", axis_excess(e.theta, plan.yaw_lo, plan.yaw_hi), -1, e.contact);

    const LegParams& leg = robot.legs[e.leg];
    const int td = d.touchdown_knot(e.slot);
    res.add("reach.com", (plan.com[td].head<2>() - e.com_xy).lpNorm<Eigen::Infinity>(), td,
            e.contact);
    const double L = leg.L, ph = leg.phi;
    const double hx = e.com_xy.x() + L * (e.c * std::cos(ph) - e.s * std::sin(ph));
    const double hy = e.com_xy.y() + L * (e.s * std::cos(ph) + e.c * std::sin(ph));
    const double reach = std::max(std::abs(e.position.x() - hx), std::abs(e.position.y() - hy));
    res.add("reach", reach - robot.d_lim, td, e.contact);
    const double ex = e.com_xy.x() + L * std::cos(e.theta + ph);
    const double ey = e.com_xy.y() + L * std::sin(e.theta + ph);
    rep.exact_trig_reach =
        std::max(rep.exact_trig_reach,
                 std::max(std::abs(e.position.x() - ex), std::abs(e.position.y() - ey)) -
                     robot.d_lim);

    res.add("swing.land", (plan.foot[e.leg][td] - e.position).lpNorm<Eigen::Infinity>(), td,
            e.contact);
  }

  for (int l = 0; l < nl; ++l) {
    for (int k = 1; k <= N; ++k) {
      bool lands = false;
      for (const ContactEntry& e : plan.schedule) {
        lands = lands || (e.leg == l && d.touchdown_knot(e.slot) == k);
      }
      if (!lands) {
        res.add("swing.hold", (plan.foot[l][k] - plan.foot[l][k - 1]).lpNorm<Eigen::Infinity>(),
                k, l);
      }
    }
  }

  // Dynamics, box, forces.
  const int initial_region_missing = -1;
  std::vector<int> initial_region(nl, initial_region_missing);
  for (int l = 0; l < nl; ++l) initial_region[l] = scene.locate(robot.initial_feet[l]);

  rep.min_tightness = 0.0;
  bool first_tight = true;
  for (int k = 1; k <= N; ++k) {
    Vector3d mean = Vector3d::Zero();
    for (int l = 0; l < nl; ++l) mean += plan.foot[l][k];
    mean /= nl;
    const Vector3d rel = plan.com[k] - mean;
    double box = 0.0;
    for (int a = 0; a < 3; ++a) {
      box = std::max(box, axis_excess(rel[a], robot.box_min[a], robot.box_max[a]));
    }
    res.add("box", box, k);

    Vector3d total = Vector3d::Zero();
    for (int l = 0; l < nl; ++l) total += plan.force[l][k];
    const Vector3d lin =
        robot.mass * (plan.vel[k] - plan.vel[k - 1]) / d.dt - robot.mass * scene.gravity - total;
    res.add("dynamics.linear", lin.lpNorm<Eigen::Infinity>() / W, k);
    res.add("dynamics.position",
            (plan.com[k] - plan.com[k - 1] - d.dt * plan.vel[k]).lpNorm<Eigen::Infinity>(), k);

    if (plan.angular_dynamics) {
      Vector3d decomposed = Vector3d::Zero();
      Vector3d exact = Vector3d::Zero();
      for (int l = 0; l < nl; ++l) {
        const Vector3d lever = plan.foot[l][k] - plan.com[k];
        const Vector3d f = plan.force[l][k] / W;
        exact += lever.cross(f);
        const Products& pr = plan.products[l][k];
        auto prod = [&](int q) { return 0.25 * (pr[q][0] - pr[q][1]); };
        decomposed += Vector3d(prod(0) - prod(1), prod(2) - prod(3), prod(4) - prod(5));
        static const int kLever[6] = {1, 2, 2, 0, 0, 1};
        static const int kForce[6] = {2, 1, 0, 2, 1, 0};
        for (int q = 0; q < 6; ++q) {
          const double a = lever[kLever[q]], b = f[kForce[q]];
          const double slack = std::min(pr[q][0] - (a + b) * (a + b), pr[q][1] - (a - b) * (a - b));
          if (first_tight || slack < rep.min_tightness) rep.min_tightness = slack;
          first_tight = false;
          res.add("decomposition", tol.tightness - slack, k, l);
        }
      }
      const Vector3d rate = plan.ang_rate[k] / W;
      res.add("dynamics.angular", (rate - decomposed).lpNorm<Eigen::Infinity>(), k);
      res.add("dynamics.ang_integral",
              ((plan.ang[k] - plan.ang[k - 1]) / d.dt - plan.ang_rate[k]).lpNorm<Eigen::Infinity>() /
                  W,
              k);
      rep.max_cross_gap = std::max(rep.max_cross_gap, (exact - decomposed).lpNorm<Eigen::Infinity>());
    }

    for (int l = 0; l < nl; ++l) {
      const Vector3d& F = plan.force[l][k];
      const double a = plan.alpha[l][k];
      const LegParams& leg = robot.legs[l];
      const Vector3d tau = leg.J_nominal.transpose() * F;
      double tq = 0.0;
      for (int q = 0; q < 3; ++q) {
        tq = std::max(tq, (std::abs(tau[q]) - leg.tau_max[q]) / std::max(leg.tau_max[q], tiny));
      }
      res.add("torque", tq, k, l);
      if (plan.swinging(l, k)) res.add("swing.force", F.lpNorm<Eigen::Infinity>() / W, k, l);
      res.add("alpha.nonnegative", -a / W, k, l);

      const int sc = plan.support_contact(l, k);
      const int region = sc >= 0 ? plan.schedule[sc].region : initial_region[l];
      if (region < 0 || region >= scene.num_regions()) {
        res.add("cone", 1.0, k, l);
        continue;
      }
      const double exact_margin_value = exact_margin(F, scene.regions[region]);
      res.add("cone", (a - exact_margin_value) / W, k, l);
      const double mag = F.norm();
      rep.margins.push_back({l, k, a, exact_margin_value, mag > 0 ? a / mag : 0.0});
    }
  }

  rep.families = res.take(tol.residual);
  // The decomposition family is already offset by its own threshold.
  for (auto& f : rep.families) {
    if (f.family == "decomposition") f.pass = f.max_residual <= 0.0;
    rep.passed = rep.passed && f.pass;
  }
  return rep;
}

}  // namespace locomip
