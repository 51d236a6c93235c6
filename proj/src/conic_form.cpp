#include "locomip/conic_form.hpp"

#include <cmath>

namespace locomip {
namespace {

constexpr double kConstRowTol = 1e-9;

using Triplets = std::vector<Eigen::Triplet<double>>;

}  // namespace

Eigen::VectorXd ConicForm::expand(const Eigen::VectorXd& reduced) const {
  Eigen::VectorXd x(n_original());
  for (int i = 0; i < n_original(); ++i) {
    x[i] = reduced_index[i] >= 0 ? reduced[reduced_index[i]] : fixed_value[i];
  }
  return x;
}

Eigen::VectorXd ConicForm::reduce(std::span<const double> original) const {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n_original(); ++i) {
    if (reduced_index[i] >= 0) x[reduced_index[i]] = original[i];
  }
  return x;
}

ConicForm build_conic_form(const MicpProblem& problem, double fixed_tol) {
  ConicForm cf;
  const auto& vars = problem.vars();
  const int n0 = problem.num_vars();
  cf.reduced_index.assign(n0, -1);
  cf.fixed_value.assign(n0, 0.0);

  auto fail = [&](std::string why) {
    if (!cf.trivially_infeasible) {
      cf.trivially_infeasible = true;
      cf.infeasible_reason = std::move(why);
    }
  };

  for (int i = 0; i < n0; ++i) {
    const Variable& v = vars[i];
    if (v.lower > v.upper + fixed_tol) {
      fail("empty bounds on " + v.name);
    }
    if (v.upper - v.lower <= fixed_tol) {
      cf.fixed_value[i] = 0.5 * (v.lower + v.upper);
    } else if (v.binary) {
      throw ModelError("convex solve with free binary '" + v.name + "'");
    } else {
      cf.reduced_index[i] = cf.n++;
    }
  }

  // Substitutes fixed variables; returns the folded constant.
  auto reduce_expr = [&](const LinExpr& e, std::vector<Term>& out) {
    out.clear();
    double c = e.constant();
    for (const Term& t : e.terms()) {
      const int r = cf.reduced_index[t.var];
      if (r >= 0) out.push_back({r, t.coef});
      else c += t.coef * cf.fixed_value[t.var];
    }
    return c;
  };

  Triplets a_trip, g_trip, p_trip;
  std::vector<double> b_vals, h_vals;
  std::vector<Term> red;
  int a_rows = 0;
  int g_rows = 0;

  auto add_g_row = [&](const std::vector<Term>& terms, double rhs) {
    for (const Term& t : terms) g_trip.emplace_back(g_rows, t.var, t.coef);
    h_vals.push_back(rhs);
    ++g_rows;
  };

  for (const LinearConstraint& c : problem.constraints()) {
    const double k = reduce_expr(c.expr, red);
    const double rhs = c.rhs - k;
    if (red.empty()) {
      const bool ok = (c.sense == Sense::kLessEqual && rhs >= -kConstRowTol) ||
                      (c.sense == Sense::kGreaterEqual && rhs <= kConstRowTol) ||
                      (c.sense == Sense::kEqual && std::abs(rhs) <= kConstRowTol);
      if (!ok) fail("constant row '" + c.name + "' violated");
      continue;
    }
    switch (c.sense) {
      case Sense::kEqual:
        for (const Term& t : red) a_trip.emplace_back(a_rows, t.var, t.coef);
        b_vals.push_back(rhs);
        ++a_rows;
        break;
      case Sense::kLessEqual:
        add_g_row(red, rhs);
        break;
      case Sense::kGreaterEqual:
        for (Term& t : red) t.coef = -t.coef;
        add_g_row(red, -rhs);
        break;
    }
  }

  // u >= 0 already follows from the cone of u >= (c.x + d)^2.
  std::vector<char> epigraph(n0, 0);
  for (const QuadraticBound& qb : problem.quadratic_bounds()) {
    epigraph[qb.epigraph.index] = 1;
  }
  for (int i = 0; i < n0; ++i) {
    const int r = cf.reduced_index[i];
    if (r < 0) continue;
    const bool implied = epigraph[i] && vars[i].lower <= 0.0;
    if (std::isfinite(vars[i].lower) && !implied) add_g_row({{r, -1.0}}, -vars[i].lower);
    if (std::isfinite(vars[i].upper)) add_g_row({{r, 1.0}}, vars[i].upper);
  }
  cf.n_orthant = g_rows;

  for (const QuadraticBound& qb : problem.quadratic_bounds()) {
    const int u = qb.epigraph.index;
    const double k = reduce_expr(qb.expr, red);
    if (cf.reduced_index[u] < 0 && red.empty()) {
      if (cf.fixed_value[u] < k * k - kConstRowTol) {
        fail("fixed quadratic bound '" + qb.name + "' violated");
      }
      continue;
    }
    // s = h - Gx = (u + 1, u - 1, 2(c.x + d))
    const int ur = cf.reduced_index[u];
    const double uf = ur < 0 ? cf.fixed_value[u] : 0.0;
    std::vector<Term> row_u;
    if (ur >= 0) row_u.push_back({ur, -1.0});
    add_g_row(row_u, 1.0 + uf);
    add_g_row(row_u, uf - 1.0);
    for (Term& t : red) t.coef *= -2.0;
    add_g_row(red, 2.0 * k);
    ++cf.n_soc;
  }

  // Objective: sum w (c.x + d)^2 -> 1/2 x'Px + q'x + q0.
  cf.q = Eigen::VectorXd::Zero(cf.n);
  for (const SquaredTerm& sq : problem.squared_costs()) {
    const double d = reduce_expr(sq.expr, red);
    for (const Term& a : red) {
      for (const Term& b : red) {
        p_trip.emplace_back(a.var, b.var, 2.0 * sq.weight * a.coef * b.coef);
      }
      cf.q[a.var] += 2.0 * sq.weight * d * a.coef;
    }
    cf.q0 += sq.weight * d * d;
  }
  cf.q0 += reduce_expr(problem.linear_cost(), red);
  for (const Term& t : red) cf.q[t.var] += t.coef;

  cf.P.resize(cf.n, cf.n);
  cf.P.setFromTriplets(p_trip.begin(), p_trip.end());
  cf.A.resize(a_rows, cf.n);
  cf.A.setFromTriplets(a_trip.begin(), a_trip.end());
  cf.b = Eigen::Map<Eigen::VectorXd>(b_vals.data(), a_rows);
  cf.G.resize(g_rows, cf.n);
  cf.G.setFromTriplets(g_trip.begin(), g_trip.end());
  cf.h = Eigen::Map<Eigen::VectorXd>(h_vals.data(), g_rows);
  return cf;
}

}  // namespace locomip
