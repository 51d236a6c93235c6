#include "locomip/micp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace locomip {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kActiveTol = 1e-9;

const char* sense_str(Sense s) {
  switch (s) {
    case Sense::kLessEqual: return "<=";
    case Sense::kEqual: return "=";
    case Sense::kGreaterEqual: return ">=";
  }
  return "?";
}

double row_violation(const LinearConstraint& c, std::span<const double> x) {
  const double v = c.expr.evaluate(x) - c.rhs;
  switch (c.sense) {
    case Sense::kLessEqual: return std::max(0.0, v);
    case Sense::kGreaterEqual: return std::max(0.0, -v);
    case Sense::kEqual: return std::abs(v);
  }
  return 0.0;
}

}  // namespace

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  terms_.reserve(terms_.size() + o.terms_.size());
  for (const Term& t : o.terms_) terms_.push_back({t.var, -t.coef});
  constant_ -= o.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (Term& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

void LinExpr::canonicalize() {
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const Term& t : terms_) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  terms_ = std::move(merged);
}

double LinExpr::evaluate(std::span<const double> x) const {
  double v = constant_;
  for (const Term& t : terms_) v += t.coef * x[t.var];
  return v;
}

void LinearConstraint::canonicalize() {
  expr.canonicalize();
  rhs -= expr.constant();
  expr.add_constant(-expr.constant());
}

std::pair<double, double> expr_range(const LinExpr& e,
                                     std::span<const double> lower,
                                     std::span<const double> upper) {
  double lo = e.constant();
  double hi = e.constant();
  for (const Term& t : e.terms()) {
    const double a = t.coef * lower[t.var];
    const double b = t.coef * upper[t.var];
    lo += std::min(a, b);
    hi += std::max(a, b);
    if (std::isnan(lo)) lo = -kInf;
    if (std::isnan(hi)) hi = kInf;
  }
  return {lo, hi};
}

VarId MicpProblem::add_continuous(std::string name, double lower,
                                  double upper) {
  if (lower > upper) {
    throw ModelError("variable '" + name + "' has empty bounds");
  }
  vars_.push_back({std::move(name), lower, upper, false, 0});
  return VarId{num_vars() - 1};
}

VarId MicpProblem::add_binary(std::string name) {
  vars_.push_back({std::move(name), 0.0, 1.0, true, 0});
  return VarId{num_vars() - 1};
}

void MicpProblem::check_expr(const LinExpr& e) const {
  for (const Term& t : e.terms()) {
    if (t.var < 0 || t.var >= num_vars()) {
      throw ModelError("expression references unknown variable " +
                       std::to_string(t.var));
    }
  }
}

ConstraintRef MicpProblem::add_constraint(LinExpr lhs, Sense sense, double rhs,
                                          std::string name) {
  check_expr(lhs);
  LinearConstraint c{std::move(lhs), sense, rhs, std::move(name)};
  c.canonicalize();
  rows_.push_back(std::move(c));
  return {ConstraintRef::Kind::kLinear, static_cast<int>(rows_.size()) - 1};
}

ConstraintRef MicpProblem::add_implication(VarId binary, LinearConstraint c,
                                           std::optional<double> big_m) {
  if (!var(binary).binary) {
    throw ModelError("implication trigger '" + var(binary).name +
                     "' is not binary");
  }
  return add_implication(LinExpr(binary), std::move(c), big_m);
}

ConstraintRef MicpProblem::add_implication(LinExpr trigger, LinearConstraint c,
                                           std::optional<double> big_m) {
  check_expr(trigger);
  check_expr(c.expr);
  trigger.canonicalize();
  for (const Term& t : trigger.terms()) {
    if (!vars_[t.var].binary) {
      throw ModelError("implication trigger uses continuous variable '" +
                       vars_[t.var].name + "'");
    }
  }
  c.canonicalize();
  Implication imp{std::move(trigger), std::move(c), big_m, {}};
  imp.name = imp.constraint.name;
  if (!big_m) {
    // Fails loudly now rather than at relax time.
    std::vector<double> lo(vars_.size()), hi(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      lo[i] = vars_[i].lower;
      hi[i] = vars_[i].upper;
    }
    (void)expand_implication(imp, lo, hi);
  }
  imps_.push_back(std::move(imp));
  return {ConstraintRef::Kind::kImplication,
          static_cast<int>(imps_.size()) - 1};
}

ConstraintRef MicpProblem::add_quadratic_bound(VarId u, LinExpr expr,
                                               std::string name) {
  check_expr(expr);
  if (!u.valid() || u.index >= num_vars()) {
    throw ModelError("quadratic bound epigraph is not a variable");
  }
  expr.canonicalize();
  Variable& uv = vars_[u.index];
  if (uv.lower < 0.0) uv.lower = 0.0;
  if (uv.upper < uv.lower) {
    throw ModelError("epigraph '" + uv.name + "' cannot be nonnegative");
  }
  quads_.push_back({u, std::move(expr), std::move(name)});
  return {ConstraintRef::Kind::kQuadratic, static_cast<int>(quads_.size()) - 1};
}

void MicpProblem::add_squared_cost(double weight, LinExpr expr) {
  if (weight < 0.0) throw ModelError("negative squared-cost weight");
  if (weight == 0.0) return;
  check_expr(expr);
  expr.canonicalize();
  squares_.push_back({weight, std::move(expr)});
}

void MicpProblem::add_linear_cost(const LinExpr& expr) {
  check_expr(expr);
  linear_cost_ += expr;
  linear_cost_.canonicalize();
}

void MicpProblem::set_bounds(VarId v, double lower, double upper) {
  if (lower > upper) {
    throw ModelError("variable '" + var(v).name + "' has empty bounds");
  }
  vars_.at(v.index).lower = lower;
  vars_.at(v.index).upper = upper;
}

void MicpProblem::set_branch_priority(VarId v, int priority) {
  vars_.at(v.index).priority = priority;
}

int MicpProblem::num_binaries() const {
  return static_cast<int>(std::count_if(
      vars_.begin(), vars_.end(), [](const Variable& v) { return v.binary; }));
}

std::vector<int> MicpProblem::binary_indices() const {
  std::vector<int> out;
  for (int i = 0; i < num_vars(); ++i) {
    if (vars_[i].binary) out.push_back(i);
  }
  return out;
}

std::vector<LinearConstraint> MicpProblem::expand_implication(
    const Implication& imp, std::span<const double> lower,
    std::span<const double> upper) const {
  std::vector<LinearConstraint> out;
  const LinearConstraint& c = imp.constraint;
  const auto [lo, hi] = expr_range(c.expr, lower, upper);

  auto emit = [&](const LinExpr& lhs, double rhs, double derived_m,
                  const char* suffix) {
    double m = 0.0;
    if (imp.big_m) {
      m = *imp.big_m;
    } else {
      if (!std::isfinite(derived_m)) {
        throw ModelError("cannot derive big-M for implication '" + imp.name +
                         "': unbounded variable");
      }
      // Already implied by the bounds; nothing to emit.
      if (derived_m <= 0.0) return;
      m = derived_m;
    }
    LinearConstraint row{lhs, Sense::kLessEqual, rhs + m, imp.name + suffix};
    row.expr += imp.trigger * m;
    row.canonicalize();
    out.push_back(std::move(row));
  };

  if (c.sense == Sense::kLessEqual || c.sense == Sense::kEqual) {
    emit(c.expr, c.rhs, hi - c.rhs, c.sense == Sense::kEqual ? "[le]" : "");
  }
  if (c.sense == Sense::kGreaterEqual || c.sense == Sense::kEqual) {
    emit(-c.expr, -c.rhs, c.rhs - lo, c.sense == Sense::kEqual ? "[ge]" : "");
  }
  return out;
}

MicpProblem MicpProblem::relax(const BoundOverlay& overlay) const {
  MicpProblem out;
  out.vars_ = vars_;
  for (const auto& [idx, value] : overlay.fixings) {
    Variable& v = out.vars_.at(idx);
    if (!v.binary) throw ModelError("overlay fixes a continuous variable");
    v.lower = value;
    v.upper = value;
  }
  for (Variable& v : out.vars_) v.binary = false;
  out.rows_ = rows_;
  out.quads_ = quads_;
  out.squares_ = squares_;
  out.linear_cost_ = linear_cost_;

  std::vector<double> lo(out.vars_.size()), hi(out.vars_.size());
  for (std::size_t i = 0; i < out.vars_.size(); ++i) {
    lo[i] = out.vars_[i].lower;
    hi[i] = out.vars_[i].upper;
  }
  for (const Implication& imp : imps_) {
    const auto [tlo, thi] = expr_range(imp.trigger, lo, hi);
    if (tlo == thi && tlo >= 1.0 - kActiveTol) {
      out.rows_.push_back(imp.constraint);
      continue;
    }
    if (thi <= kActiveTol && !imp.big_m) continue;
    for (LinearConstraint& row : expand_implication(imp, lo, hi)) {
      out.rows_.push_back(std::move(row));
    }
  }
  return out;
}

double MicpProblem::objective(std::span<const double> x) const {
  double v = linear_cost_.evaluate(x);
  for (const SquaredTerm& s : squares_) {
    const double e = s.expr.evaluate(x);
    v += s.weight * e * e;
  }
  return v;
}

double MicpProblem::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int i = 0; i < num_vars(); ++i) {
    worst = std::max({worst, vars_[i].lower - x[i], x[i] - vars_[i].upper});
    if (vars_[i].binary) {
      worst = std::max(worst, std::abs(x[i] - std::round(x[i])));
    }
  }
  for (const LinearConstraint& c : rows_) {
    worst = std::max(worst, row_violation(c, x));
  }
  for (const QuadraticBound& q : quads_) {
    const double e = q.expr.evaluate(x);
    worst = std::max(worst, e * e - x[q.epigraph.index]);
  }
  for (const Implication& imp : imps_) {
    if (imp.trigger.evaluate(x) >= 1.0 - 1e-6) {
      worst = std::max(worst, row_violation(imp.constraint, x));
    }
  }
  return worst;
}

void MicpProblem::write_text(std::ostream& os) const {
  auto name_of = [&](int v) -> const std::string& { return vars_[v].name; };
  auto expr_text = [&](const LinExpr& e) {
    std::ostringstream ss;
    ss.precision(12);
    bool first = true;
    for (const Term& t : e.terms()) {
      if (!first) ss << (t.coef < 0 ? " - " : " + ");
      else if (t.coef < 0) ss << "-";
      ss << std::abs(t.coef) << " " << name_of(t.var);
      first = false;
    }
    if (e.constant() != 0.0 || first) {
      if (!first) ss << (e.constant() < 0 ? " - " : " + ") << std::abs(e.constant());
      else ss << e.constant();
    }
    return ss.str();
  };
  os.precision(12);
  for (int i = 0; i < num_vars(); ++i) {
    const Variable& v = vars_[i];
    os << "var " << v.name << " " << (v.binary ? "binary" : "continuous")
       << " [" << v.lower << ", " << v.upper << "]\n";
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const LinearConstraint& c = rows_[i];
    os << "row r" << i << " " << c.name << ": " << expr_text(c.expr) << " "
       << sense_str(c.sense) << " " << c.rhs << "\n";
  }
  for (std::size_t i = 0; i < quads_.size(); ++i) {
    os << "quad q" << i << " " << quads_[i].name << ": "
       << name_of(quads_[i].epigraph.index) << " >= ("
       << expr_text(quads_[i].expr) << ")^2\n";
  }
  for (std::size_t i = 0; i < imps_.size(); ++i) {
    const Implication& imp = imps_[i];
    os << "imp i" << i << " " << imp.name << ": [" << expr_text(imp.trigger)
       << "] => " << expr_text(imp.constraint.expr) << " "
       << sense_str(imp.constraint.sense) << " " << imp.constraint.rhs;
    if (imp.big_m) os << " M=" << *imp.big_m;
    os << "\n";
  }
  for (const SquaredTerm& s : squares_) {
    os << "obj " << s.weight << " * (" << expr_text(s.expr) << ")^2\n";
  }
  if (!linear_cost_.is_constant() || linear_cost_.constant() != 0.0) {
    os << "obj " << expr_text(linear_cost_) << "\n";
  }
}

std::string MicpProblem::to_text() const {
  std::ostringstream ss;
  write_text(ss);
  return ss.str();
}

}  // namespace locomip
