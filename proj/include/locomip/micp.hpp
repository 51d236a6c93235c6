#pragma once

// Mixed-integer convex program container: continuous and binary variables,
// linear rows, scalar quadratic epigraphs u >= (c.x + d)^2, big-M
// implications kept symbolically until relaxation, and an objective made of
// weighted squares plus a linear part.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "locomip/errors.hpp"

namespace locomip {

struct VarId {
  int index = -1;
  bool valid() const { return index >= 0; }
  friend bool operator==(VarId a, VarId b) { return a.index == b.index; }
};

struct Term {
  int var;
  double coef;
};

/// Affine expression sum_i coef_i * x_i + constant.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT implicit
  LinExpr(VarId v) { terms_.push_back({v.index, 1.0}); }  // NOLINT implicit

  LinExpr& add(VarId v, double coef) {
    if (coef != 0.0) terms_.push_back({v.index, coef});
    return *this;
  }
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

  /// Merges duplicate variables, sorts by index and drops zero coefficients.
  void canonicalize();

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  bool is_constant() const { return terms_.empty(); }

  double evaluate(std::span<const double> x) const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

enum class Sense : std::uint8_t { kLessEqual, kEqual, kGreaterEqual };

/// expr {<=,=,>=} rhs. After canonicalize() the expression constant is zero.
struct LinearConstraint {
  LinExpr expr;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
  std::string name;

  void canonicalize();
};

/// epigraph >= expr^2
struct QuadraticBound {
  VarId epigraph;
  LinExpr expr;
  std::string name;
};

/// trigger == 1  =>  constraint. The trigger is an affine expression over
/// binaries that takes the value 1 when the implication is active and a
/// value <= 0 otherwise, at every integral point.
struct Implication {
  LinExpr trigger;
  LinearConstraint constraint;
  std::optional<double> big_m;
  std::string name;
};

struct SquaredTerm {
  double weight;
  LinExpr expr;
};

struct Variable {
  std::string name;
  double lower;
  double upper;
  bool binary;
  /// Branching class; higher classes are split first.
  int priority = 0;
};

/// Binary fixings applied on top of a finalized problem (branch-and-bound
/// node state). Never mutates the base problem.
struct BoundOverlay {
  std::vector<std::pair<int, double>> fixings;
};

struct ConstraintRef {
  enum class Kind : std::uint8_t { kLinear, kQuadratic, kImplication };
  Kind kind;
  int index;
};

class MicpProblem {
 public:
  VarId add_continuous(std::string name, double lower, double upper);
  VarId add_binary(std::string name);

  ConstraintRef add_constraint(LinExpr lhs, Sense sense, double rhs,
                               std::string name = {});
  ConstraintRef add_implication(VarId binary, LinearConstraint c,
                                std::optional<double> big_m = std::nullopt);
  ConstraintRef add_implication(LinExpr trigger, LinearConstraint c,
                                std::optional<double> big_m = std::nullopt);
  /// Registers u >= expr^2. Tightens u's lower bound to 0 if it was below.
  ConstraintRef add_quadratic_bound(VarId u, LinExpr expr,
                                    std::string name = {});

  void add_squared_cost(double weight, LinExpr expr);
  void add_linear_cost(const LinExpr& expr);

  void set_bounds(VarId v, double lower, double upper);
  void set_branch_priority(VarId v, int priority);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_binaries() const;
  std::vector<int> binary_indices() const;
  const std::vector<Variable>& vars() const { return vars_; }
  const Variable& var(VarId v) const { return vars_.at(v.index); }
  const std::vector<LinearConstraint>& constraints() const { return rows_; }
  const std::vector<QuadraticBound>& quadratic_bounds() const { return quads_; }
  const std::vector<Implication>& implications() const { return imps_; }
  const std::vector<SquaredTerm>& squared_costs() const { return squares_; }
  const LinExpr& linear_cost() const { return linear_cost_; }

  /// Big-M rows of one implication under the given bounds. Inequalities
  /// come back in <= form; equalities as two <= rows.
  std::vector<LinearConstraint> expand_implication(
      const Implication& imp, std::span<const double> lower,
      std::span<const double> upper) const;

  /// Continuous relaxation: binaries become continuous in [0,1] (or their
  /// fixed value), implications are expanded to big-M rows.
  MicpProblem relax() const { return relax(BoundOverlay{}); }
  MicpProblem relax(const BoundOverlay& overlay) const;

  double objective(std::span<const double> x) const;
  /// Largest violation over bounds, rows, quadratic bounds and (for integral
  /// triggers) implications.
  double max_violation(std::span<const double> x) const;

  /// Human-readable listing, one constraint per line.
  void write_text(std::ostream& os) const;
  std::string to_text() const;

 private:
  void check_expr(const LinExpr& e) const;

  std::vector<Variable> vars_;
  std::vector<LinearConstraint> rows_;
  std::vector<QuadraticBound> quads_;
  std::vector<Implication> imps_;
  std::vector<SquaredTerm> squares_;
  LinExpr linear_cost_;
};

/// Range of an expression over box bounds; +-inf when unbounded.
std::pair<double, double> expr_range(const LinExpr& e,
                                     std::span<const double> lower,
                                     std::span<const double> upper);

}  // namespace locomip
