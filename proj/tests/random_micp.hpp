#pragma once

// Small random MIQCQPs shared by the core and branch-and-bound tests.

#include <random>

#include "locomip/micp.hpp"

namespace locomip::testing {

inline MicpProblem random_miqp(unsigned seed, int n_binaries = 8) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-1, 1);
  MicpProblem p;
  std::vector<VarId> x, b;
  for (int i = 0; i < 4; ++i) {
    x.push_back(p.add_continuous("x" + std::to_string(i), -3, 3));
  }
  for (int k = 0; k < n_binaries; ++k) {
    b.push_back(p.add_binary("b" + std::to_string(k)));
  }
  // Two one-hot groups of three, remaining binaries free.
  for (int grp = 0; grp < 2 && 3 * grp + 2 < n_binaries; ++grp) {
    LinExpr sum;
    for (int k = 0; k < 3; ++k) sum += b[3 * grp + k];
    p.add_constraint(sum, Sense::kEqual, 1.0, "onehot");
  }
  for (int i = 0; i < 4; ++i) {
    p.add_squared_cost(0.5 + std::abs(g(rng)), LinExpr(x[i]) - 2.0 * u(rng));
  }
  LinExpr lin;
  for (int k = 0; k < n_binaries; ++k) {
    lin.add(b[k], u(rng));
    LinExpr lhs;
    for (int i = 0; i < 4; ++i) lhs.add(x[i], g(rng));
    const Sense s = k % 3 == 2 ? Sense::kEqual : Sense::kLessEqual;
    p.add_implication(b[k], LinearConstraint{lhs, s, u(rng)});
  }
  p.add_linear_cost(lin);
  p.add_squared_cost(0.3, LinExpr(x[0]) + b[0] - b[n_binaries - 1]);
  VarId e = p.add_continuous("u", 0, 100);
  p.add_quadratic_bound(e, LinExpr(x[0]) - x[1]);
  p.add_linear_cost(0.5 * LinExpr(e));
  return p;
}

}  // namespace locomip::testing
