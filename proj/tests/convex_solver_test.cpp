#include "locomip/convex_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "locomip/conic_form.hpp"

namespace locomip {
namespace {

TEST(SocScaling, NtIdentity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::Vector3d s(0, u(rng), u(rng)), z(0, u(rng), u(rng));
    s[0] = s.tail<2>().norm() + 0.01 + std::abs(u(rng));
    z[0] = z.tail<2>().norm() + 0.01 + std::abs(u(rng));
    const auto sc = detail::soc_nt_scaling(s, z);
    EXPECT_LT((sc.W * z - sc.W_inv * s).norm(), 1e-10);
    EXPECT_LT((sc.W * sc.W_inv - Eigen::Matrix3d::Identity()).norm(), 1e-10);
  }
}

TEST(ConvexSolver, ActiveBound) {
  MicpProblem p;
  VarId x = p.add_continuous("x", -10, 10);
  p.add_constraint(x, Sense::kGreaterEqual, 3.0);
  p.add_squared_cost(1.0, x);
  const ConvexSolution s = solve_convex(p);
  ASSERT_EQ(s.status, ConvexStatus::kOptimal);
  EXPECT_NEAR(s.x[0], 3.0, 1e-8);
  EXPECT_NEAR(s.objective, 9.0, 1e-8);
}

TEST(ConvexSolver, Infeasible) {
  MicpProblem p;
  VarId x = p.add_continuous("x", -10, 10);
  p.add_constraint(x, Sense::kGreaterEqual, 1.0);
  p.add_constraint(x, Sense::kLessEqual, 0.0);
  p.add_squared_cost(1.0, x);
  EXPECT_EQ(solve_convex(p).status, ConvexStatus::kInfeasible);
}

TEST(ConvexSolver, EpigraphTight) {
  MicpProblem p;
  VarId a = p.add_continuous("a", -10, 10);
  VarId b = p.add_continuous("b", 0.5, 0.5);
  VarId u = p.add_continuous("u", 0, 100);
  p.add_constraint(a, Sense::kEqual, 1.5);
  p.add_quadratic_bound(u, LinExpr(a) + LinExpr(b));
  p.add_linear_cost(u);
  const ConvexSolution s = solve_convex(p);
  ASSERT_EQ(s.status, ConvexStatus::kOptimal);
  EXPECT_NEAR(s.x[u.index], 4.0, 1e-8);
}

}  // namespace
}  // namespace locomip
