#include "locomip/bnb.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "locomip/convex_solver.hpp"
#include "random_micp.hpp"

namespace locomip {
namespace {

BnbOptions tight() {
  BnbOptions o;
  o.gap_tol = 1e-9;
  return o;
}

TEST(Bnb, SymmetricTieGoesToZero) {
  MicpProblem p;
  VarId x = p.add_binary("x");
  p.add_squared_cost(1.0, LinExpr(x) - 0.5);
  const MicpSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_EQ(s.x[x.index], 0.0);
  EXPECT_NEAR(s.objective, 0.25, 1e-9);
}

TEST(Bnb, NoBinariesIsOneNode) {
  MicpProblem p;
  VarId x = p.add_continuous("x", -10, 10);
  p.add_constraint(x, Sense::kGreaterEqual, 3.0);
  p.add_squared_cost(1.0, x);
  const MicpSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_EQ(s.nodes, 1);
  EXPECT_NEAR(s.objective, solve_convex(p).objective, 1e-12);
}

TEST(Bnb, MatchesEnumerationOnRandomInstances) {
  int optimal = 0;
  for (unsigned seed = 0; seed < 50; ++seed) {
    const MicpProblem p = testing::random_miqp(seed, 8);
    const MicpSolution e = enumerate_bruteforce(p);
    const MicpSolution s = solve(p, tight());
    ASSERT_EQ(s.status == SolveStatus::kOptimal,
              e.status == SolveStatus::kOptimal) << "seed " << seed;
    if (e.status != SolveStatus::kOptimal) continue;
    ++optimal;
    EXPECT_NEAR(s.objective, e.objective,
                1e-6 * std::max(1.0, std::abs(e.objective)))
        << "seed " << seed;
    EXPECT_LE(p.max_violation(s.x), 1e-6);
    for (int v : p.binary_indices()) {
      EXPECT_TRUE(s.x[v] == 0.0 || s.x[v] == 1.0);
    }
  }
  EXPECT_GT(optimal, 25);
}

TEST(Bnb, EventLogInvariants) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const MicpProblem p = testing::random_miqp(seed, 8);
    const MicpSolution e = enumerate_bruteforce(p);
    if (e.status != SolveStatus::kOptimal) continue;
    std::vector<BnbEvent> events;
    BnbOptions o = tight();
    o.on_event = [&](const BnbEvent& ev) { events.push_back(ev); };
    const MicpSolution s = solve(p, o);
    ASSERT_FALSE(events.empty());
    double last_lb = -INFINITY, last_inc = INFINITY;
    const double tol = 1e-7 * std::max(1.0, std::abs(e.objective));
    for (const auto& ev : events) {
      EXPECT_LE(ev.global_bound, e.objective + tol);
      EXPECT_GE(ev.incumbent, e.objective - tol);
      EXPECT_GE(ev.global_bound, last_lb);
      EXPECT_LE(ev.incumbent, last_inc);
      if (!std::isnan(ev.relaxation)) EXPECT_GE(ev.bound, ev.relaxation - 1e-12);
      last_lb = ev.global_bound;
      last_inc = ev.incumbent;
      EXPECT_FALSE(format_event(ev).empty());
    }
    EXPECT_LE(s.lower_bound, s.objective);
  }
}

TEST(Bnb, ChildrenBoundAboveParent) {
  const MicpProblem p = testing::random_miqp(4, 8);
  const ConvexSolution parent = solve_convex(p.relax());
  ASSERT_EQ(parent.status, ConvexStatus::kOptimal);
  for (int v : p.binary_indices()) {
    for (double val : {0.0, 1.0}) {
      const ConvexSolution c = solve_convex(p.relax(BoundOverlay{{{v, val}}}));
      if (c.status == ConvexStatus::kOptimal) {
        EXPECT_GE(c.objective, parent.objective - 1e-7);
      }
    }
  }
}

TEST(Bnb, DeterministicSingleWorker) {
  const MicpProblem p = testing::random_miqp(7, 8);
  auto trace = [&] {
    std::vector<std::string> lines;
    BnbOptions o = tight();
    o.on_event = [&](const BnbEvent& e) { lines.push_back(format_event(e)); };
    solve(p, o);
    return lines;
  };
  EXPECT_EQ(trace(), trace());
}

TEST(Bnb, ParallelWorkersAgree) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const MicpProblem p = testing::random_miqp(seed, 8);
    BnbOptions o = tight();
    const MicpSolution a = solve(p, o);
    o.workers = 3;
    const MicpSolution b = solve(p, o);
    ASSERT_EQ(a.status, b.status);
    if (a.status == SolveStatus::kOptimal) {
      EXPECT_NEAR(a.objective, b.objective, 1e-6 * std::max(1.0, std::abs(a.objective)));
    }
  }
}

TEST(Bnb, NodeLimitReportsGap) {
  const MicpProblem p = testing::random_miqp(3, 8);
  BnbOptions o = tight();
  o.node_limit = 2;
  const MicpSolution s = solve(p, o);
  EXPECT_EQ(s.status, SolveStatus::kNodeLimit);
  EXPECT_LE(s.nodes, 2);
  if (s.has_incumbent) EXPECT_GE(s.gap, 0.0);
}

TEST(Bnb, InfeasibleRoot) {
  MicpProblem p;
  VarId a = p.add_binary("a");
  VarId b = p.add_binary("b");
  p.add_constraint(LinExpr(a) + b, Sense::kGreaterEqual, 3.0);
  EXPECT_EQ(solve(p).status, SolveStatus::kInfeasible);
}

TEST(Enumerate, OneHotPrunesAssignments) {
  MicpProblem p;
  VarId b0 = p.add_binary("b0");
  VarId b1 = p.add_binary("b1");
  p.add_constraint(LinExpr(b0) + b1, Sense::kEqual, 1.0);
  p.add_squared_cost(1.0, LinExpr(b0) - 0.2);
  const MicpSolution s = enumerate_bruteforce(p);
  EXPECT_EQ(s.convex_solves, 2);
  EXPECT_EQ(s.x[b0.index], 0.0);
  EXPECT_EQ(s.x[b1.index], 1.0);
}

TEST(Enumerate, AllInfeasible) {
  MicpProblem p;
  VarId x = p.add_continuous("x", 0, 1);
  VarId b = p.add_binary("b");
  p.add_implication(b, LinearConstraint{x, Sense::kGreaterEqual, 2.0}, 5.0);
  p.add_implication(LinExpr(1.0) - b, LinearConstraint{x, Sense::kGreaterEqual, 2.0},
                    5.0);
  EXPECT_EQ(enumerate_bruteforce(p).status, SolveStatus::kInfeasible);
  EXPECT_EQ(solve(p).status, SolveStatus::kInfeasible);
}

TEST(Enumerate, TooManyBinaries) {
  MicpProblem p;
  for (int i = 0; i < 21; ++i) p.add_binary("b");
  EXPECT_THROW(enumerate_bruteforce(p), ModelError);
}

TEST(Seed, OptimalSeedDoesNotAddNodes) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const MicpProblem p = testing::random_miqp(seed, 8);
    const MicpSolution base = solve(p, tight());
    if (base.status != SolveStatus::kOptimal) continue;
    BnbOptions o = tight();
    for (int v : p.binary_indices()) o.seed_assignment.emplace_back(v, base.x[v]);
    const MicpSolution seeded = solve(p, o);
    EXPECT_TRUE(seeded.seed_accepted);
    EXPECT_LE(seeded.nodes, base.nodes);
    EXPECT_NEAR(seeded.objective, base.objective, 1e-6 * std::max(1.0, std::abs(base.objective)));
  }
}

TEST(Seed, RejectsOneHotViolation) {
  const MicpProblem p = testing::random_miqp(1, 8);
  const auto bins = p.binary_indices();
  const SeedResult r = seed_incumbent(p, {{bins[0], 1.0}, {bins[1], 1.0}});
  EXPECT_FALSE(r.accepted);
  EXPECT_FALSE(r.reason.empty());
  BnbOptions o = tight();
  o.seed_assignment = {{bins[0], 1.0}, {bins[1], 1.0}};
  const MicpSolution s = solve(p, o);
  EXPECT_FALSE(s.seed_accepted);
  EXPECT_NEAR(s.objective, solve(p, tight()).objective, 1e-9);
}

TEST(Seed, EmptySeedIsUnseeded) {
  const MicpProblem p = testing::random_miqp(2, 8);
  EXPECT_FALSE(seed_incumbent(p, {}).accepted);
  const MicpSolution a = solve(p, tight());
  BnbOptions o = tight();
  o.seed_assignment = {};
  const MicpSolution b = solve(p, o);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(Backends, AgreeOnRandomRelaxations) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const MicpProblem r = testing::random_miqp(seed, 8).relax();
    const ConvexSolution a = solve_convex(r, nullptr, "reference");
    const ConvexSolution b = solve_convex(r, nullptr, "dense");
    ASSERT_EQ(a.status, b.status);
    if (a.status == ConvexStatus::kOptimal) {
      EXPECT_NEAR(a.objective, b.objective, 1e-6);
    }
  }
  EXPECT_THROW(solve_convex(testing::random_miqp(0).relax(), nullptr, "nope"),
               BackendError);
  EXPECT_THROW(backend_register("reference", std::make_shared<IpmBackend>()),
               BackendError);
}

}  // namespace
}  // namespace locomip
