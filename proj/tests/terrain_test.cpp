#include "locomip/terrain.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace locomip;
using Eigen::Vector3d;

namespace {

const char* kSquare = R"({"regions": [{"id": 0, "mu": 0.5,
  "vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0]]}]})";

SafeRegion flat_region(double mu, int ne) {
  return make_region(0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, mu, ne,
                     Vector3d::UnitZ());
}

// Facet inequalities of the pyramid spanned by consecutive edge pairs.
double min_facet(const Vector3d& x, const std::vector<Vector3d>& edges,
                 const Vector3d& n) {
  double m = 1e300;
  const int ne = static_cast<int>(edges.size());
  for (int e = 0; e < ne; ++e) {
    Vector3d nu = edges[e].cross(edges[(e + 1) % ne]).normalized();
    if (nu.dot(n) < 0) nu = -nu;
    m = std::min(m, nu.dot(x));
  }
  return m;
}

}  // namespace

TEST(Terrain, UnitSquareAccepted) {
  const TerrainScene s = load_terrain_text(kSquare);
  ASSERT_EQ(s.num_regions(), 1);
  const SafeRegion& r = s.regions[0];
  EXPECT_NEAR((r.normal - Vector3d::UnitZ()).norm(), 0.0, 1e-15);
  EXPECT_EQ(r.num_lateral(), 4);
  for (const auto& v : r.vertices) EXPECT_TRUE(r.contains(v, 1e-9));
  EXPECT_TRUE(r.contains({0.5, 0.5, 0.0}));
  EXPECT_FALSE(r.contains({1.5, 0.5, 0.0}));
  EXPECT_FALSE(r.contains({0.5, 0.5, 0.01}));
}

TEST(Terrain, ClockwiseWindingGivesUpwardNormal) {
  const SafeRegion r = make_region(
      0, {{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 0, 0}}, 0.5, 4, Vector3d::UnitZ());
  EXPECT_GT(r.normal.z(), 0.999);
  EXPECT_TRUE(r.contains({0.2, 0.7, 0.0}));
}

TEST(Terrain, RejectsLiftedVertex) {
  EXPECT_THROW(load_terrain_text(R"({"regions": [{"id": 0, "mu": 0.5,
    "vertices": [[0,0,0],[1,0,0],[1,1,0.1],[0,1,0]]}]})"),
               InputError);
}

TEST(Terrain, RejectsDuplicateIds) {
  EXPECT_THROW(load_terrain_text(R"({"regions": [
    {"id": 0, "vertices": [[0,0,0],[1,0,0],[1,1,0]]},
    {"id": 0, "vertices": [[2,0,0],[3,0,0],[3,1,0]]}]})"),
               InputError);
}

TEST(Terrain, RejectsNonConvexFewVerticesNegativeMu) {
  EXPECT_THROW(make_region(0, {{0, 0, 0}, {2, 0, 0}, {1, 0.5, 0}, {2, 2, 0},
                               {0, 2, 0}},
                           0.5, 4, Vector3d::UnitZ()),
               InputError);
  EXPECT_THROW(make_region(0, {{0, 0, 0}, {1, 0, 0}}, 0.5, 4, Vector3d::UnitZ()),
               InputError);
  EXPECT_THROW(flat_region(-0.1, 4), InputError);
  // Pentagram: every turn has the same sign but winds twice.
  std::vector<Vector3d> star;
  for (int k = 0; k < 5; ++k) {
    const double a = 2 * M_PI * (2 * k % 5) / 5;
    star.emplace_back(std::cos(a), std::sin(a), 0);
  }
  EXPECT_THROW(make_region(0, star, 0.5, 4, Vector3d::UnitZ()), InputError);
}

TEST(Terrain, SlopedRegionPinsPlane) {
  const SafeRegion r = make_region(
      0, {{0, 0, 0}, {1, 0, 0.5}, {1, 1, 0.5}, {0, 1, 0}}, 0.6, 4,
      Vector3d::UnitZ());
  EXPECT_NEAR(r.normal.norm(), 1.0, 1e-12);
  EXPECT_NEAR(r.normal.dot(Vector3d(1, 0, 0.5).normalized()), 0.0, 1e-12);
  EXPECT_TRUE(r.contains({0.5, 0.5, 0.25}));
  EXPECT_FALSE(r.contains({0.5, 0.5, 0.3}));
}

TEST(Terrain, SuppliedHalfspacesMustContainVertices) {
  EXPECT_THROW(load_terrain_text(R"({"regions": [{"id": 0,
    "vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0]],
    "halfspaces": {"A": [[1,0,0]], "b": [0.5]}}]})"),
               InputError);
  const TerrainScene s = load_terrain_text(R"({"regions": [{"id": 0,
    "vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0]],
    "halfspaces": {"A": [[1,0,0],[-1,0,0],[0,1,0],[0,-1,0]], "b": [1,0,1,0]}}]})");
  EXPECT_EQ(s.regions[0].A.rows(), 6);
}

TEST(Terrain, LocateAndBounds) {
  const TerrainScene s = load_terrain_text(R"({"regions": [
    {"id": 1, "vertices": [[2,0,0.1],[3,0,0.1],[3,1,0.1]]},
    {"id": 0, "vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0]]}]})");
  EXPECT_EQ(s.regions[0].id, 0);
  EXPECT_EQ(s.locate({0.5, 0.5, 0}), 0);
  EXPECT_EQ(s.locate({2.9, 0.5, 0.1}), 1);
  EXPECT_EQ(s.locate({5, 5, 0}), -1);
  EXPECT_DOUBLE_EQ(s.upper_corner().x(), 3.0);
  EXPECT_DOUBLE_EQ(s.upper_corner().z(), 0.1);
}

TEST(ConeEdges, InscribedPyramidMu1) {
  const auto e = cone_edges(Vector3d::UnitZ(), 1.0, 4);
  const double h = 1 / std::sqrt(2.0);
  const Vector3d expect[4] = {{h, 0, h}, {0, h, h}, {-h, 0, h}, {0, -h, h}};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR((e[k] - expect[k]).norm(), 0, 1e-15);
}

TEST(ConeEdges, FrictionlessWarns) {
  std::string warn;
  const auto e = cone_edges(Vector3d::UnitZ(), 0.0, 4, &warn);
  EXPECT_FALSE(warn.empty());
  for (const auto& v : e) EXPECT_EQ(v, Vector3d::UnitZ());
}

TEST(ConeEdges, DefiningIdentity) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const Vector3d n = trial == 0 ? Vector3d::UnitZ()
                                  : Vector3d(g(rng), g(rng), g(rng)).normalized();
    const auto e = cone_edges(n, 0.7, 8);
    for (const auto& v : e) {
      EXPECT_NEAR(v.dot(n), 1 / std::sqrt(1.49), 1e-12);
      EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    }
  }
}

TEST(ConeEdges, ConicCombinationsMatchFacetForm) {
  const SafeRegion r = flat_region(0.6, 5);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> g;
  int in_pos = 0;
  for (int s = 0; s < 1000; ++s) {
    Vector3d x = Vector3d::Zero();
    for (const auto& v : r.cone_edges) x += u(rng) * v;
    EXPECT_GE(min_facet(x, r.cone_edges, r.normal), -1e-12);
    // Converse: random facet-feasible points are conic combinations (the
    // cross-section at unit height is the convex hull of the edge images).
    const Vector3d y(g(rng), g(rng), std::abs(g(rng)) + 0.1);
    if (min_facet(y, r.cone_edges, r.normal) >= 0) {
      ++in_pos;
      EXPECT_GE(exact_margin(y, r), -1e-9);
    } else {
      EXPECT_LT(exact_margin(y, r), 1e-9);
    }
  }
  EXPECT_GT(in_pos, 20);
}

TEST(ExactMargin, NormalAlignedForce) {
  for (double mu : {0.1, 0.5, 1.3}) {
    EXPECT_NEAR(exact_margin({0, 0, 100}, flat_region(mu, 4)), 100.0, 1e-12);
  }
}

TEST(ExactMargin, ForceOnEdge) {
  const SafeRegion r = flat_region(0.5, 4);
  EXPECT_NEAR(exact_margin(50 * r.cone_edges[0], r), 0.0, 1e-9);
  EXPECT_NEAR(exact_margin(50 * r.cone_edges[2], r), 0.0, 1e-9);
}

TEST(ExactMargin, MatchesOneDimensionalLp) {
  // Oracle: maximize a over a grid-refined scan of the facet inequalities
  // of the 4-edge pyramid for (20, 0, 100 - a).
  const SafeRegion r = flat_region(0.5, 4);
  auto feasible = [&](double a) {
    return min_facet(Vector3d(20, 0, 100 - a), r.cone_edges, r.normal) >= 0;
  };
  double lo = 0, hi = 100;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  EXPECT_NEAR(lo, 60.0, 1e-9);  // |x| + |y| <= z / 2 for this pyramid
  EXPECT_NEAR(exact_margin({20, 0, 100}, r), lo, 1e-9);
}

TEST(ExactMargin, BoundaryAndHomogeneity) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  const SafeRegion r = make_region(
      0, {{0, 0, 0}, {1, 0, 0.3}, {1, 1, 0.3}, {0, 1, 0}}, 0.8, 6,
      Vector3d::UnitZ());
  int checked = 0;
  for (int s = 0; s < 500; ++s) {
    Vector3d lam = Vector3d::Zero();
    for (const auto& v : r.cone_edges) lam += std::abs(g(rng)) * 50 * v;
    const double a = exact_margin(lam, r);
    ASSERT_GE(a, -1e-9);
    const Vector3d rest = lam - a * r.normal;
    EXPECT_NEAR(min_facet(rest, r.cone_edges, r.normal), 0.0,
                1e-9 * std::max(1.0, lam.norm()));
    for (double k : {0.01, 3.0, 250.0}) {
      EXPECT_NEAR(exact_margin(k * lam, r), k * a, 1e-9 * k * lam.norm());
    }
    ++checked;
  }
  EXPECT_EQ(checked, 500);
}

TEST(ExactMargin, OutsideIsNegative) {
  const SafeRegion r = flat_region(0.5, 4);
  EXPECT_LT(exact_margin({80, 0, 100}, r), 0.0);
  EXPECT_NEAR(exact_margin({80, 0, 100}, r), 100 - 160.0, 1e-9);
}
