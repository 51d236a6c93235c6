#include "locomip/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "json_util.hpp"

namespace locomip {
namespace {

constexpr double kPlanarTol = 1e-9;
constexpr double kVertexTol = 1e-9;

using Eigen::Vector2d;
using Eigen::Vector3d;

double cross2(const Vector2d& a, const Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Deterministic tangent basis (t1, t2) with t1 x t2 = n.
std::pair<Vector3d, Vector3d> tangent_basis(const Vector3d& n) {
  const Vector3d seed =
      std::abs(n.x()) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY();
  const Vector3d t1 = (seed - seed.dot(n) * n).normalized();
  return {t1, n.cross(t1)};
}

}  // namespace

bool SafeRegion::contains(const Vector3d& p, double tol) const {
  return ((A * p - b).array() <= tol).all();
}

std::vector<Vector3d> SafeRegion::cone_facets() const {
  std::vector<Vector3d> out;
  const int ne = static_cast<int>(cone_edges.size());
  for (int e = 0; e < ne; ++e) {
    Vector3d nu = cone_edges[e].cross(cone_edges[(e + 1) % ne]);
    if (nu.dot(normal) < 0) nu = -nu;
    out.push_back(nu);
  }
  return out;
}

int TerrainScene::locate(const Vector3d& p, double tol) const {
  for (int r = 0; r < num_regions(); ++r) {
    if (regions[r].contains(p, tol)) return r;
  }
  return -1;
}

Vector3d TerrainScene::lower_corner() const {
  Vector3d lo = Vector3d::Constant(std::numeric_limits<double>::infinity());
  for (const auto& r : regions) {
    for (const auto& v : r.vertices) lo = lo.cwiseMin(v);
  }
  return lo;
}

Vector3d TerrainScene::upper_corner() const {
  Vector3d hi = Vector3d::Constant(-std::numeric_limits<double>::infinity());
  for (const auto& r : regions) {
    for (const auto& v : r.vertices) hi = hi.cwiseMax(v);
  }
  return hi;
}

std::vector<Vector3d> cone_edges(const Vector3d& normal, double mu, int n_edges,
                                 std::string* warning) {
  if (n_edges < 3) throw InputError("cone_edges: n_edges must be >= 3");
  if (mu < 0) throw InputError("cone_edges: mu must be >= 0");
  if (std::abs(normal.norm() - 1.0) > 1e-9) {
    throw InputError("cone_edges: normal must be unit length");
  }
  if (mu == 0.0 && warning != nullptr) {
    *warning = "degenerate friction cone (mu = 0): all edges equal the normal";
  }
  const auto [t1, t2] = tangent_basis(normal);
  const double scale = 1.0 / std::sqrt(1.0 + mu * mu);
  std::vector<Vector3d> edges;
  edges.reserve(n_edges);
  for (int k = 0; k < n_edges; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n_edges;
    const Vector3d t = std::cos(a) * t1 + std::sin(a) * t2;
    edges.push_back((normal + mu * t) * scale);
  }
  return edges;
}

double exact_margin(const Vector3d& force, const SafeRegion& region) {
  const Vector3d& n = region.normal;
  const auto [t1, t2] = tangent_basis(n);
  const double fn = force.dot(n);
  const Vector2d ft(force.dot(t1), force.dot(t2));
  const double ft_norm = ft.norm();
  const double scale = std::max(1.0, force.norm());
  if (ft_norm <= 1e-15 * scale) return fn;

  // Cross-section of the pyramid at unit normal height.
  std::vector<Vector2d> poly;
  for (const auto& v : region.cone_edges) {
    const double h = v.dot(n);
    poly.emplace_back(v.dot(t1) / h, v.dot(t2) / h);
  }
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    area += cross2(poly[i], poly[(i + 1) % poly.size()]);
  }
  if (std::abs(area) < 1e-14) {
    // Degenerate cone: only forces along the normal are admissible.
    return -std::numeric_limits<double>::infinity();
  }
  const double orient = area > 0 ? 1.0 : -1.0;
  auto inside = [&](const Vector2d& q) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vector2d& a = poly[i];
      const Vector2d& b = poly[(i + 1) % poly.size()];
      if (orient * cross2(b - a, q - a) < 0) return false;
    }
    return true;
  };

  // force - a n has normal component d = fn - a and fixed tangential part;
  // it is admissible iff ft / d lies in the cross-section, monotone in d.
  double d_out = 0.0;
  double d_in = ft_norm;
  while (!inside(ft / d_in)) {
    d_out = d_in;
    d_in *= 2.0;
  }
  for (int it = 0; it < 200 && d_in - d_out > 1e-16 * d_in; ++it) {
    const double mid = 0.5 * (d_in + d_out);
    if (inside(ft / mid)) {
      d_in = mid;
    } else {
      d_out = mid;
    }
  }
  return fn - d_in;
}

SafeRegion make_region(int id, std::vector<Vector3d> vertices, double mu,
                       int n_edges, const Vector3d& up, std::string* warning) {
  const std::string where = "region " + std::to_string(id);
  const int nv = static_cast<int>(vertices.size());
  if (nv < 3) throw InputError(where + ": fewer than 3 vertices");
  if (mu < 0) throw InputError(where + ": mu < 0");
  if (n_edges < 3) throw InputError(where + ": n_edges must be >= 3");

  Vector3d centroid = Vector3d::Zero();
  for (const auto& v : vertices) centroid += v;
  centroid /= nv;
  // Newell normal follows the vertex winding.
  Vector3d wind = Vector3d::Zero();
  for (int i = 0; i < nv; ++i) {
    wind += (vertices[i] - centroid).cross(vertices[(i + 1) % nv] - centroid);
  }
  if (wind.norm() < 1e-12) throw InputError(where + ": degenerate polygon");
  wind.normalize();
  for (const auto& v : vertices) {
    if (std::abs(wind.dot(v - centroid)) > kPlanarTol) {
      throw InputError(where + ": non-coplanar vertices");
    }
  }

  double turning = 0.0;
  for (int i = 0; i < nv; ++i) {
    const Vector3d e0 = vertices[(i + 1) % nv] - vertices[i];
    const Vector3d e1 = vertices[(i + 2) % nv] - vertices[(i + 1) % nv];
    if (e0.norm() < 1e-12) throw InputError(where + ": repeated vertex");
    const double c = e0.cross(e1).dot(wind);
    if (c < -1e-12) throw InputError(where + ": non-convex polygon");
    turning += std::atan2(c, e0.dot(e1));
  }
  if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6) {
    throw InputError(where + ": non-convex polygon");
  }

  SafeRegion r;
  r.id = id;
  r.mu = mu;
  r.normal = wind.dot(up) < 0 ? Vector3d(-wind) : wind;
  r.A.resize(nv + 2, 3);
  r.b.resize(nv + 2);
  for (int i = 0; i < nv; ++i) {
    const Vector3d e = vertices[(i + 1) % nv] - vertices[i];
    const Vector3d out = e.cross(wind).normalized();
    r.A.row(i) = out.transpose();
    r.b[i] = out.dot(vertices[i]);
  }
  r.A.row(nv) = r.normal.transpose();
  r.b[nv] = r.normal.dot(vertices[0]);
  r.A.row(nv + 1) = -r.normal.transpose();
  r.b[nv + 1] = -r.normal.dot(vertices[0]);
  r.vertices = std::move(vertices);
  r.cone_edges = cone_edges(r.normal, mu, n_edges, warning);
  return r;
}

TerrainScene load_terrain(const nlohmann::json& doc) {
  using namespace jsonutil;
  TerrainScene scene;
  if (doc.contains("gravity")) scene.gravity = vec3(doc["gravity"], "gravity");
  if (scene.gravity.norm() <= 0) throw InputError("gravity must be nonzero");
  const Vector3d up = -scene.gravity.normalized();
  const json& regions = require(doc, "regions", "terrain");
  if (!regions.is_array() || regions.empty()) {
    throw InputError("terrain: at least one region required");
  }
  std::set<int> ids;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const json& jr = regions[k];
    const std::string where = "regions[" + std::to_string(k) + "]";
    const int id = integer(require(jr, "id", where), where + ".id");
    if (!ids.insert(id).second) {
      throw InputError(where + ": duplicate id " + std::to_string(id));
    }
    const json& jv = require(jr, "vertices", where);
    if (!jv.is_array()) throw InputError(where + ".vertices: expected array");
    std::vector<Vector3d> verts;
    for (const auto& p : jv) verts.push_back(vec3(p, where + ".vertices"));
    const double mu = number_or(jr, "mu", 0.5, where);
    const int ne = jr.contains("n_edges")
                       ? integer(jr["n_edges"], where + ".n_edges")
                       : 4;
    std::string warn;
    SafeRegion r = make_region(id, std::move(verts), mu, ne, up, &warn);
    if (!warn.empty()) scene.warnings.push_back(where + ": " + warn);
    if (jr.contains("halfspaces")) {
      // User-supplied lateral rows replace the computed ones.
      const json& hs = jr["halfspaces"];
      const Eigen::MatrixXd A = matrix(require(hs, "A", where), where + ".A");
      const Eigen::VectorXd b = vector(require(hs, "b", where), where + ".b");
      if (A.cols() != 3 || A.rows() != b.size()) {
        throw InputError(where + ".halfspaces: shape mismatch");
      }
      for (const auto& v : r.vertices) {
        if (((A * v - b).array() > kVertexTol).any()) {
          throw InputError(where + ".halfspaces: vertex outside halfspaces");
        }
      }
      Eigen::MatrixXd full(A.rows() + 2, 3);
      Eigen::VectorXd bf(A.rows() + 2);
      full.topRows(A.rows()) = A;
      bf.head(A.rows()) = b;
      full.bottomRows(2) = r.A.bottomRows(2);
      bf.tail(2) = r.b.tail(2);
      r.A = full;
      r.b = bf;
    }
    scene.regions.push_back(std::move(r));
  }
  std::sort(scene.regions.begin(), scene.regions.end(),
            [](const SafeRegion& a, const SafeRegion& b) { return a.id < b.id; });
  for (int i = 0; i < scene.num_regions(); ++i) {
    if (scene.regions[i].id != i) {
      throw InputError("terrain: region ids must be dense from 0");
    }
  }
  return scene;
}

TerrainScene load_terrain_text(const std::string& text) {
  return load_terrain(jsonutil::parse_text(text, "terrain"));
}

TerrainScene load_terrain_file(const std::string& path) {
  return load_terrain(jsonutil::parse_file(path));
}

}  // namespace locomip
