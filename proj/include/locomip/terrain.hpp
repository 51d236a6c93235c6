#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "json.hpp"

#include "locomip/errors.hpp"

namespace locomip {

struct SafeRegion {
  int id = 0;
  std::vector<Eigen::Vector3d> vertices;
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  /// {c | A c <= b}: one outward in-plane row per edge, then the plane pinned
  /// by the pair n.c <= n.v0, -n.c <= -n.v0.
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double mu = 0.5;
  std::vector<Eigen::Vector3d> cone_edges;

  int num_lateral() const { return static_cast<int>(A.rows()) - 2; }
  bool contains(const Eigen::Vector3d& p, double tol = 1e-9) const;
  /// Facet normals of the friction pyramid, nu_e = v_e x v_{e+1}, oriented
  /// so that nu_e . lambda >= 0 inside.
  std::vector<Eigen::Vector3d> cone_facets() const;
};

struct TerrainScene {
  std::vector<SafeRegion> regions;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  std::vector<std::string> warnings;

  int num_regions() const { return static_cast<int>(regions.size()); }
  /// Index of the first region containing p, or -1.
  int locate(const Eigen::Vector3d& p, double tol = 1e-6) const;
  /// Axis-aligned box around all vertices.
  Eigen::Vector3d lower_corner() const;
  Eigen::Vector3d upper_corner() const;
};

TerrainScene load_terrain(const nlohmann::json& doc);
TerrainScene load_terrain_text(const std::string& text);
TerrainScene load_terrain_file(const std::string& path);

/// Builds a region from vertices, validating planarity and convexity.
SafeRegion make_region(int id, std::vector<Eigen::Vector3d> vertices, double mu,
                       int n_edges, const Eigen::Vector3d& up,
                       std::string* warning = nullptr);

/// Edges of the inscribed friction pyramid. With mu == 0 every edge equals
/// the normal and *warning (if given) is set.
std::vector<Eigen::Vector3d> cone_edges(const Eigen::Vector3d& normal, double mu,
                                        int n_edges,
                                        std::string* warning = nullptr);

/// Largest a such that force - a * normal stays in the region's pyramid,
/// found by bisection on a point-in-polygon test. Negative when force is
/// outside the pyramid.
double exact_margin(const Eigen::Vector3d& force, const SafeRegion& region);

}  // namespace locomip
