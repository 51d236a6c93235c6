#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "json.hpp"
#include "locomip/errors.hpp"

namespace locomip {

struct LegParams {
  std::string name;
  double L = 0.0;    // trunk-to-hip distance (m)
  double phi = 0.0;  // trunk-to-hip angle in the body frame (rad)
  Eigen::Matrix3d J_nominal = Eigen::Matrix3d::Identity();
  Eigen::Vector3d tau_max = Eigen::Vector3d::Ones();
};

/// Legs are stored LF, RF, LH, RH for quadrupeds whose names match;
/// otherwise in file order.
struct RobotModel {
  std::string name;
  double mass = 1.0;
  std::vector<LegParams> legs;
  double d_lim = 0.1;
  Eigen::Vector3d box_min = -Eigen::Vector3d::Ones();
  Eigen::Vector3d box_max = Eigen::Vector3d::Ones();
  std::vector<Eigen::Vector3d> initial_feet;
  Eigen::Vector3d initial_com = Eigen::Vector3d::Zero();

  int n_legs() const { return static_cast<int>(legs.size()); }
  /// Throws ModelError on any violated invariant.
  void validate() const;
};

RobotModel load_robot(const nlohmann::json& doc);
RobotModel load_robot_text(const std::string& text);
RobotModel load_robot_file(const std::string& path);
nlohmann::json robot_to_json(const RobotModel& robot);

/// Piecewise-linear sin/cos over equal-width segments that interpolate the
/// true curves at the segment boundaries.
struct TrigTable {
  int n_segments = 0;
  std::vector<double> boundaries;  // n_segments + 1, strictly increasing
  std::vector<double> sin_slope, sin_intercept;
  std::vector<double> cos_slope, cos_intercept;

  double lower() const { return boundaries.front(); }
  double upper() const { return boundaries.back(); }
  /// Segment k with boundaries[k] <= theta < boundaries[k+1]; the last one
  /// is closed. Throws std::out_of_range outside [lower, upper].
  int segment(double theta) const;
  double sin(double theta) const;
  double cos(double theta) const;
};

TrigTable build_trig_table(int n_segments, double theta_lo, double theta_hi);

}  // namespace locomip
