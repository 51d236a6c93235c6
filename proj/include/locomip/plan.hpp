#pragma once

// Executable locomotion plan decoded from a solver incumbent, swing-arc
// interpolation, gait labels, export/import and an independent validator.

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "locomip/bnb.hpp"
#include "locomip/formulation.hpp"
#include "locomip/robot_model.hpp"
#include "locomip/terrain.hpp"

namespace locomip {

inline constexpr int kPlanVersion = 1;

struct ContactEntry {
  int contact = 0;
  int leg = 0;
  int slot = 0;  // 0-based slot in which the leg swings to this contact
  int region = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double theta = 0.0;
  double s = 0.0;  // planned PWL sin / cos of theta
  double c = 0.0;
  Eigen::Vector2d com_xy = Eigen::Vector2d::Zero();  // CoM after transition
};

using Products = std::array<std::array<double, 2>, 6>;

struct LocomotionPlan {
  PlanDims dims;
  std::vector<std::string> leg_names;
  double mass = 0.0;
  Eigen::Vector3d gravity = Eigen::Vector3d(0, 0, -9.81);
  double yaw_lo = 0.0, yaw_hi = 0.0;
  bool angular_dynamics = true;

  // Knots 0..N. Units: m, m/s, m/s^2, N*m*s, N*m, N.
  std::vector<double> time;
  std::vector<Eigen::Vector3d> com, vel, acc, ang, ang_rate;
  std::vector<std::vector<Eigen::Vector3d>> foot, force;   // [leg][knot]
  std::vector<std::vector<double>> alpha;                  // [leg][knot], N
  std::vector<std::vector<Products>> products;             // [leg][knot], scaled
  std::vector<ContactEntry> schedule;
  std::vector<std::string> gait_labels;  // per slot

  // Dense swing paths filled by interpolate_swings: [leg][sample].
  int samples_per_knot = 0;
  std::vector<std::vector<Eigen::Vector3d>> foot_path;

  std::string status;
  double objective = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  double wall_time = 0.0;

  int N() const { return dims.N(); }
  double weight() const { return mass * gravity.norm(); }
  /// Index into schedule of the contact leg l stands on at knot k, or -1
  /// while it is still on its initial foothold.
  int support_contact(int leg, int knot) const;
  /// True on knots where the leg is in flight.
  bool swinging(int leg, int knot) const;
};

/// Throws ModelError when a binary is further than 1e-6 from 0 or 1.
LocomotionPlan extract(const MicpSolution& solution, const Formulation& form,
                       const RobotModel& robot, const TerrainScene& scene);

/// Per-slot labels: "walk" for one transition, "trot" for one diagonal leg
/// pair, "stance" for none and "other" otherwise.
std::vector<std::string> classify_gait(const std::vector<ContactEntry>& schedule,
                                       const PlanDims& dims);

/// Position along a swing arc at phase s in [0, 1].
Eigen::Vector3d swing_point(const Eigen::Vector3d& liftoff,
                            const Eigen::Vector3d& touchdown, double apex,
                            double s);

/// Fills foot_path with samples_per_knot samples per knot interval. Throws
/// InputError for a negative apex.
LocomotionPlan interpolate_swings(const LocomotionPlan& plan, double apex_height,
                                  int samples_per_knot = 10);

struct Tolerances {
  double residual = 1e-6;
  double tightness = -1e-9;
};

struct FamilyResidual {
  std::string family;
  double max_residual = 0.0;
  int knot = -1;  // worst knot, -1 when not knot-indexed
  int index = -1; // worst leg or contact
  bool pass = true;
};

struct MarginSample {
  int leg = 0;
  int knot = 0;
  double planned = 0.0;
  double exact = 0.0;
  double normalized = 0.0;  // planned / |force|, 0 for zero force
};

struct ValidationReport {
  std::vector<FamilyResidual> families;
  std::vector<MarginSample> margins;
  double min_tightness = 0.0;  // min of u -/+ (a +/- b)^2 over all products
  double max_cross_gap = 0.0;  // |(p - r) x lambda - decomposed torque| / W
  double exact_trig_reach = 0.0;  // reach residual with exact sin/cos, m
  bool passed = true;

  const FamilyResidual* find(const std::string& family) const;
  std::string summary() const;
};

ValidationReport validate(const LocomotionPlan& plan, const TerrainScene& scene,
                          const RobotModel& robot, const Tolerances& tol = {});

nlohmann::json plan_to_json(const LocomotionPlan& plan);
/// Throws InputError on schema problems or an unknown version.
LocomotionPlan plan_from_json(const nlohmann::json& doc);
LocomotionPlan load_plan_file(const std::string& path);

/// Writes plan.json plus com.csv, forces.csv, alpha.csv, torque.csv and,
/// after interpolate_swings, feet.csv.
/// Throws std::runtime_error when the directory cannot be written.
void export_plan(const LocomotionPlan& plan, const RobotModel& robot,
                 const std::string& directory);

}  // namespace locomip
