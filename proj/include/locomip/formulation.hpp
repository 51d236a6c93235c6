#pragma once

// Mixed-integer encoding of the centroidal locomotion planning problem.
//
// Index conventions used throughout the builder and the plan tools:
//  - legs l = 0..n_l-1, contacts i = 0..N_f-1 with leg(i) = i % n_l and
//    cycle(i) = i / n_l;
//  - slots j = 0..N_t-1, knots k = 0..N where knot 0 is the initial state and
//    slot j spans knots j*N_k+1 .. (j+1)*N_k;
//  - forces and margins are scaled by the body weight m*|g|.

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "locomip/micp.hpp"
#include "locomip/robot_model.hpp"
#include "locomip/terrain.hpp"

namespace locomip {

struct PlanDims {
  int n_l = 4;
  int N_f = 4;
  int N_t = 4;
  int N_k = 4;
  int N_r = 1;
  int N_s = 5;
  int N_e = 4;
  double dt = 0.1;

  int N() const { return N_t * N_k; }
  /// Global knot of local knot t (1..N_k) in slot j (0-based).
  int knot(int slot, int t) const { return slot * N_k + t; }
  int touchdown_knot(int slot) const { return (slot + 1) * N_k; }
  int slot_of_knot(int k) const { return (k - 1) / N_k; }
  int leg_of(int contact) const { return contact % n_l; }
  int cycles() const { return N_f / n_l; }
  /// Throws ModelError.
  void validate() const;
};

struct Weights {
  Eigen::Vector3d Qv = Eigen::Vector3d::Constant(1e-2);
  Eigen::Vector3d QF = Eigen::Vector3d::Constant(1e-6);
  double qu = 1e-3;
  double qt = 0.1;
  double qalpha = 1e-3;
  Eigen::Vector3d Qg = Eigen::Vector3d(100.0, 100.0, 10.0);
  Eigen::Vector3d Qk = Eigen::Vector3d::Constant(1e-6);
};

struct Task {
  Eigen::Vector3d goal = Eigen::Vector3d::Zero();
  int N_f = 4;
  int N_t = 4;
  int N_k = 4;
  double dt = 0.1;
  Weights weights;
  /// "free", "walk", "trot" or "explicit" (gait_pattern holds the matrix).
  std::string gait = "free";
  Eigen::MatrixXi gait_pattern;
  int trig_segments = 5;
  double yaw_lo = -1.5707963267948966;
  double yaw_hi = 1.5707963267948966;
  /// Bounds on scaled force components and on CoM velocity (m/s).
  double force_limit = 2.0;
  double velocity_limit = 3.0;
};

/// Throws InputError on schema problems.
Task load_task(const nlohmann::json& doc);
Task load_task_text(const std::string& text);
Task load_task_file(const std::string& path);
nlohmann::json task_to_json(const Task& task);

/// N_f x N_t 0/1 matrix of a named gait cycle repeated N_f/n_l times.
/// Leg order is LF, RF, LH, RH. Throws InputError when it does not fit.
Eigen::MatrixXi gait_preset(const std::string& name, int n_l, int N_f, int N_t);

struct FormulationOptions {
  /// Angular momentum rows and the bilinear decomposition; off gives the
  /// linear-dynamics model used for gait seeding.
  bool angular_dynamics = true;
  /// Polygon cuts on (c_i, s_i) from the trig breakpoints.
  bool trig_hull_cuts = true;
};

using Vec3Id = std::array<VarId, 3>;

struct VariableMap {
  // Per knot 0..N; knot 0 entries are fixed to the initial state.
  std::vector<Vec3Id> r, v, k;
  // [leg][knot 0..N]; knots inside a slot alias the previous knot.
  std::vector<std::vector<Vec3Id>> p;
  // [leg][knot 1..N], index 0 unused.
  std::vector<std::vector<Vec3Id>> lambda;
  std::vector<std::vector<VarId>> alpha;
  // [leg][knot 1..N][product] as (u+, u-), products ordered
  // (dy,lz) (dz,ly) (dz,lx) (dx,lz) (dx,ly) (dy,lx).
  std::vector<std::vector<std::array<std::array<VarId, 2>, 6>>> u;

  // Per contact.
  std::vector<Vec3Id> f;
  std::vector<VarId> theta, s, c;
  std::vector<std::array<VarId, 2>> rT;
  std::vector<std::vector<VarId>> T, H, S, C;

  /// Slot number (1-based) assigned to contact i: sum_j (j+1) T_ij.
  LinExpr slot(int contact) const;
};

struct Census {
  int variables = 0;
  int binaries = 0;
  int gait_binaries = 0;
  int region_binaries = 0;
  int trig_binaries = 0;
  int linear_rows = 0;
  int implications = 0;
  int quadratic_bounds = 0;
  int squared_costs = 0;
};

struct Formulation {
  PlanDims dims;
  TrigTable trig;
  MicpProblem problem;
  VariableMap map;
  double weight = 1.0;  // m * |g|
  std::vector<int> initial_regions;  // per leg
  std::vector<std::string> warnings;
  FormulationOptions options;

  Census census() const;
  /// Binary count implied by the dims alone.
  static int expected_binaries(const PlanDims& d);
  /// (index, value) fixings of T for a 0/1 pattern, as a seed assignment.
  std::vector<std::pair<int, double>> gait_assignment(
      const Eigen::MatrixXi& pattern) const;
  /// Pins T to a pattern through variable bounds.
  void fix_gait(const Eigen::MatrixXi& pattern);
};

/// Emits each constraint family in turn; build_formulation runs them all.
class FormulationBuilder {
 public:
  FormulationBuilder(const TerrainScene& scene, const RobotModel& robot,
                     const Task& task, FormulationOptions opts = {});

  void allocate();
  void add_gait_constraints();
  void add_region_and_reach();
  void add_swing_and_box();
  void add_dynamics();
  void add_contact_forces();
  void add_objective();

  Formulation& result() { return out_; }

 private:
  const TerrainScene& scene_;
  const RobotModel& robot_;
  const Task& task_;
  Formulation out_;
  Eigen::Vector3d lo_, hi_;  // spatial box for positions

  LinExpr reached(int contact, int knot) const;
  LinExpr active(int contact, int knot) const;
  LinExpr initial_active(int leg, int knot) const;
};

Formulation build_formulation(const TerrainScene& scene, const RobotModel& robot,
                              const Task& task, FormulationOptions opts = {});

}  // namespace locomip
