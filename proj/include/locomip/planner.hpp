#pragma once

// End-to-end planning: formulation, optional gait seeding from a
// linear-dynamics pre-solve, branch and bound, extraction and validation.

#include <optional>
#include <string>
#include <vector>

#include "locomip/bnb.hpp"
#include "locomip/formulation.hpp"
#include "locomip/plan.hpp"

namespace locomip {

struct PlannerOptions {
  std::string gait;  // free, walk or trot; empty keeps the task's gait
  bool seed_gait = false;
  bool angular_dynamics = true;
  BnbOptions bnb;
  double swing_apex = 0.1;  // m
  int swing_samples = 10;   // per knot
  Tolerances tolerances;
};

struct SeedReport {
  bool attempted = false;
  bool found = false;
  Eigen::MatrixXi pattern;  // N_f x N_t
  double objective = 0.0;   // of the linear-dynamics pre-solve
  double wall_time = 0.0;
};

struct PlannerResult {
  Census census;
  std::vector<std::string> warnings;
  SeedReport seed;
  MicpSolution solution;
  std::optional<LocomotionPlan> plan;
  ValidationReport report;
};

/// Gait matrix of a plan's contact schedule.
Eigen::MatrixXi schedule_pattern(const LocomotionPlan& plan);

/// Solves the problem without the angular-momentum rows and returns its
/// gait; found is false when the pre-solve has no incumbent.
SeedReport seed_gait_sequence(const TerrainScene& scene, const RobotModel& robot,
                              const Task& task, const BnbOptions& bnb);

PlannerResult run_planner(const TerrainScene& scene, const RobotModel& robot, Task task,
                          const PlannerOptions& opts);

}  // namespace locomip
