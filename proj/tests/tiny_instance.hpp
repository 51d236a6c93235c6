#pragma once

// Randomized two-leg, two-region locomotion instances small enough for
// exhaustive binary enumeration.

#include <random>

#include "locomip/formulation.hpp"
#include "locomip/robot_model.hpp"
#include "locomip/terrain.hpp"

namespace locomip::testing {

struct TinyInstance {
  TerrainScene scene;
  RobotModel robot;
  Task task;
};

inline SafeRegion tiny_rect(int id, double x0, double x1, double z) {
  return make_region(id,
                     {{x0, -0.4, z}, {x1, -0.4, z}, {x1, 0.4, z}, {x0, 0.4, z}},
                     0.7, 4, Eigen::Vector3d::UnitZ());
}

inline TinyInstance make_tiny_instance(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TinyInstance t;

  const double gap = 0.02 + 0.06 * u(rng);
  const double edge = 0.15 + 0.1 * u(rng);
  const double step = 0.04 * (u(rng) - 0.5);
  t.scene.regions.push_back(tiny_rect(0, -0.6, edge, 0.0));
  t.scene.regions.push_back(tiny_rect(1, edge + gap, 1.0, step));

  RobotModel& r = t.robot;
  r.name = "biped-" + std::to_string(seed);
  r.mass = 20.0 + 20.0 * u(rng);
  r.d_lim = 0.12 + 0.06 * u(rng);
  r.box_min = Eigen::Vector3d(-0.2, -0.2, 0.35);
  r.box_max = Eigen::Vector3d(0.2, 0.2, 0.6);
  r.initial_com = Eigen::Vector3d(0.0, 0.0, 0.45);
  const double hip = 0.1 + 0.05 * u(rng);
  for (int l = 0; l < 2; ++l) {
    LegParams leg;
    leg.name = l == 0 ? "L" : "R";
    leg.L = hip;
    leg.phi = l == 0 ? 1.5707963267948966 : -1.5707963267948966;
    leg.J_nominal << 0.0, 0.3, 0.1, (l == 0 ? -0.4 : 0.4), 0.0, 0.0, 0.0, -0.05, -0.3;
    leg.tau_max = Eigen::Vector3d::Constant(200.0);
    r.legs.push_back(leg);
    r.initial_feet.emplace_back(0.0, l == 0 ? hip : -hip, 0.0);
  }

  Task& task = t.task;
  task.N_f = 2;
  task.N_t = 2;
  task.N_k = 2;
  task.dt = 0.1;
  task.trig_segments = 1;
  task.yaw_lo = -0.3;
  task.yaw_hi = 0.3;
  task.gait = "free";
  task.goal = Eigen::Vector3d(0.05 + 0.2 * u(rng), 0.04 * (u(rng) - 0.5), 0.45);
  task.weights.qt = 0.05 * u(rng);
  return t;
}

}  // namespace locomip::testing
