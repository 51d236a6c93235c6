#include "locomip/planner.hpp"

#include <chrono>

namespace locomip {

Eigen::MatrixXi schedule_pattern(const LocomotionPlan& plan) {
  Eigen::MatrixXi T = Eigen::MatrixXi::Zero(plan.dims.N_f, plan.dims.N_t);
  for (const ContactEntry& e : plan.schedule) T(e.contact, e.slot) = 1;
  return T;
}

SeedReport seed_gait_sequence(const TerrainScene& scene, const RobotModel& robot,
                              const Task& task, const BnbOptions& bnb) {
  SeedReport rep;
  rep.attempted = true;
  const auto t0 = std::chrono::steady_clock::now();
  FormulationOptions fo;
  fo.angular_dynamics = false;
  const Formulation lin = build_formulation(scene, robot, task, fo);
  BnbOptions o = bnb;
  o.on_event = nullptr;
  o.seed_assignment.clear();
  const MicpSolution s = solve(lin.problem, o);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!s.has_incumbent) return rep;
  rep.pattern = schedule_pattern(extract(s, lin, robot, scene));
  rep.objective = s.objective;
  rep.found = true;
  return rep;
}

PlannerResult run_planner(const TerrainScene& scene, const RobotModel& robot, Task task,
                          const PlannerOptions& opts) {
  if (!opts.gait.empty()) {
    if (opts.gait != "free" && opts.gait != "walk" && opts.gait != "trot") {
      throw InputError("gait: expected free, walk or trot");
    }
    task.gait = opts.gait;
  }
  FormulationOptions fo;
  fo.angular_dynamics = opts.angular_dynamics;
  const Formulation form = build_formulation(scene, robot, task, fo);

  PlannerResult out;
  out.census = form.census();
  out.warnings = form.warnings;
  BnbOptions bnb = opts.bnb;
  if (opts.seed_gait && task.gait == "free" && task.N_f > 0) {
    out.seed = seed_gait_sequence(scene, robot, task, opts.bnb);
    if (out.seed.found) bnb.seed_assignment = form.gait_assignment(out.seed.pattern);
  }
  out.solution = solve(form.problem, bnb);
  if (!out.solution.has_incumbent) return out;
  LocomotionPlan plan = extract(out.solution, form, robot, scene);
  plan = interpolate_swings(plan, opts.swing_apex, opts.swing_samples);
  out.report = validate(plan, scene, robot, opts.tolerances);
  out.plan = std::move(plan);
  return out;
}

}  // namespace locomip
