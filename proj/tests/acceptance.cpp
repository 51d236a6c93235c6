// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any criterion fails.

#include <sys/wait.h>

#include <Eigen/Geometry>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "locomip/bnb.hpp"
#include "locomip/planner.hpp"
#include "locomip/trunk_qp.hpp"
#include "tiny_instance.hpp"
#include "whole_body_fixtures.hpp"

namespace {

using namespace locomip;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const std::string kScenarios = LOCOMIP_SCENARIO_DIR;
const std::string kCli = LOCOMIP_CLI;
const double kPi = 3.14159265358979323846;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Scenario {
  TerrainScene scene;
  RobotModel robot;
  Task task;
};

Scenario load(const std::string& terrain, const std::string& task) {
  return {load_terrain_file(kScenarios + "/" + terrain + "/terrain.json"),
          load_robot_file(kScenarios + "/robots/quadruped.json"),
          load_task_file(kScenarios + "/" + task + "/task.json")};
}

struct Run {
  PlannerResult result;
  double seconds = 0.0;
  bool optimal() const { return result.solution.status == SolveStatus::kOptimal; }
  double objective() const { return result.solution.objective; }
};

Run plan(const Scenario& s, const std::string& gait, bool angular = true) {
  PlannerOptions o;
  o.gait = gait;
  o.angular_dynamics = angular;
  o.bnb.workers = 1;
  const auto t0 = Clock::now();
  Run r{run_planner(s.scene, s.robot, s.task, o), 0.0};
  r.seconds = seconds_since(t0);
  return r;
}

// Minimum decomposition slack over every validated plan of the run.
double g_min_tightness = 0.0;
int g_tight_plans = 0;

void note_tightness(const Run& r) {
  if (!r.result.plan || !r.result.plan->angular_dynamics) return;
  g_min_tightness = g_tight_plans == 0 ? r.result.report.min_tightness
                                       : std::min(g_min_tightness, r.result.report.min_tightness);
  ++g_tight_plans;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  int agree = 0, optimal = 0;
  const int n = 25;
  double worst = 0.0;
  BnbOptions o;
  o.gap_tol = 1e-9;
  for (int seed = 0; seed < n; ++seed) {
    const auto t = testing::make_tiny_instance(static_cast<unsigned>(seed));
    const Formulation f = build_formulation(t.scene, t.robot, t.task);
    const MicpSolution b = solve(f.problem, o);
    const MicpSolution e = enumerate_bruteforce(f.problem, 20);
    const bool bo = b.status == SolveStatus::kOptimal;
    const bool eo = e.status == SolveStatus::kOptimal;
    if (bo != eo) continue;
    if (!bo) {
      ++agree;
      continue;
    }
    ++optimal;
    const double rel = std::abs(b.objective - e.objective) / std::max(1.0, std::abs(e.objective));
    worst = std::max(worst, rel);
    if (rel <= 1e-6) ++agree;
  }
  const double secs = seconds_since(t0);
  return {agree == n && optimal >= 20 && secs <= 300.0,
          fmt("%d/%d instances agree (%d optimal), worst rel diff %.2e, %.1f s", agree, n,
              optimal, worst, secs)};
}

Outcome flat_walk_certificate(const Run& r) {
  const MicpSolution& s = r.result.solution;
  const bool pass = r.optimal() && s.gap <= 1e-4 && r.result.plan && r.result.report.passed &&
                    r.seconds <= 600.0;
  double worst = 0.0;
  for (const auto& f : r.result.report.families) {
    if (f.family != "decomposition") worst = std::max(worst, f.max_residual);
  }
  return {pass, fmt("status %s, gap %.2e, validator %s, max residual %.2e, %.2f s",
                    to_string(s.status), s.gap, r.result.report.passed ? "pass" : "fail", worst,
                    r.seconds)};
}

Outcome free_gait_dominance(const Run& fr, const Run& walk, const Run& trot) {
  const bool all_opt = fr.optimal() && walk.optimal() && trot.optimal();
  const double slack_w = 1e-6 * std::max(1.0, std::abs(walk.objective()));
  const double slack_t = 1e-6 * std::max(1.0, std::abs(trot.objective()));
  const bool pass = all_opt && fr.objective() <= walk.objective() + slack_w &&
                    fr.objective() <= trot.objective() + slack_t;
  std::string labels;
  if (fr.result.plan) {
    for (const auto& l : fr.result.plan->gait_labels) labels += (labels.empty() ? "" : " ") + l;
  }
  return {pass, fmt("free %.6f (%s), walk %.6f, trot %.6f", fr.objective(), labels.c_str(),
                    walk.objective(), trot.objective())};
}

Outcome margin_maximization() {
  Scenario s = load("flat", "stance");
  const double base = s.task.weights.qalpha;
  auto mean_alpha = [](const Run& r) {
    double sum = 0.0;
    int n = 0;
    for (const auto& m : r.result.report.margins) {
      sum += m.planned;
      ++n;
    }
    return n > 0 ? sum / n : 0.0;
  };
  const Run lo = plan(s, "");
  s.task.weights.qalpha = 10.0 * base;
  const Run hi = plan(s, "");
  note_tightness(lo);
  note_tightness(hi);
  if (!lo.result.plan || !hi.result.plan) return {false, "stance solve failed"};

  const double W = hi.result.plan->weight();
  double excess = -1e300, normal_err = 0.0;
  int normal_samples = 0;
  for (const Run* r : {&lo, &hi}) {
    const LocomotionPlan& p = *r->result.plan;
    for (const auto& m : r->result.report.margins) {
      excess = std::max(excess, (m.planned - m.exact) / W);
      const Eigen::Vector3d& F = p.force[m.leg][m.knot];
      if (F.head<2>().norm() <= 1e-6 * F.norm() && F.norm() > 0) {
        normal_err = std::max(normal_err, std::abs(m.planned - F.norm()) / W);
        ++normal_samples;
      }
    }
  }
  // Purely normal force on the flat region: the exact margin is the force norm.
  const Eigen::Vector3d pure(0.0, 0.0, 300.0);
  const double pure_err = std::abs(exact_margin(pure, s.scene.regions[0]) - pure.norm()) / W;
  const double a_lo = mean_alpha(lo), a_hi = mean_alpha(hi);
  const bool pass = lo.optimal() && hi.optimal() && a_hi > a_lo && excess <= 1e-6 &&
                    normal_err <= 1e-6 && pure_err <= 1e-6;
  return {pass, fmt("mean alpha %.3f N -> %.3f N, max (alpha - exact)/W %.2e, normal-force "
                    "samples %d with max |alpha - |f||/W %.2e, exact margin of pure normal %.2e",
                    a_lo, a_hi, excess, normal_samples, normal_err, pure_err)};
}

double max_torque_ratio(const LocomotionPlan& p, const RobotModel& robot) {
  double worst = 0.0;
  for (int l = 0; l < p.dims.n_l; ++l) {
    for (int k = 1; k <= p.N(); ++k) {
      const Eigen::Vector3d tau = robot.legs[l].J_nominal.transpose() * p.force[l][k];
      for (int q = 0; q < 3; ++q) {
        worst = std::max(worst, std::abs(tau[q]) / robot.legs[l].tau_max[q]);
      }
    }
  }
  return worst;
}

void scale_limits(RobotModel& robot, const RobotModel& nominal, double factor) {
  for (int l = 0; l < robot.n_legs(); ++l) robot.legs[l].tau_max = factor * nominal.legs[l].tau_max;
}

Outcome torque_limit_effect() {
  Scenario s = load("slopes_gap", "slopes_gap");
  const RobotModel nominal = s.robot;
  const Run base = plan(s, "");
  note_tightness(base);
  const std::string before =
      base.result.plan ? fmt("%.3f", max_torque_ratio(*base.result.plan, nominal)) : "n/a";

  // Halved limits sit below the baseline peak, so the limit has to bind.
  scale_limits(s.robot, nominal, 0.5);
  const Run half = plan(s, "");
  note_tightness(half);
  const std::string halved =
      half.result.plan ? fmt("%.9f", max_torque_ratio(*half.result.plan, s.robot))
                       : std::string(to_string(half.result.solution.status));

  scale_limits(s.robot, nominal, 0.1);
  const Run weak = plan(s, "");
  note_tightness(weak);
  const std::string context =
      fmt("baseline peak |J'f|/tau_max %s, at tau_max/2 %s", before.c_str(), halved.c_str());
  if (!weak.result.plan) {
    const bool infeasible = weak.result.solution.status == SolveStatus::kInfeasible;
    return {infeasible, fmt("tau_max/10: %s (%s)", to_string(weak.result.solution.status),
                            context.c_str())};
  }
  const double ratio = max_torque_ratio(*weak.result.plan, s.robot);
  const bool binds = ratio >= 1.0 - 1e-6 && ratio <= 1.0 + 1e-6;
  return {binds && weak.optimal(),
          fmt("tau_max/10: peak |J'f|/tau_max %.9f (%s)", ratio, context.c_str())};
}

Outcome decomposition_identity() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const double up = (a + b) * (a + b), um = (a - b) * (a - b);
    worst = std::max(worst, std::abs((up - um) / 4.0 - a * b));
  }
  const bool pass = worst <= 1e-12 && g_tight_plans > 0 && g_min_tightness >= -1e-9;
  return {pass, fmt("max |(u+ - u-)/4 - ab| %.2e over 1000 pairs; min epigraph slack %.2e over "
                    "%d plans",
                    worst, g_min_tightness, g_tight_plans)};
}

Outcome trig_bound() {
  const TrigTable t = build_trig_table(5, -kPi / 2, kPi / 2);
  double worst = 0.0;
  const int samples = 200000;
  for (int i = 0; i <= samples; ++i) {
    const double th = -kPi / 2 + kPi * i / samples;
    worst = std::max({worst, std::abs(t.sin(th) - std::sin(th)), std::abs(t.cos(th) - std::cos(th))});
  }
  const double bound = (kPi / 5) * (kPi / 5) / 8;
  return {worst <= bound, fmt("max error %.6f, bound %.6f", worst, bound)};
}

Outcome timing(const Run& fr, const Run& walk, const Scenario& flat) {
  const int repeats = 3;
  double angular = 0.0, linear = 0.0;
  for (int i = 0; i < repeats; ++i) {
    angular += plan(flat, "walk", true).seconds;
    linear += plan(flat, "walk", false).seconds;
  }
  angular /= repeats;
  linear /= repeats;
  const bool pass = fr.seconds > walk.seconds && angular > linear;
  return {pass, fmt("roof free %.2f s vs walk %.2f s (x%.1f); flat walk angular %.3f s vs "
                    "linear %.3f s (x%.2f)",
                    fr.seconds, walk.seconds, fr.seconds / walk.seconds, angular, linear,
                    angular / linear)};
}

Outcome trunk_qp() {
  using testing_fixtures::kkt_oracle;
  using testing_fixtures::synthetic_state;
  using Eigen::Matrix3d;
  using Eigen::MatrixXd;
  using Eigen::Vector3d;

  std::mt19937 rng(3);
  double eq_err = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 10; ++trial) {
    WholeBodyState s = synthetic_state(rng);
    s.M_b = MatrixXd::Random(6, 18);
    s.h_b = Eigen::VectorXd::Random(6);
    TrackingWeights w;
    w.W = 1e-6 * MatrixXd::Identity(30, 30);
    const ReferenceAccelerations zero{Vector3d::Zero(), Vector3d::Zero()};
    const DenseQp qp = build_tracking_qp(s, zero, w, {});
    const TrackingSolution sol = solve_tracking_qp(s, zero, w, {});
    ok = ok && sol.status == QpStatus::kOptimal && qp.C.rows() == 0;
    eq_err = std::max(eq_err, (sol.x - kkt_oracle(qp)).lpNorm<Eigen::Infinity>());
  }

  WholeBodyState s = synthetic_state(rng);
  for (int l = 1; l < 4; ++l) s.J_c.block<3, 3>(3 * l, 6 + 3 * l) = s.J_c.block<3, 3>(0, 6);
  TrackingWeights w;
  w.W = 1e-4 * MatrixXd::Identity(30, 30);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      w.W.block<3, 3>(18 + 3 * a, 18 + 3 * b) -= 0.25e-4 * Matrix3d::Identity();
    }
  }
  TrackingLimits lim;
  lim.contacts.assign(4, ContactLimits{});
  const TrackingSolution hover =
      solve_tracking_qp(s, {Vector3d::Zero(), Vector3d::Zero()}, w, lim);
  double fz = 0.0;
  for (int l = 0; l < 4; ++l) fz += hover.lambda[3 * l + 2];
  const double hover_err = std::abs(fz - s.mass * 9.81);
  ok = ok && hover.status == QpStatus::kOptimal;

  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, kPi - 1e-3);
  double rot_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vector3d axis = Vector3d(U(rng), U(rng), U(rng)).normalized();
    const Matrix3d R = Eigen::AngleAxisd(angle(rng), axis).toRotationMatrix();
    rot_err = std::max(rot_err, (rotation_exp(rotation_log(R)) - R).lpNorm<Eigen::Infinity>());
  }
  const bool pass = ok && eq_err <= 1e-8 && hover_err <= 1e-8 && rot_err <= 1e-9;
  return {pass, fmt("equality-only vs KKT %.2e, hover sum fz error %.2e N, log/exp round trip "
                    "%.2e",
                    eq_err, hover_err, rot_err)};
}

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "locomip_acceptance";
  fs::remove_all(root);
  int files = 0, differ = 0;
  bool ran = true;
  for (const std::string sc : {"flat", "roof"}) {
    const std::string base = kScenarios + "/" + sc + "/terrain.json " + kScenarios +
                             "/robots/quadruped.json " + kScenarios + "/" + sc + "/task.json ";
    for (const char* run : {"a", "b"}) {
      ran = ran && run_cli("plan " + base + (root / sc / run).string() +
                           " --gait walk --workers 1 --seed 1") == 0;
    }
    if (!ran) break;
    for (const auto& e : fs::directory_iterator(root / sc / "a")) {
      ++files;
      const fs::path other = root / sc / "b" / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
    }
  }
  fs::remove_all(root);
  return {ran && files > 0 && differ == 0,
          fmt("%d exported files compared, %d differ", files, differ)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("criterion %2d %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  };

  report(1, "oracle-equivalence", oracle_equivalence());

  const Scenario flat = load("flat", "flat");
  const Run flat_walk = plan(flat, "walk");
  note_tightness(flat_walk);
  report(2, "global-gap-certificate", flat_walk_certificate(flat_walk));

  const Scenario roof = load("roof", "roof");
  const Run roof_walk = plan(roof, "walk");
  const Run roof_trot = plan(roof, "trot");
  const Run roof_free = plan(roof, "free");
  for (const Run* r : {&roof_walk, &roof_trot, &roof_free}) note_tightness(*r);
  report(3, "free-gait-dominance", free_gait_dominance(roof_free, roof_walk, roof_trot));

  report(4, "margin-maximization", margin_maximization());
  report(5, "torque-limit-effect", torque_limit_effect());
  report(6, "decomposition-identity", decomposition_identity());
  report(7, "pwl-trig-bound", trig_bound());
  report(8, "timing-directionality", timing(roof_free, roof_walk, flat));
  report(9, "trunk-qp", trunk_qp());
  report(10, "determinism", determinism());

  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
