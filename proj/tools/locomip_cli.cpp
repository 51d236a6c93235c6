// locomip: plan, validate and benchmark contact/gait/centroidal plans.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "locomip/convex_solver.hpp"
#include "locomip/planner.hpp"

namespace {

using namespace locomip;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kUsage = 2, kInfeasible = 3, kLimit = 4, kInvalid = 5 };

struct PlanArgs {
  std::string terrain, robot, task, out_dir;
  std::string gait;
  double gap_tol = 1e-4;
  double time_limit = std::numeric_limits<double>::infinity();
  int workers = 1;
  bool seed_gait = false;
  bool linear_only = false;
  std::string backend = "reference";
  unsigned seed = 0;
  std::string log;
  double apex = 0.1;
};

struct ValidateArgs {
  std::string plan, terrain, robot;
};

struct BenchArgs {
  std::string manifest, out_file;
  int repeats = 5;
  double time_limit = std::numeric_limits<double>::infinity();
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void check_backend(const std::string& name) {
  const auto names = BackendRegistry::global().names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw InputError("unknown backend '" + name + "'");
  }
}

int cmd_plan(const PlanArgs& a) {
  TerrainScene scene;
  RobotModel robot;
  Task task;
  try {
    scene = load_terrain_file(a.terrain);
    robot = load_robot_file(a.robot);
    task = load_task_file(a.task);
    check_backend(a.backend);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    if (!log) {
      std::cerr << "error: cannot write log " << a.log << '\n';
      return kUsage;
    }
    log << "# locomip plan seed=" << a.seed << " workers=" << a.workers
        << " backend=" << a.backend << '\n';
  }

  PlannerOptions opts;
  opts.gait = a.gait;
  opts.seed_gait = a.seed_gait;
  opts.angular_dynamics = !a.linear_only;
  opts.swing_apex = a.apex;
  opts.bnb.gap_tol = a.gap_tol;
  opts.bnb.time_limit = a.time_limit;
  opts.bnb.workers = a.workers;
  opts.bnb.backend = a.backend;
  if (log.is_open()) {
    opts.bnb.on_event = [&log](const BnbEvent& e) { log << format_event(e) << '\n'; };
  }

  PlannerResult res;
  try {
    res = run_planner(scene, robot, task, opts);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kUsage;
  }
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';

  const Census& c = res.census;
  std::cout << "variables " << c.variables << " binaries " << c.binaries << " rows "
            << c.linear_rows << " implications " << c.implications << " quadratic "
            << c.quadratic_bounds << '\n';
  if (res.seed.attempted) {
    std::cout << "seed gait " << (res.seed.found ? "found" : "not found") << " ("
              << fmt("%.3f", res.seed.wall_time) << " s)"
              << (res.solution.seed_accepted ? ", accepted" : "") << '\n';
  }
  const MicpSolution& s = res.solution;
  std::cout << "status " << to_string(s.status) << " objective " << fmt("%.9g", s.objective)
            << " gap " << fmt("%.3e", s.gap) << " nodes " << s.nodes << " time "
            << fmt("%.3f", s.wall_time) << " s\n";
  if (log.is_open()) {
    log << "# status " << to_string(s.status) << " objective " << fmt("%.9g", s.objective)
        << " gap " << fmt("%.3e", s.gap) << " nodes " << s.nodes << '\n';
  }

  if (!res.plan) {
    return s.status == SolveStatus::kInfeasible || s.status == SolveStatus::kUnbounded
               ? kInfeasible
               : kLimit;
  }
  try {
    export_plan(*res.plan, robot, a.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  std::cout << "gait";
  for (const auto& g : res.plan->gait_labels) std::cout << ' ' << g;
  std::cout << "\nplan written to " << a.out_dir << '\n';
  std::cout << res.report.summary();
  if (!res.report.passed) return kInvalid;
  if (s.status != SolveStatus::kOptimal) return kLimit;
  return kOk;
}

int cmd_validate(const ValidateArgs& a) {
  LocomotionPlan plan;
  TerrainScene scene;
  RobotModel robot;
  try {
    plan = load_plan_file(a.plan);
    scene = load_terrain_file(a.terrain);
    robot = load_robot_file(a.robot);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  const ValidationReport rep = validate(plan, scene, robot);
  std::cout << rep.summary();
  if (!rep.passed) {
    for (const auto& f : rep.families) {
      if (!f.pass) std::cerr << "failed: " << f.family << '\n';
    }
    return kInvalid;
  }
  return kOk;
}

struct BenchEntry {
  std::string name, terrain, robot, task, gait;
  bool angular = true;
};

std::vector<BenchEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("manifest: ") + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  std::vector<BenchEntry> out;
  if (!doc.contains("scenarios") || !doc["scenarios"].is_array()) {
    throw InputError("manifest: expected a scenarios array");
  }
  for (const auto& s : doc["scenarios"]) {
    BenchEntry e;
    try {
      e.name = s.at("name").get<std::string>();
      e.terrain = (base / s.at("terrain").get<std::string>()).string();
      e.robot = (base / s.at("robot").get<std::string>()).string();
      e.task = (base / s.at("task").get<std::string>()).string();
      e.gait = s.value("gait", std::string());
      e.angular = s.value("angular_dynamics", true);
    } catch (const nlohmann::json::exception& ex) {
      throw InputError(std::string("manifest entry: ") + ex.what());
    }
    out.push_back(e);
  }
  return out;
}

int cmd_bench(const BenchArgs& a) {
  std::vector<BenchEntry> entries;
  try {
    entries = load_manifest(a.manifest);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  std::ofstream out(a.out_file);
  if (!out) {
    std::cerr << "error: cannot write " << a.out_file << '\n';
    return kUsage;
  }
  out << "scenario,gait,angular_dynamics,repeats,mean_time_s,min_time_s,max_time_s,"
         "variables,binaries,linear_rows,implications,quadratic_bounds,status,objective,"
         "gap,nodes\n";

  struct Row {
    BenchEntry entry;
    std::string gait;
    double mean = 0.0;
  };
  std::vector<Row> rows;
  for (const BenchEntry& e : entries) {
    TerrainScene scene;
    RobotModel robot;
    Task task;
    try {
      scene = load_terrain_file(e.terrain);
      robot = load_robot_file(e.robot);
      task = load_task_file(e.task);
    } catch (const std::exception& ex) {
      std::cerr << "error: " << e.name << ": " << ex.what() << '\n';
      return kUsage;
    }
    PlannerOptions opts;
    opts.gait = e.gait;
    opts.angular_dynamics = e.angular;
    opts.bnb.time_limit = a.time_limit;
    std::vector<double> times;
    PlannerResult last;
    for (int r = 0; r < a.repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      last = run_planner(scene, robot, task, opts);
      times.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    const double mean = std::accumulate(times.begin(), times.end(), 0.0) / times.size();
    const auto [mn, mx] = std::minmax_element(times.begin(), times.end());
    const Census& c = last.census;
    const MicpSolution& s = last.solution;
    const std::string gait = e.gait.empty() ? task.gait : e.gait;
    out << e.name << ',' << gait << ',' << (e.angular ? 1 : 0) << ',' << a.repeats << ','
        << fmt("%.6f", mean) << ',' << fmt("%.6f", *mn) << ',' << fmt("%.6f", *mx) << ','
        << c.variables << ',' << c.binaries << ',' << c.linear_rows << ',' << c.implications
        << ',' << c.quadratic_bounds << ',' << to_string(s.status) << ','
        << fmt("%.9g", s.objective) << ',' << fmt("%.3e", s.gap) << ',' << s.nodes << '\n';
    std::cout << e.name << ": " << gait << (e.angular ? "" : " (linear)") << " mean "
              << fmt("%.3f", mean) << " s, " << to_string(s.status) << ", " << s.nodes
              << " nodes\n";
    rows.push_back({e, gait, mean});
  }

  // Direction summaries on scenarios that share terrain and task files.
  for (const Row& r : rows) {
    for (const Row& q : rows) {
      const bool same = r.entry.terrain == q.entry.terrain && r.entry.task == q.entry.task;
      if (!same || q.mean <= 0) continue;
      if (r.gait == "free" && q.gait != "free" && r.entry.angular && q.entry.angular) {
        std::cout << "ratio free/" << q.gait << " (" << r.entry.name << "): "
                  << fmt("%.2f", r.mean / q.mean) << '\n';
      }
      if (r.gait == q.gait && r.entry.angular && !q.entry.angular) {
        std::cout << "ratio angular/linear (" << r.entry.name << "): "
                  << fmt("%.2f", r.mean / q.mean) << '\n';
      }
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-integer contact, gait and centroidal motion planner"};
  app.require_subcommand(1);

  PlanArgs pa;
  CLI::App* plan = app.add_subcommand("plan", "Solve a scenario and export the plan");
  plan->add_option("terrain", pa.terrain, "Terrain document")->required();
  plan->add_option("robot", pa.robot, "Robot document")->required();
  plan->add_option("task", pa.task, "Task document")->required();
  plan->add_option("out_dir", pa.out_dir, "Output directory")->required();
  plan->add_option("--gait", pa.gait, "Override the task gait")
      ->check(CLI::IsMember({"free", "walk", "trot"}));
  plan->add_option("--gap-tol", pa.gap_tol, "Relative optimality gap")->check(CLI::NonNegativeNumber);
  plan->add_option("--time-limit", pa.time_limit, "Branch-and-bound time limit (s)")
      ->check(CLI::PositiveNumber);
  plan->add_option("--workers", pa.workers, "Branch-and-bound threads")->check(CLI::PositiveNumber);
  plan->add_flag("--seed-gait", pa.seed_gait, "Seed the gait from a linear-dynamics pre-solve");
  plan->add_flag("--linear-only", pa.linear_only, "Drop the angular-momentum dynamics");
  plan->add_option("--backend", pa.backend, "Convex backend");
  plan->add_option("--seed", pa.seed, "Random seed (recorded in the log)");
  plan->add_option("--log", pa.log, "Write solver events to this file");
  plan->add_option("--apex", pa.apex, "Swing apex height (m)")->check(CLI::NonNegativeNumber);

  ValidateArgs va;
  CLI::App* val = app.add_subcommand("validate", "Check a plan against every constraint family");
  val->add_option("plan", va.plan, "plan.json")->required();
  val->add_option("terrain", va.terrain, "Terrain document")->required();
  val->add_option("robot", va.robot, "Robot document")->required();

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Time the scenarios of a manifest");
  bench->add_option("manifest", ba.manifest, "Scenario manifest")->required();
  bench->add_option("out_file", ba.out_file, "CSV output")->required();
  bench->add_option("--repeats", ba.repeats, "Repeats per scenario")->check(CLI::PositiveNumber);
  bench->add_option("--time-limit", ba.time_limit, "Per-solve time limit (s)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (*plan) return cmd_plan(pa);
  if (*val) return cmd_validate(va);
  return cmd_bench(ba);
}
