#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json_util.hpp"
#include "locomip/plan.hpp"

namespace locomip {
namespace {

using Eigen::Vector3d;
using jsonutil::json;

json vec_json(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json vec_list(const std::vector<Vector3d>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(vec_json(v));
  return a;
}

std::vector<Vector3d> vec_list_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array");
  std::vector<Vector3d> out;
  for (const auto& e : j) out.push_back(jsonutil::vec3(e, where));
  return out;
}

std::vector<double> doubles_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(jsonutil::number(e, where));
  return out;
}

int argmax_binary(const std::vector<double>& x, const std::vector<VarId>& ids) {
  int best = 0;
  for (std::size_t k = 1; k < ids.size(); ++k) {
    if (x[ids[k].index] > x[ids[best].index]) best = static_cast<int>(k);
  }
  return best;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c > 0) out << ',';
      out << fmt(r[c]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

int LocomotionPlan::support_contact(int leg, int knot) const {
  int best = -1;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const ContactEntry& e = schedule[i];
    if (e.leg != leg || dims.touchdown_knot(e.slot) > knot) continue;
    if (best < 0 || e.slot > schedule[best].slot) best = static_cast<int>(i);
  }
  return best;
}

bool LocomotionPlan::swinging(int leg, int knot) const {
  for (const ContactEntry& e : schedule) {
    if (e.leg != leg) continue;
    const int first = e.slot * dims.N_k + 1;
    if (knot >= first && knot < dims.touchdown_knot(e.slot)) return true;
  }
  return false;
}

LocomotionPlan extract(const MicpSolution& solution, const Formulation& form,
                       const RobotModel& robot, const TerrainScene& scene) {
  if (!solution.has_incumbent) throw ModelError("extract: no incumbent solution");
  const MicpProblem& P = form.problem;
  const std::vector<double>& x = solution.x;
  if (static_cast<int>(x.size()) != P.num_vars()) {
    throw ModelError("extract: solution does not match the problem");
  }
  for (int v : P.binary_indices()) {
    if (std::abs(x[v] - std::round(x[v])) > 1e-6) {
      throw ModelError("extract: binary '" + P.vars()[v].name + "' is fractional");
    }
  }
  const PlanDims& d = form.dims;
  const VariableMap& m = form.map;
  const double W = form.weight;
  auto val = [&](VarId id) { return x[id.index]; };
  auto val3 = [&](const Vec3Id& id) { return Vector3d(val(id[0]), val(id[1]), val(id[2])); };

  LocomotionPlan plan;
  plan.dims = d;
  for (const auto& leg : robot.legs) plan.leg_names.push_back(leg.name);
  plan.mass = robot.mass;
  plan.gravity = scene.gravity;
  plan.yaw_lo = form.trig.lower();
  plan.yaw_hi = form.trig.upper();
  plan.angular_dynamics = form.options.angular_dynamics;

  const int N = d.N();
  for (int k = 0; k <= N; ++k) {
    plan.time.push_back(k * d.dt);
    plan.com.push_back(val3(m.r[k]));
    plan.vel.push_back(val3(m.v[k]));
    plan.acc.push_back(k == 0 ? Vector3d::Zero()
                              : Vector3d((plan.vel[k] - plan.vel[k - 1]) / d.dt));
    if (form.options.angular_dynamics) {
      plan.ang.push_back(W * val3(m.k[k]));
    } else {
      plan.ang.push_back(Vector3d::Zero());
    }
    plan.ang_rate.push_back(k == 0 ? Vector3d::Zero()
                                   : Vector3d((plan.ang[k] - plan.ang[k - 1]) / d.dt));
  }
  plan.foot.assign(d.n_l, {});
  plan.force.assign(d.n_l, std::vector<Vector3d>(N + 1, Vector3d::Zero()));
  plan.alpha.assign(d.n_l, std::vector<double>(N + 1, 0.0));
  plan.products.assign(d.n_l, std::vector<Products>(N + 1, Products{}));
  for (int l = 0; l < d.n_l; ++l) {
    for (int k = 0; k <= N; ++k) plan.foot[l].push_back(val3(m.p[l][k]));
    for (int k = 1; k <= N; ++k) {
      plan.force[l][k] = W * val3(m.lambda[l][k]);
      plan.alpha[l][k] = W * val(m.alpha[l][k]);
      if (form.options.angular_dynamics) {
        for (int q = 0; q < 6; ++q) {
          plan.products[l][k][q] = {val(m.u[l][k][q][0]), val(m.u[l][k][q][1])};
        }
      }
    }
  }
  for (int i = 0; i < d.N_f; ++i) {
    ContactEntry e;
    e.contact = i;
    e.leg = d.leg_of(i);
    e.slot = argmax_binary(x, m.T[i]);
    e.region = argmax_binary(x, m.H[i]);
    e.position = val3(m.f[i]);
    e.theta = val(m.theta[i]);
    e.s = val(m.s[i]);
    e.c = val(m.c[i]);
    e.com_xy = {val(m.rT[i][0]), val(m.rT[i][1])};
    plan.schedule.push_back(e);
  }
  plan.gait_labels = classify_gait(plan.schedule, d);
  plan.status = to_string(solution.status);
  plan.objective = solution.objective;
  plan.lower_bound = solution.lower_bound;
  plan.gap = solution.gap;
  plan.nodes = solution.nodes;
  plan.wall_time = solution.wall_time;
  return plan;
}

std::vector<std::string> classify_gait(const std::vector<ContactEntry>& schedule,
                                       const PlanDims& dims) {
  std::vector<std::string> labels;
  for (int j = 0; j < dims.N_t; ++j) {
    std::vector<int> legs;
    for (const ContactEntry& e : schedule) {
      if (e.slot == j) legs.push_back(e.leg);
    }
    std::sort(legs.begin(), legs.end());
    // LF+RH and RF+LH are the diagonals in LF, RF, LH, RH order.
    const bool diagonal = dims.n_l == 4 && legs.size() == 2 &&
                          ((legs[0] == 0 && legs[1] == 3) || (legs[0] == 1 && legs[1] == 2));
    if (legs.empty()) {
      labels.push_back("stance");
    } else if (legs.size() == 1) {
      labels.push_back("walk");
    } else if (diagonal) {
      labels.push_back("trot");
    } else {
      labels.push_back("other");
    }
  }
  return labels;
}

Vector3d swing_point(const Vector3d& liftoff, const Vector3d& touchdown, double apex,
                     double s) {
  const double sigma = s * s * (3.0 - 2.0 * s);
  const double bump = 16.0 * s * s * (1.0 - s) * (1.0 - s);
  Vector3d p = (1.0 - sigma) * liftoff + sigma * touchdown;
  p.z() += apex * bump;
  return p;
}

LocomotionPlan interpolate_swings(const LocomotionPlan& plan, double apex_height,
                                  int samples_per_knot) {
  if (apex_height < 0) throw InputError("interpolate_swings: apex height < 0");
  if (samples_per_knot < 1) throw InputError("interpolate_swings: need samples >= 1");
  LocomotionPlan out = plan;
  const PlanDims& d = plan.dims;
  out.samples_per_knot = samples_per_knot;
  out.foot_path.assign(d.n_l, {});
  const int total = d.N() * samples_per_knot;
  for (int l = 0; l < d.n_l; ++l) {
    for (int q = 0; q <= total; ++q) {
      const double tk = static_cast<double>(q) / samples_per_knot;  // in knots
      Vector3d p = plan.foot[l][std::min(d.N(), q / samples_per_knot)];
      for (const ContactEntry& e : plan.schedule) {
        if (e.leg != l) continue;
        const int k0 = e.slot * d.N_k;
        const int k1 = d.touchdown_knot(e.slot);
        if (tk > k0 && tk < k1) {
          p = swing_point(plan.foot[l][k0], plan.foot[l][k1], apex_height,
                          (tk - k0) / d.N_k);
        } else if (q == k1 * samples_per_knot) {
          p = plan.foot[l][k1];
        }
      }
      out.foot_path[l].push_back(p);
    }
  }
  return out;
}

json plan_to_json(const LocomotionPlan& p) {
  json j;
  j["version"] = kPlanVersion;
  j["units"] = {{"length", "m"},          {"time", "s"},
                {"force", "N"},           {"angular_momentum", "N*m*s"},
                {"angle", "rad"},         {"products", "scaled by body weight"}};
  const PlanDims& d = p.dims;
  j["dims"] = {{"n_l", d.n_l}, {"N_f", d.N_f}, {"N_t", d.N_t}, {"N_k", d.N_k},
               {"N_r", d.N_r}, {"N_s", d.N_s}, {"N_e", d.N_e}, {"dt", d.dt}};
  j["legs"] = p.leg_names;
  j["mass"] = p.mass;
  j["gravity"] = vec_json(p.gravity);
  j["yaw"] = {p.yaw_lo, p.yaw_hi};
  j["angular_dynamics"] = p.angular_dynamics;
  j["solver"] = {{"status", p.status},
                 {"objective", p.objective},
                 {"lower_bound", p.lower_bound},
                 {"gap", p.gap},
                 {"nodes", p.nodes}};
  j["time"] = p.time;
  j["com"] = vec_list(p.com);
  j["velocity"] = vec_list(p.vel);
  j["acceleration"] = vec_list(p.acc);
  j["angular_momentum"] = vec_list(p.ang);
  j["angular_momentum_rate"] = vec_list(p.ang_rate);
  json legs = json::array();
  for (int l = 0; l < d.n_l; ++l) {
    json jl;
    jl["foot"] = vec_list(p.foot[l]);
    jl["force"] = vec_list(p.force[l]);
    jl["alpha"] = p.alpha[l];
    json prods = json::array();
    for (const Products& pr : p.products[l]) {
      json row = json::array();
      for (const auto& uv : pr) {
        row.push_back(uv[0]);
        row.push_back(uv[1]);
      }
      prods.push_back(row);
    }
    jl["products"] = prods;
    legs.push_back(jl);
  }
  j["leg_data"] = legs;
  json sched = json::array();
  for (const ContactEntry& e : p.schedule) {
    sched.push_back({{"contact", e.contact},
                     {"leg", e.leg},
                     {"slot", e.slot},
                     {"region", e.region},
                     {"position", vec_json(e.position)},
                     {"theta", e.theta},
                     {"s", e.s},
                     {"c", e.c},
                     {"com_xy", {e.com_xy.x(), e.com_xy.y()}}});
  }
  j["schedule"] = sched;
  j["gait_labels"] = p.gait_labels;
  return j;
}

LocomotionPlan plan_from_json(const json& j) {
  using namespace jsonutil;
  const json& ver = require(j, "version", "plan");
  if (!ver.is_number_integer() || ver.get<int>() != kPlanVersion) {
    throw InputError("plan: unsupported version " + ver.dump());
  }
  LocomotionPlan p;
  const json& d = require(j, "dims", "plan");
  p.dims.n_l = integer(require(d, "n_l", "dims"), "dims.n_l");
  p.dims.N_f = integer(require(d, "N_f", "dims"), "dims.N_f");
  p.dims.N_t = integer(require(d, "N_t", "dims"), "dims.N_t");
  p.dims.N_k = integer(require(d, "N_k", "dims"), "dims.N_k");
  p.dims.N_r = integer(require(d, "N_r", "dims"), "dims.N_r");
  p.dims.N_s = integer(require(d, "N_s", "dims"), "dims.N_s");
  p.dims.N_e = integer(require(d, "N_e", "dims"), "dims.N_e");
  p.dims.dt = number(require(d, "dt", "dims"), "dims.dt");
  try {
    p.dims.validate();
  } catch (const ModelError& e) {
    throw InputError(std::string("plan: ") + e.what());
  }
  const int N = p.dims.N();
  const int nl = p.dims.n_l;
  for (const auto& n : require(j, "legs", "plan")) p.leg_names.push_back(n.get<std::string>());
  p.mass = number(require(j, "mass", "plan"), "plan.mass");
  p.gravity = vec3(require(j, "gravity", "plan"), "plan.gravity");
  const std::vector<double> yaw = doubles_from(require(j, "yaw", "plan"), "plan.yaw");
  if (yaw.size() != 2) throw InputError("plan.yaw: expected [lo, hi]");
  p.yaw_lo = yaw[0];
  p.yaw_hi = yaw[1];
  p.angular_dynamics = require(j, "angular_dynamics", "plan").get<bool>();
  const json& s = require(j, "solver", "plan");
  p.status = require(s, "status", "solver").get<std::string>();
  p.objective = number(require(s, "objective", "solver"), "solver.objective");
  p.lower_bound = number(require(s, "lower_bound", "solver"), "solver.lower_bound");
  p.gap = number(require(s, "gap", "solver"), "solver.gap");
  p.nodes = require(s, "nodes", "solver").get<long>();

  auto knots = [&](const char* key) {
    auto v = vec_list_from(require(j, key, "plan"), std::string("plan.") + key);
    if (static_cast<int>(v.size()) != N + 1) {
      throw InputError(std::string("plan.") + key + ": expected N+1 entries");
    }
    return v;
  };
  p.time = doubles_from(require(j, "time", "plan"), "plan.time");
  if (static_cast<int>(p.time.size()) != N + 1) throw InputError("plan.time: expected N+1 entries");
  p.com = knots("com");
  p.vel = knots("velocity");
  p.acc = knots("acceleration");
  p.ang = knots("angular_momentum");
  p.ang_rate = knots("angular_momentum_rate");

  const json& legs = require(j, "leg_data", "plan");
  if (!legs.is_array() || static_cast<int>(legs.size()) != nl ||
      static_cast<int>(p.leg_names.size()) != nl) {
    throw InputError("plan.leg_data: expected one entry per leg");
  }
  for (int l = 0; l < nl; ++l) {
    const json& jl = legs[l];
    const std::string where = "leg_data[" + std::to_string(l) + "]";
    p.foot.push_back(vec_list_from(require(jl, "foot", where), where + ".foot"));
    p.force.push_back(vec_list_from(require(jl, "force", where), where + ".force"));
    p.alpha.push_back(doubles_from(require(jl, "alpha", where), where + ".alpha"));
    if (static_cast<int>(p.foot[l].size()) != N + 1 ||
        static_cast<int>(p.force[l].size()) != N + 1 ||
        static_cast<int>(p.alpha[l].size()) != N + 1) {
      throw InputError(where + ": expected N+1 entries per signal");
    }
    std::vector<Products> prods;
    for (const json& row : require(jl, "products", where)) {
      const std::vector<double> v = doubles_from(row, where + ".products");
      if (v.size() != 12) throw InputError(where + ".products: expected 12 values");
      Products pr;
      for (int q = 0; q < 6; ++q) pr[q] = {v[2 * q], v[2 * q + 1]};
      prods.push_back(pr);
    }
    if (static_cast<int>(prods.size()) != N + 1) {
      throw InputError(where + ".products: expected N+1 entries");
    }
    p.products.push_back(std::move(prods));
  }
  for (const json& e : require(j, "schedule", "plan")) {
    ContactEntry c;
    c.contact = integer(require(e, "contact", "schedule"), "schedule.contact");
    c.leg = integer(require(e, "leg", "schedule"), "schedule.leg");
    c.slot = integer(require(e, "slot", "schedule"), "schedule.slot");
    c.region = integer(require(e, "region", "schedule"), "schedule.region");
    c.position = vec3(require(e, "position", "schedule"), "schedule.position");
    c.theta = number(require(e, "theta", "schedule"), "schedule.theta");
    c.s = number(require(e, "s", "schedule"), "schedule.s");
    c.c = number(require(e, "c", "schedule"), "schedule.c");
    const std::vector<double> xy = doubles_from(require(e, "com_xy", "schedule"), "com_xy");
    if (xy.size() != 2) throw InputError("schedule.com_xy: expected 2 numbers");
    c.com_xy = {xy[0], xy[1]};
    if (c.leg < 0 || c.leg >= nl || c.slot < 0 || c.slot >= p.dims.N_t) {
      throw InputError("schedule: leg or slot out of range");
    }
    p.schedule.push_back(c);
  }
  for (const auto& g : require(j, "gait_labels", "plan")) {
    p.gait_labels.push_back(g.get<std::string>());
  }
  return p;
}

LocomotionPlan load_plan_file(const std::string& path) {
  return plan_from_json(jsonutil::parse_file(path));
}

void export_plan(const LocomotionPlan& p, const RobotModel& robot,
                 const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw std::runtime_error("cannot create " + directory + ": " + ec.message());
  const fs::path dir(directory);
  {
    std::ofstream out(dir / "plan.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "plan.json").string());
    out << plan_to_json(p).dump(1) << '\n';
  }
  const int N = p.N();
  const int nl = p.dims.n_l;

  std::vector<std::vector<double>> rows;
  for (int k = 0; k <= N; ++k) {
    std::vector<double> r = {p.time[k]};
    for (const auto* sig : {&p.com, &p.vel, &p.acc, &p.ang}) {
      for (int a = 0; a < 3; ++a) r.push_back((*sig)[k][a]);
    }
    rows.push_back(r);
  }
  write_csv(dir / "com.csv", "time,x,y,z,vx,vy,vz,ax,ay,az,kx,ky,kz", rows);

  std::string fh = "time", ah = "time", th = "time";
  for (int l = 0; l < nl; ++l) {
    const std::string& n = p.leg_names[l];
    fh += "," + n + "_fx," + n + "_fy," + n + "_fz";
    ah += "," + n + "_alpha," + n + "_alpha_normalized";
    th += "," + n + "_tau0," + n + "_tau1," + n + "_tau2";
  }
  std::vector<std::vector<double>> frows, arows, trows;
  for (int k = 1; k <= N; ++k) {
    std::vector<double> fr = {p.time[k]}, ar = {p.time[k]}, tr = {p.time[k]};
    for (int l = 0; l < nl; ++l) {
      const Vector3d& F = p.force[l][k];
      for (int a = 0; a < 3; ++a) fr.push_back(F[a]);
      const double mag = F.norm();
      ar.push_back(p.alpha[l][k]);
      ar.push_back(mag > 0 ? p.alpha[l][k] / mag : 0.0);
      const Vector3d tau = robot.legs[l].J_nominal.transpose() * F;
      for (int a = 0; a < 3; ++a) tr.push_back(tau[a]);
    }
    frows.push_back(fr);
    arows.push_back(ar);
    trows.push_back(tr);
  }
  write_csv(dir / "forces.csv", fh, frows);
  write_csv(dir / "alpha.csv", ah, arows);
  write_csv(dir / "torque.csv", th, trows);

  if (p.samples_per_knot > 0 && static_cast<int>(p.foot_path.size()) == nl) {
    std::string ph = "time";
    for (int l = 0; l < nl; ++l) {
      const std::string& n = p.leg_names[l];
      ph += "," + n + "_x," + n + "_y," + n + "_z";
    }
    std::vector<std::vector<double>> prows;
    const double h = p.dims.dt / p.samples_per_knot;
    for (size_t q = 0; q < p.foot_path[0].size(); ++q) {
      std::vector<double> r = {p.time[0] + h * static_cast<double>(q)};
      for (int l = 0; l < nl; ++l) {
        for (int a = 0; a < 3; ++a) r.push_back(p.foot_path[l][q][a]);
      }
      prows.push_back(r);
    }
    write_csv(dir / "feet.csv", ph, prows);
  }
}

}  // namespace locomip
