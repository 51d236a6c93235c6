#include "locomip/robot_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "json_util.hpp"

namespace locomip {

void RobotModel::validate() const {
  if (!(mass > 0)) throw ModelError("robot: mass must be positive");
  if (legs.empty()) throw ModelError("robot: at least one leg required");
  if (!(d_lim > 0)) throw ModelError("robot: d_lim must be positive");
  if (!(box_min.array() < box_max.array()).all()) {
    throw ModelError("robot: com_box min must be below max componentwise");
  }
  for (const auto& leg : legs) {
    if (std::abs(leg.J_nominal.determinant()) <= 1e-12) {
      throw ModelError("robot: singular nominal Jacobian for leg '" +
                       leg.name + "'");
    }
    if (!(leg.tau_max.array() > 0).all()) {
      throw ModelError("robot: tau_max must be positive for leg '" + leg.name +
                       "'");
    }
    if (!(leg.L >= 0)) throw ModelError("robot: negative L for '" + leg.name + "'");
  }
  if (static_cast<int>(initial_feet.size()) != n_legs()) {
    throw ModelError("robot: initial_feet needs one point per leg");
  }
}

RobotModel load_robot(const nlohmann::json& doc) {
  using namespace jsonutil;
  RobotModel r;
  if (doc.contains("name") && doc["name"].is_string()) r.name = doc["name"];
  r.mass = number(require(doc, "mass", "robot"), "robot.mass");
  r.d_lim = number(require(doc, "d_lim", "robot"), "robot.d_lim");
  const json& box = require(doc, "com_box", "robot");
  r.box_min = vec3(require(box, "min", "com_box"), "com_box.min");
  r.box_max = vec3(require(box, "max", "com_box"), "com_box.max");
  r.initial_com = vec3(require(doc, "initial_com", "robot"), "initial_com");

  const json& legs = require(doc, "legs", "robot");
  const json& feet = require(doc, "initial_feet", "robot");
  if (!legs.is_array() || !feet.is_array() || legs.size() != feet.size()) {
    throw InputError("robot: legs and initial_feet must be arrays of equal size");
  }
  std::vector<std::pair<LegParams, Eigen::Vector3d>> entries;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const std::string where = "legs[" + std::to_string(i) + "]";
    const json& jl = legs[i];
    LegParams leg;
    leg.name = jl.value("name", "leg" + std::to_string(i));
    leg.L = number(require(jl, "L", where), where + ".L");
    leg.phi = number(require(jl, "phi", where), where + ".phi");
    leg.J_nominal = mat3(require(jl, "J_nominal", where), where + ".J_nominal");
    leg.tau_max = vec3(require(jl, "tau_max", where), where + ".tau_max");
    entries.emplace_back(leg, vec3(feet[i], "initial_feet"));
  }

  static const std::array<const char*, 4> kOrder = {"LF", "RF", "LH", "RH"};
  if (entries.size() == 4) {
    auto rank = [](const std::string& n) {
      auto it = std::find(kOrder.begin(), kOrder.end(), n);
      return static_cast<int>(it - kOrder.begin());
    };
    bool all_named = std::all_of(entries.begin(), entries.end(), [&](auto& e) {
      return rank(e.first.name) < 4;
    });
    if (all_named) {
      std::stable_sort(entries.begin(), entries.end(), [&](auto& a, auto& b) {
        return rank(a.first.name) < rank(b.first.name);
      });
    }
  }
  for (auto& [leg, foot] : entries) {
    r.legs.push_back(leg);
    r.initial_feet.push_back(foot);
  }
  r.validate();
  return r;
}

RobotModel load_robot_text(const std::string& text) {
  return load_robot(jsonutil::parse_text(text, "robot"));
}

RobotModel load_robot_file(const std::string& path) {
  return load_robot(jsonutil::parse_file(path));
}

nlohmann::json robot_to_json(const RobotModel& robot) {
  using jsonutil::to_json;
  nlohmann::json j;
  j["name"] = robot.name;
  j["mass"] = robot.mass;
  j["d_lim"] = robot.d_lim;
  j["com_box"] = {{"min", to_json(robot.box_min)}, {"max", to_json(robot.box_max)}};
  j["initial_com"] = to_json(robot.initial_com);
  j["legs"] = nlohmann::json::array();
  j["initial_feet"] = nlohmann::json::array();
  for (int l = 0; l < robot.n_legs(); ++l) {
    const auto& leg = robot.legs[l];
    nlohmann::json jl;
    jl["name"] = leg.name;
    jl["L"] = leg.L;
    jl["phi"] = leg.phi;
    jl["J_nominal"] = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
      jl["J_nominal"].push_back(to_json(leg.J_nominal.row(r).transpose()));
    }
    jl["tau_max"] = to_json(leg.tau_max);
    j["legs"].push_back(jl);
    j["initial_feet"].push_back(to_json(robot.initial_feet[l]));
  }
  return j;
}

int TrigTable::segment(double theta) const {
  if (!(theta >= lower() && theta <= upper())) {
    throw std::out_of_range("trig table: angle " + std::to_string(theta) +
                            " outside [" + std::to_string(lower()) + ", " +
                            std::to_string(upper()) + "]");
  }
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), theta);
  const int k = static_cast<int>(it - boundaries.begin()) - 1;
  return std::min(k, n_segments - 1);
}

double TrigTable::sin(double theta) const {
  const int k = segment(theta);
  return sin_slope[k] * theta + sin_intercept[k];
}

double TrigTable::cos(double theta) const {
  const int k = segment(theta);
  return cos_slope[k] * theta + cos_intercept[k];
}

TrigTable build_trig_table(int n_segments, double theta_lo, double theta_hi) {
  if (n_segments < 1) throw ModelError("trig table: need at least one segment");
  if (!(theta_lo < theta_hi)) throw ModelError("trig table: empty yaw range");
  TrigTable t;
  t.n_segments = n_segments;
  const double h = (theta_hi - theta_lo) / n_segments;
  for (int k = 0; k <= n_segments; ++k) {
    t.boundaries.push_back(k == n_segments ? theta_hi : theta_lo + k * h);
  }
  for (int k = 0; k < n_segments; ++k) {
    const double a = t.boundaries[k];
    const double b = t.boundaries[k + 1];
    const double ms = (std::sin(b) - std::sin(a)) / (b - a);
    const double mc = (std::cos(b) - std::cos(a)) / (b - a);
    t.sin_slope.push_back(ms);
    t.sin_intercept.push_back(std::sin(a) - ms * a);
    t.cos_slope.push_back(mc);
    t.cos_intercept.push_back(std::cos(a) - mc * a);
  }
  return t;
}

}  // namespace locomip
