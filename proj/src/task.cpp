#include <algorithm>
#include <array>

#include "json_util.hpp"
#include "locomip/formulation.hpp"

namespace locomip {
namespace {

using jsonutil::json;

// Scalar weights apply to all three axes.
Eigen::Vector3d weight3(const json& w, const char* key, const Eigen::Vector3d& fallback) {
  if (!w.contains(key)) return fallback;
  const json& v = w.at(key);
  const std::string where = std::string("weights.") + key;
  Eigen::Vector3d out =
      v.is_number() ? Eigen::Vector3d::Constant(jsonutil::number(v, where))
                    : jsonutil::vec3(v, where);
  if ((out.array() < 0).any()) throw InputError(where + ": must be nonnegative");
  return out;
}

double weight1(const json& w, const char* key, double fallback) {
  const double v = jsonutil::number_or(w, key, fallback, "weights");
  if (v < 0) throw InputError(std::string("weights.") + key + ": must be nonnegative");
  return v;
}

}  // namespace

Eigen::MatrixXi gait_preset(const std::string& name, int n_l, int N_f, int N_t) {
  if (n_l < 1 || N_f % n_l != 0) throw InputError("gait: N_f must be a multiple of n_l");
  const int cycles = N_f / n_l;
  Eigen::MatrixXi T = Eigen::MatrixXi::Zero(N_f, N_t);
  if (name == "walk") {
    // LH, LF, RH, RF for a quadruped; leg order otherwise.
    static const std::array<int, 4> kQuadSlot = {1, 3, 0, 2};
    if (N_t < cycles * n_l) throw InputError("gait walk: needs N_t >= N_f");
    for (int i = 0; i < N_f; ++i) {
      const int l = i % n_l;
      const int pos = n_l == 4 ? kQuadSlot[l] : l;
      T(i, (i / n_l) * n_l + pos) = 1;
    }
  } else if (name == "trot") {
    if (n_l != 4) throw InputError("gait trot: needs four legs");
    if (N_t < 2 * cycles) throw InputError("gait trot: needs N_t >= N_f/2");
    // (LF, RH) then (RF, LH).
    static const std::array<int, 4> kPair = {0, 1, 1, 0};
    for (int i = 0; i < N_f; ++i) T(i, 2 * (i / 4) + kPair[i % 4]) = 1;
  } else {
    throw InputError("gait: unknown preset '" + name + "'");
  }
  return T;
}

Task load_task(const json& doc) {
  using namespace jsonutil;
  Task t;
  t.goal = vec3(require(doc, "goal", "task"), "task.goal");
  if (doc.contains("dims")) {
    const json& d = doc["dims"];
    if (d.contains("N_f")) t.N_f = integer(d["N_f"], "dims.N_f");
    if (d.contains("N_t")) t.N_t = integer(d["N_t"], "dims.N_t");
    if (d.contains("N_k")) t.N_k = integer(d["N_k"], "dims.N_k");
    t.dt = number_or(d, "dt", t.dt, "dims");
  }
  if (t.N_f < 0 || t.N_t < 1 || t.N_k < 1 || !(t.dt > 0)) {
    throw InputError("task.dims: counts must be positive and dt > 0");
  }
  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    Weights& W = t.weights;
    W.Qv = weight3(w, "Qv", W.Qv);
    W.QF = weight3(w, "QF", W.QF);
    W.Qg = weight3(w, "Qg", W.Qg);
    W.Qk = weight3(w, "Qk", W.Qk);
    W.qu = weight1(w, "qu", W.qu);
    W.qt = weight1(w, "qt", W.qt);
    W.qalpha = weight1(w, "qalpha", W.qalpha);
  }
  if (doc.contains("gait")) {
    const json& g = doc["gait"];
    if (g.is_string()) {
      t.gait = g.get<std::string>();
      if (t.gait != "free" && t.gait != "walk" && t.gait != "trot") {
        throw InputError("task.gait: expected free, walk, trot or a matrix");
      }
    } else {
      const Eigen::MatrixXd m = matrix(g, "task.gait");
      if (m.rows() != t.N_f || m.cols() != t.N_t) {
        throw InputError("task.gait: matrix must be N_f x N_t");
      }
      if (((m.array() != 0.0) && (m.array() != 1.0)).any()) {
        throw InputError("task.gait: entries must be 0 or 1");
      }
      t.gait = "explicit";
      t.gait_pattern = m.cast<int>();
    }
  }
  if (doc.contains("trig")) {
    const json& tr = doc["trig"];
    if (tr.contains("segments")) t.trig_segments = integer(tr["segments"], "trig.segments");
    if (tr.contains("yaw")) {
      const json& y = tr["yaw"];
      if (!y.is_array() || y.size() != 2) throw InputError("trig.yaw: expected [lo, hi]");
      t.yaw_lo = number(y[0], "trig.yaw");
      t.yaw_hi = number(y[1], "trig.yaw");
    }
    if (t.trig_segments < 1 || !(t.yaw_lo < t.yaw_hi)) {
      throw InputError("trig: need segments >= 1 and lo < hi");
    }
  }
  if (doc.contains("limits")) {
    const json& l = doc["limits"];
    t.force_limit = number_or(l, "force", t.force_limit, "limits");
    t.velocity_limit = number_or(l, "velocity", t.velocity_limit, "limits");
    if (!(t.force_limit > 0) || !(t.velocity_limit > 0)) {
      throw InputError("limits: must be positive");
    }
  }
  return t;
}

Task load_task_text(const std::string& text) {
  return load_task(jsonutil::parse_text(text, "task"));
}

Task load_task_file(const std::string& path) {
  return load_task(jsonutil::parse_file(path));
}

json task_to_json(const Task& t) {
  using jsonutil::to_json;
  json j;
  j["goal"] = to_json(t.goal);
  j["dims"] = {{"N_f", t.N_f}, {"N_t", t.N_t}, {"N_k", t.N_k}, {"dt", t.dt}};
  const Weights& w = t.weights;
  j["weights"] = {{"Qv", to_json(w.Qv)}, {"QF", to_json(w.QF)}, {"Qg", to_json(w.Qg)},
                  {"Qk", to_json(w.Qk)}, {"qu", w.qu},          {"qt", w.qt},
                  {"qalpha", w.qalpha}};
  if (t.gait == "explicit") {
    json rows = json::array();
    for (int i = 0; i < t.gait_pattern.rows(); ++i) {
      json r = json::array();
      for (int c = 0; c < t.gait_pattern.cols(); ++c) r.push_back(t.gait_pattern(i, c));
      rows.push_back(r);
    }
    j["gait"] = rows;
  } else {
    j["gait"] = t.gait;
  }
  j["trig"] = {{"segments", t.trig_segments}, {"yaw", {t.yaw_lo, t.yaw_hi}}};
  j["limits"] = {{"force", t.force_limit}, {"velocity", t.velocity_limit}};
  return j;
}

}  // namespace locomip
