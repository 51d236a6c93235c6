#pragma once

// Checked accessors for input documents; every failure is an InputError that
// names the offending key.

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "locomip/errors.hpp"

namespace locomip::jsonutil {

using nlohmann::json;

inline const json& require(const json& j, const char* key,
                           const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw InputError(where + ": missing key '" + key + "'");
  }
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

inline double number_or(const json& j, const char* key, double fallback,
                        const std::string& where) {
  if (!j.contains(key)) return fallback;
  return number(j.at(key), where + "." + key);
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InputError(where + ": expected an integer");
  return j.get<int>();
}

inline Eigen::Vector3d vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw InputError(where + ": expected an array of 3 numbers");
  }
  return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

inline Eigen::Matrix3d mat3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw InputError(where + ": expected a 3x3 array");
  }
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec3(j[r], where).transpose();
  return m;
}

inline Eigen::MatrixXd matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw InputError(where + ": expected a 2-D array");
  }
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols) {
      throw InputError(where + ": ragged matrix");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = number(j[r][c], where);
  }
  return m;
}

inline Eigen::VectorXd vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = number(j[i], where);
  return v;
}

inline json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(where + ": " + e.what());
  }
}

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

inline json to_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace locomip::jsonutil
