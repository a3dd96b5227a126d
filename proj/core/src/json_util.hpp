#ifndef PROJDYN_SRC_JSON_UTIL_HPP
#define PROJDYN_SRC_JSON_UTIL_HPP

#include <Eigen/Dense>
#include <string>

#include <nlohmann/json.hpp>

#include "projdyn/errors.hpp"
#include "projdyn/mechanical_system.hpp"

namespace projdyn::detail {

inline double get_number(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw InvalidInput(std::string("expected numeric field \"") + key + "\"");
  }
  return obj[key].get<double>();
}

inline Eigen::VectorXd to_vector(const nlohmann::json& node, Eigen::Index n,
                                 const char* what) {
  if (!node.is_array() || static_cast<Eigen::Index>(node.size()) != n) {
    throw InvalidInput(std::string("\"") + what + "\" must be an array of " +
                       std::to_string(n) + " numbers");
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = node[static_cast<std::size_t>(i)];
    if (!v.is_number()) {
      throw InvalidInput(std::string("\"") + what + "\" has a non-numeric entry");
    }
    out(i) = v.get<double>();
  }
  return out;
}

inline Eigen::VectorXd get_vector(const nlohmann::json& obj, const char* key,
                                  Eigen::Index n) {
  if (!obj.contains(key)) {
    throw InvalidInput(std::string("missing field \"") + key + "\"");
  }
  return to_vector(obj[key], n, key);
}

inline Eigen::MatrixXd get_matrix(const nlohmann::json& obj, const char* key,
                                  Eigen::Index rows, Eigen::Index cols) {
  if (!obj.contains(key) || !obj[key].is_array() ||
      static_cast<Eigen::Index>(obj[key].size()) != rows) {
    throw InvalidInput(std::string("\"") + key + "\" must have " +
                       std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    out.row(i) = to_vector(obj[key][static_cast<std::size_t>(i)], cols, key);
  }
  return out;
}

MechanicalSystem system_from_json(const nlohmann::json& doc);

}  // namespace projdyn::detail

#endif  // PROJDYN_SRC_JSON_UTIL_HPP
