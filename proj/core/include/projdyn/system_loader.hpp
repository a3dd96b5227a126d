#ifndef PROJDYN_SYSTEM_LOADER_HPP
#define PROJDYN_SYSTEM_LOADER_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string_view>
#include <vector>

#include "projdyn/mechanical_system.hpp"

namespace projdyn {

/// Multivariate polynomial sum_i c_i prod_j q_j^{p_ij}.
class Polynomial {
 public:
  struct Term {
    double coefficient = 0.0;
    std::vector<int> powers;  // one exponent per coordinate
  };

  Polynomial(Eigen::Index n, std::vector<Term> terms);

  Eigen::Index dim() const { return n_; }
  const std::vector<Term>& terms() const { return terms_; }

  double value(const Eigen::VectorXd& q) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& q) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& q) const;

 private:
  Eigen::Index n_;
  std::vector<Term> terms_;
};

/// Builds a system with constant M, f_g and B and polynomial constraint
/// residuals from the JSON definition documented in docs/system_format.md.
/// Throws InvalidInput on malformed definitions.
MechanicalSystem parse_system_definition(std::string_view json_text);
MechanicalSystem load_system_file(const std::filesystem::path& path);

}  // namespace projdyn

#endif  // PROJDYN_SYSTEM_LOADER_HPP
