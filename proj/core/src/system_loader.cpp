#include "projdyn/system_loader.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "projdyn/errors.hpp"

namespace projdyn {
namespace {

using nlohmann::json;

double int_power(double x, int p) {
  double out = 1.0;
  for (int i = 0; i < p; ++i) out *= x;
  return out;
}

Polynomial parse_polynomial(const json& node, Eigen::Index n) {
  if (!node.is_object() || !node.contains("terms") || !node["terms"].is_array()) {
    throw InvalidInput("constraint needs a \"terms\" array");
  }
  std::vector<Polynomial::Term> terms;
  for (const json& t : node["terms"]) {
    Polynomial::Term term;
    term.coefficient = detail::get_number(t, "coef");
    if (!t.contains("powers") || !t["powers"].is_array()) {
      throw InvalidInput("polynomial term needs a \"powers\" array");
    }
    for (const json& p : t["powers"]) {
      if (!p.is_number_integer() || p.get<int>() < 0) {
        throw InvalidInput("polynomial powers must be non-negative integers");
      }
      term.powers.push_back(p.get<int>());
    }
    terms.push_back(std::move(term));
  }
  return Polynomial(n, std::move(terms));
}

}  // namespace

Polynomial::Polynomial(Eigen::Index n, std::vector<Term> terms)
    : n_(n), terms_(std::move(terms)) {
  for (const Term& t : terms_) {
    if (static_cast<Eigen::Index>(t.powers.size()) != n_) {
      throw InvalidInput("polynomial term has " +
                         std::to_string(t.powers.size()) +
                         " powers, expected " + std::to_string(n_));
    }
    if (!std::isfinite(t.coefficient)) {
      throw InvalidInput("polynomial coefficient is not finite");
    }
  }
}

double Polynomial::value(const Eigen::VectorXd& q) const {
  double sum = 0.0;
  for (const Term& t : terms_) {
    double prod = t.coefficient;
    for (Eigen::Index j = 0; j < n_; ++j) prod *= int_power(q(j), t.powers[j]);
    sum += prod;
  }
  return sum;
}

Eigen::VectorXd Polynomial::gradient(const Eigen::VectorXd& q) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
  for (const Term& t : terms_) {
    for (Eigen::Index d = 0; d < n_; ++d) {
      const int pd = t.powers[d];
      if (pd == 0) continue;
      double prod = t.coefficient * pd;
      for (Eigen::Index j = 0; j < n_; ++j) {
        prod *= int_power(q(j), j == d ? pd - 1 : t.powers[j]);
      }
      g(d) += prod;
    }
  }
  return g;
}

Eigen::MatrixXd Polynomial::hessian(const Eigen::VectorXd& q) const {
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n_, n_);
  for (const Term& t : terms_) {
    for (Eigen::Index a = 0; a < n_; ++a) {
      for (Eigen::Index b = 0; b < n_; ++b) {
        std::vector<int> p = t.powers;
        double coef = t.coefficient * p[a];
        if (p[a] == 0) continue;
        --p[a];
        coef *= p[b];
        if (p[b] == 0) continue;
        --p[b];
        double prod = coef;
        for (Eigen::Index j = 0; j < n_; ++j) prod *= int_power(q(j), p[j]);
        hess(a, b) += prod;
      }
    }
  }
  return hess;
}

MechanicalSystem parse_system_definition(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("system definition is not valid JSON: ") +
                       e.what());
  }
  return detail::system_from_json(doc);
}

MechanicalSystem load_system_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open system file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_system_definition(buffer.str());
}

namespace detail {

MechanicalSystem system_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidInput("system definition must be an object");
  const auto n = static_cast<Eigen::Index>(get_number(doc, "n"));
  if (n <= 0) throw InvalidInput("system dimension n must be positive");

  const Eigen::MatrixXd mass = get_matrix(doc, "mass", n, n);
  if ((mass - mass.transpose()).norm() > 1e-12 * (1.0 + mass.norm())) {
    throw InvalidInput("mass matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mass, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw InvalidInput("mass matrix must be positive definite");
  }
  const Eigen::VectorXd gravity = doc.contains("gravity")
                                      ? get_vector(doc, "gravity", n)
                                      : Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd input = Eigen::MatrixXd::Identity(n, n);
  if (doc.contains("input_map")) {
    const json& b = doc["input_map"];
    if (!b.is_array() || b.empty() || !b[0].is_array()) {
      throw InvalidInput("input_map must be an n x k array");
    }
    input = get_matrix(doc, "input_map", n,
                       static_cast<Eigen::Index>(b[0].size()));
  }

  auto constraints = std::make_shared<std::vector<Polynomial>>();
  ActiveSet active;
  if (doc.contains("constraints")) {
    if (!doc["constraints"].is_array()) {
      throw InvalidInput("constraints must be an array");
    }
    for (const json& c : doc["constraints"]) {
      constraints->push_back(parse_polynomial(c, n));
      active.push_back(!c.contains("active") || c["active"].get<bool>());
    }
  }

  MechanicalSystem sys;
  sys.name = doc.value("name", std::string("user-system"));
  sys.description = doc.value("description", std::string("user-defined system"));
  sys.n = n;
  sys.m = static_cast<Eigen::Index>(constraints->size());
  sys.k = input.cols();
  sys.mass = [mass](const Eigen::VectorXd&) { return mass; };
  sys.gravity = [gravity](const Eigen::VectorXd&) { return gravity; };
  sys.potential = [gravity](const Eigen::VectorXd& q) { return -gravity.dot(q); };
  sys.input_map = [input](const Eigen::VectorXd&) { return input; };
  sys.jacobian = [constraints, n](const Eigen::VectorXd& q) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(constraints->size()), n);
    for (std::size_t i = 0; i < constraints->size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) = (*constraints)[i].gradient(q).transpose();
    }
    return a;
  };
  sys.jacobian_rate = [constraints, n](const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& qd) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(constraints->size()), n);
    for (std::size_t i = 0; i < constraints->size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) =
          ((*constraints)[i].hessian(q) * qd).transpose();
    }
    return a;
  };
  sys.residual = [constraints](const Eigen::VectorXd& q) {
    Eigen::VectorXd phi(static_cast<Eigen::Index>(constraints->size()));
    for (std::size_t i = 0; i < constraints->size(); ++i) {
      phi(static_cast<Eigen::Index>(i)) = (*constraints)[i].value(q);
    }
    return phi;
  };
  sys.initial_active = active;

  if (doc.contains("initial")) {
    const json& init = doc["initial"];
    sys.default_state.q = get_vector(init, "q", n);
    sys.default_state.qdot = init.contains("qdot") ? get_vector(init, "qdot", n)
                                                   : Eigen::VectorXd::Zero(n);
  } else {
    sys.default_state.q = Eigen::VectorXd::Zero(n);
    sys.default_state.qdot = Eigen::VectorXd::Zero(n);
  }
  if (doc.contains("target")) sys.default_target = get_vector(doc, "target", n);
  return sys;
}

}  // namespace detail
}  // namespace projdyn
