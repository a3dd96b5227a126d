#include "projdyn/mechanical_system.hpp"

#include "projdyn/errors.hpp"

namespace projdyn {

PlantMatrices MechanicalSystem::plant(const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& qdot) const {
  PlantMatrices out;
  out.mass = mass(q);
  out.coriolis = coriolis ? coriolis(q, qdot) : Eigen::MatrixXd::Zero(n, n);
  out.gravity = gravity ? gravity(q) : Eigen::VectorXd::Zero(n);
  out.input = input_map ? input_map(q) : Eigen::MatrixXd::Identity(n, n);
  return out;
}

ConstraintJacobian MechanicalSystem::constraint_jacobian(
    const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
    const ActiveSet& active) const {
  if (static_cast<Eigen::Index>(active.size()) != m) {
    throw InvalidInput("active set of " + name + " must have " +
                       std::to_string(m) + " entries");
  }
  ConstraintJacobian out;
  out.a = jacobian(q);
  out.a_dot = jacobian_rate ? jacobian_rate(q, qdot)
                            : finite_difference_jacobian_rate(jacobian, q, qdot);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!active[static_cast<std::size_t>(i)]) {
      out.a.row(i).setZero();
      out.a_dot.row(i).setZero();
    }
  }
  return out;
}

std::optional<Eigen::VectorXd> MechanicalSystem::active_residual(
    const Eigen::VectorXd& q, const ActiveSet& active) const {
  if (!residual) return std::nullopt;
  Eigen::VectorXd phi = residual(q);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!active[static_cast<std::size_t>(i)]) phi(i) = 0.0;
  }
  return phi;
}

Eigen::MatrixXd finite_difference_jacobian_rate(
    const MechanicalSystem::MatrixOfQ& jacobian, const Eigen::VectorXd& q,
    const Eigen::VectorXd& qdot) {
  const double speed = qdot.norm();
  const Eigen::MatrixXd a = jacobian(q);
  if (speed == 0.0) return Eigen::MatrixXd::Zero(a.rows(), a.cols());
  const double step = 1e-6 * (1.0 + q.norm());
  const Eigen::VectorXd dir = qdot / speed;
  return (jacobian(q + step * dir) - jacobian(q - step * dir)) *
         (speed / (2.0 * step));
}

double velocity_drift(const MechanicalSystem& system, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& qdot, const ActiveSet& active) {
  return (system.constraint_jacobian(q, qdot, active).a * qdot).norm();
}

}  // namespace projdyn
