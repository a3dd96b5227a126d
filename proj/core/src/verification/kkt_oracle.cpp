#include "projdyn/verification/kkt_oracle.hpp"

namespace projdyn::verification {

KktSolution solve_kkt(const PlantMatrices& plant,
                      const ConstraintJacobian& jacobian,
                      const Eigen::VectorXd& qdot,
                      const Eigen::VectorXd& force) {
  const Eigen::Index n = plant.mass.rows();
  const Eigen::Index m = jacobian.a.rows();

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = plant.mass;
  kkt.topRightCorner(n, m) = jacobian.a.transpose();
  kkt.bottomLeftCorner(m, n) = jacobian.a;

  Eigen::VectorXd rhs(n + m);
  rhs.head(n) = force + plant.gravity - plant.coriolis * qdot;
  rhs.tail(m) = -jacobian.a_dot * qdot;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
  cod.setThreshold(1e-11);
  const Eigen::VectorXd x = cod.solve(rhs);

  KktSolution out;
  out.qddot = x.head(n);
  out.multipliers = x.tail(m);
  out.constraint_force = -jacobian.a.transpose() * out.multipliers;
  out.residual = (kkt * x - rhs).norm();
  out.consistent = out.residual <= 1e-9 * (1.0 + rhs.norm());
  return out;
}

}  // namespace projdyn::verification
