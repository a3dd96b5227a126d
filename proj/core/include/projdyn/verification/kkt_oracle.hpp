#ifndef PROJDYN_VERIFICATION_KKT_ORACLE_HPP
#define PROJDYN_VERIFICATION_KKT_ORACLE_HPP

#include <Eigen/Dense>

#include "projdyn/constrained_model.hpp"
#include "projdyn/projection.hpp"

namespace projdyn::verification {

/// Minimum-norm least-squares solution of the augmented system
///
///   [ M  A^T ] [ q''    ]   [ f + f_g - C q' ]
///   [ A  0   ] [ lambda ] = [ -A_dot q'      ]
///
/// computed with a complete orthogonal decomposition. Shares no code with
/// the projection route, so it serves as an independent reference.
struct KktSolution {
  Eigen::VectorXd qddot;
  Eigen::VectorXd multipliers;       // not unique when A is rank deficient
  Eigen::VectorXd constraint_force;  // -A^T lambda, unique when consistent
  double residual = 0.0;             // ||K x - rhs||
  bool consistent = true;
};

KktSolution solve_kkt(const PlantMatrices& plant,
                      const ConstraintJacobian& jacobian,
                      const Eigen::VectorXd& qdot,
                      const Eigen::VectorXd& force);

}  // namespace projdyn::verification

#endif  // PROJDYN_VERIFICATION_KKT_ORACLE_HPP
