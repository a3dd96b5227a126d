#ifndef PROJDYN_VERIFICATION_RANDOM_INSTANCES_HPP
#define PROJDYN_VERIFICATION_RANDOM_INSTANCES_HPP

#include <Eigen/Dense>
#include <random>

namespace projdyn::verification {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                              Eigen::Index cols, double scale = 1.0);

/// Symmetric positive definite matrix with eigenvalues in roughly
/// [min_eig, min_eig + n].
Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n,
                           double min_eig = 0.5);

/// rows x cols matrix of the requested rank (product of random factors).
Eigen::MatrixXd random_rank_deficient(std::mt19937_64& rng, Eigen::Index rows,
                                      Eigen::Index cols, Eigen::Index rank);

/// Random integer in [lo, hi].
int random_int(std::mt19937_64& rng, int lo, int hi);

/// Random constrained instance: SPD mass, arbitrary Coriolis matrix, random
/// gravity and force, constraint matrix and its rate. Velocities are drawn by
/// the caller and projected onto null(A).
struct RandomInstance {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd coriolis;
  Eigen::VectorXd gravity;
  Eigen::MatrixXd a;
  Eigen::MatrixXd a_dot;
  Eigen::VectorXd force;
};

/// n in [2, max_n], m in [1, n - 1]; with probability ~1/4 the constraint
/// matrix is rank deficient.
RandomInstance random_instance(std::mt19937_64& rng, Eigen::Index max_n = 8);

}  // namespace projdyn::verification

#endif  // PROJDYN_VERIFICATION_RANDOM_INSTANCES_HPP
