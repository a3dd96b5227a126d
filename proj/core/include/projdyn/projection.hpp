#ifndef PROJDYN_PROJECTION_HPP
#define PROJDYN_PROJECTION_HPP

#include <Eigen/Dense>
#include <functional>

namespace projdyn {

/// Default relative tolerance for numerical rank decisions: singular values
/// at or below rank_tol * sigma_max are treated as zero.
inline constexpr double kDefaultRankTol = 1e-10;

/// Reads PROJDYN_RANK_TOL from the environment, falling back to
/// kDefaultRankTol when unset or unparsable.
double rank_tol_from_env();

struct PseudoInverse {
  Eigen::MatrixXd matrix;  // n x m
  int rank = 0;
};

/// Moore-Penrose pseudo-inverse by rank-truncated singular value inversion.
/// This is the epsilon -> 0 limit of the Tikhonov-regularized inverse
/// A^T (A A^T + eps I)^-1. Throws InvalidInput on non-finite entries or a
/// non-positive tolerance.
PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a,
                             double rank_tol = kDefaultRankTol);

/// Numerical rank with the same truncation rule as pseudo_inverse.
int numerical_rank(const Eigen::MatrixXd& a, double rank_tol = kDefaultRankTol);

/// Constraint matrix A(q) and its total time derivative along the motion.
struct ConstraintJacobian {
  Eigen::MatrixXd a;
  Eigen::MatrixXd a_dot;
};

/// Orthogonal projector onto the null space of A and the operators derived
/// from it. All matrices are n x n regardless of how many constraints are
/// active or independent.
struct ProjectorBundle {
  Eigen::MatrixXd p;        // I - A^+ A
  Eigen::MatrixXd q;        // I - P
  Eigen::MatrixXd lambda;   // -A^+ A_dot
  Eigen::MatrixXd p_dot;    // lambda P + P lambda^T
  Eigen::MatrixXd omega;    // lambda - lambda^T, skew-symmetric
  int rank = 0;             // numerical rank of A
  double rank_tol = kDefaultRankTol;

  Eigen::Index dim() const { return p.rows(); }
};

ProjectorBundle build_projectors(const ConstraintJacobian& jacobian,
                                 double rank_tol = kDefaultRankTol);

/// Unconstrained bundle of dimension n (P = I, everything else zero).
ProjectorBundle identity_projectors(Eigen::Index n,
                                    double rank_tol = kDefaultRankTol);

/// Residual || (P(t+h) - P(t-h)) / 2h - (Lambda P + P Lambda^T)(t) || for a
/// time-parameterized constraint Jacobian. The caller is expected to check
/// that the residual decays as h^2.
double pdot_fd_residual(
    const std::function<ConstraintJacobian(double)>& jacobian_at, double t,
    double h, double rank_tol = kDefaultRankTol);

}  // namespace projdyn

#endif  // PROJDYN_PROJECTION_HPP
