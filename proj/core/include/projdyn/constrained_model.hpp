#ifndef PROJDYN_CONSTRAINED_MODEL_HPP
#define PROJDYN_CONSTRAINED_MODEL_HPP

#include <Eigen/Dense>
#include <vector>

#include "projdyn/projection.hpp"

namespace projdyn {

/// Plant quantities of M(q) q'' + C(q, q') q' = f_g + f_c + f, f = B u,
/// all evaluated at one state.
struct PlantMatrices {
  Eigen::MatrixXd mass;      // M, n x n symmetric p.d.
  Eigen::MatrixXd coriolis;  // C, n x n
  Eigen::VectorXd gravity;   // f_g
  Eigen::MatrixXd input;     // B, n x k

  Eigen::Index dim() const { return mass.rows(); }
};

/// Non-minimal order model  Mbar q'' + Cbar q' = P (f + f_g).
struct ConstrainedModel {
  Eigen::MatrixXd mbar;  // P M P + mu Q
  Eigen::MatrixXd cbar;  // P C P + P M (Lambda P + P Lambda^T) - mu Lambda P
  double mu = 1.0;
  Eigen::VectorXd spectrum;  // eigenvalues of mbar, ascending
  double cond = 1.0;
};

/// Throws InvalidParameter when mu <= 0 and InvalidInput on dimension
/// mismatch between plant and projectors.
ConstrainedModel assemble(const PlantMatrices& plant,
                          const ProjectorBundle& proj, double mu);

struct MbarSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  double cond = 1.0;
};

/// Spectrum of Mbar from the union law: mu with multiplicity rank(A), plus
/// the nonzero eigenvalues of P M P. Does not factor Mbar itself.
MbarSpectrum spectrum_of_mbar(const PlantMatrices& plant,
                              const ProjectorBundle& proj, double mu);

/// Nonzero eigenvalues of P M P, ascending. "Nonzero" means above
/// rank_tol * lambda_max(P M P).
Eigen::VectorXd nonzero_pmp_eigenvalues(const PlantMatrices& plant,
                                        const ProjectorBundle& proj);

/// Condition number of Mbar for a given mu, from the closed form
/// max(mu, l_max) / min(mu, l_min).
double mbar_condition(double mu, double lambda_min_nonzero,
                      double lambda_max);

struct MuPolicy {
  enum class Kind { kFixed, kGeometricMean, kMidpoint };
  Kind kind = Kind::kGeometricMean;
  double value = 1.0;  // used by kFixed only

  static MuPolicy fixed(double mu) { return {Kind::kFixed, mu}; }
  static MuPolicy geometric_mean() { return {Kind::kGeometricMean, 1.0}; }
  static MuPolicy midpoint() { return {Kind::kMidpoint, 1.0}; }
};

struct MuSelection {
  double mu = 1.0;
  // Interval of condition-optimal virtual masses [lambda_min!=0(PMP),
  // lambda_max(PMP)]. Both NaN when there is no admissible direction.
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  double cond = 1.0;  // cond(Mbar) at the chosen mu
  // Set when P = 0: Mbar = mu I for every mu, so mu falls back to the mean
  // eigenvalue of M.
  bool fully_constrained = false;
};

MuSelection optimal_mu(const PlantMatrices& plant, const ProjectorBundle& proj,
                       const MuPolicy& policy = MuPolicy::geometric_mean());

struct KineticEnergy {
  double value = 0.0;        // 1/2 q'^T Mbar q'
  double plant_value = 0.0;  // 1/2 q'^T M q'
  bool admissible = true;    // ||Q q'|| within tolerance
};

KineticEnergy kinetic_energy(const PlantMatrices& plant,
                             const ProjectorBundle& proj, double mu,
                             const Eigen::VectorXd& qdot,
                             double admissibility_tol = 1e-9);

}  // namespace projdyn

#endif  // PROJDYN_CONSTRAINED_MODEL_HPP
