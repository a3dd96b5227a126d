#ifndef PROJDYN_FORCE_RESOLUTION_HPP
#define PROJDYN_FORCE_RESOLUTION_HPP

#include <Eigen/Dense>
#include <string>

#include "projdyn/constrained_model.hpp"
#include "projdyn/projection.hpp"

namespace projdyn {

// Sign convention used throughout this module:
//
//   h(q, q') = f_g(q) - C(q, q') q'
//
// i.e. h collects every nonlinear force of the unconstrained plant on the
// right-hand side of M q'' = f + h + f_c.

struct AdmissibilityReport {
  bool admissible = false;
  int rank_pb = 0;
  int rank_p = 0;  // n - rank(A)
  std::string diagnostic;
};

/// True iff range(P B) equals the admissible velocity space, i.e.
/// rank(P B) == rank(P).
AdmissibilityReport check_admissibility(const Eigen::MatrixXd& input,
                                        const ProjectorBundle& proj);

/// Oblique projectors used for actuation (R, Gamma) and constraint reaction
/// (S).
struct ObliqueProjectors {
  Eigen::MatrixXd r;      // B Gamma
  Eigen::MatrixXd gamma;  // (P B)^+
  Eigen::MatrixXd s;      // I - M Mbar^-1 P
};

/// Mbar^-1 P. Equal to P Mbar^-1 and to pinv(P M P).
Eigen::MatrixXd mbar_inverse_p(const ConstrainedModel& model,
                               const ProjectorBundle& proj);

/// S = I - M Mbar^-1 P. Needs no admissibility.
Eigen::MatrixXd reaction_projector(const PlantMatrices& plant,
                                   const ProjectorBundle& proj,
                                   const ConstrainedModel& model);

/// Throws RankDeficiency when B is not admissible at this state.
ObliqueProjectors build_oblique(const PlantMatrices& plant,
                                const ProjectorBundle& proj,
                                const ConstrainedModel& model);

/// h = f_g - C q'.
Eigen::VectorXd nonlinear_forces(const PlantMatrices& plant,
                                 const Eigen::VectorXd& qdot);

/// Generalized acceleration, Omega form:
///   q'' = Mbar^-1 P (f + h) + S^T Omega q'.
Eigen::VectorXd acceleration(const PlantMatrices& plant,
                             const ProjectorBundle& proj,
                             const ConstrainedModel& model,
                             const Eigen::VectorXd& qdot,
                             const Eigen::VectorXd& force);

/// Same quantity by solving Mbar q'' = P (f + f_g) - Cbar q' directly. Agrees
/// with acceleration() for admissible q'.
Eigen::VectorXd acceleration_nonminimal(const PlantMatrices& plant,
                                        const ProjectorBundle& proj,
                                        const ConstrainedModel& model,
                                        const Eigen::VectorXd& qdot,
                                        const Eigen::VectorXd& force);

/// f_c = -S (f + h - M Omega q'). Lies in the orthogonal complement of the
/// admissible velocity space.
Eigen::VectorXd constraint_force(const PlantMatrices& plant,
                                 const ProjectorBundle& proj,
                                 const ConstrainedModel& model,
                                 const Eigen::VectorXd& qdot,
                                 const Eigen::VectorXd& force);

struct ActuationResolution {
  Eigen::VectorXd u;      // minimum-norm actuator vector, Gamma f_par
  Eigen::VectorXd force;  // generalized force realized by u, R f_par
};

/// Throws RankDeficiency if B is not admissible and InvalidTarget if
/// f_par_desired has a component outside the admissible space.
ActuationResolution resolve_actuation(const Eigen::VectorXd& f_par_desired,
                                      const Eigen::MatrixXd& input,
                                      const ProjectorBundle& proj,
                                      double tol = 1e-9);

/// Component f_perp (in the constrained directions) to add to f_par so the
/// resulting constraint reaction equals f_c_desired:
///   f_perp = -S (f_par + h) + S M Omega q' - f_c_desired.
/// Throws InvalidTarget if f_c_desired has a component in the admissible
/// space.
Eigen::VectorXd force_split_for_control(const Eigen::VectorXd& f_par,
                                        const Eigen::VectorXd& f_c_desired,
                                        const PlantMatrices& plant,
                                        const ProjectorBundle& proj,
                                        const ConstrainedModel& model,
                                        const Eigen::VectorXd& qdot,
                                        double tol = 1e-9);

/// Orthogonal split of a generalized force together with the reaction and
/// actuator vector it produces.
struct ForceDecomposition {
  Eigen::VectorXd f_par;   // P f
  Eigen::VectorXd f_perp;  // Q f
  Eigen::VectorXd f_c;
  Eigen::VectorXd u;       // empty when B is not admissible
};

ForceDecomposition decompose_force(const PlantMatrices& plant,
                                   const ProjectorBundle& proj,
                                   const ConstrainedModel& model,
                                   const Eigen::VectorXd& qdot,
                                   const Eigen::VectorXd& force);

}  // namespace projdyn

#endif  // PROJDYN_FORCE_RESOLUTION_HPP
