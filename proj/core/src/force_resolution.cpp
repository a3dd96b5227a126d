#include "projdyn/force_resolution.hpp"

#include <sstream>

#include "projdyn/errors.hpp"

namespace projdyn {
namespace {

// Mbar is symmetric positive definite for every mu > 0, so LLT never fails
// on a valid model; LDLT covers round-off on badly scaled inputs.
Eigen::MatrixXd solve_mbar(const ConstrainedModel& model,
                           const Eigen::MatrixXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(model.mbar);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  return model.mbar.ldlt().solve(rhs);
}

void require_admissible(const Eigen::MatrixXd& input,
                        const ProjectorBundle& proj) {
  const AdmissibilityReport report = check_admissibility(input, proj);
  if (!report.admissible) throw RankDeficiency(report.diagnostic);
}

}  // namespace

AdmissibilityReport check_admissibility(const Eigen::MatrixXd& input,
                                        const ProjectorBundle& proj) {
  if (input.rows() != proj.dim()) {
    throw InvalidInput("input map B must have n rows");
  }
  AdmissibilityReport out;
  out.rank_p = numerical_rank(proj.p, proj.rank_tol);
  out.rank_pb = numerical_rank(proj.p * input, proj.rank_tol);
  out.admissible = out.rank_pb == out.rank_p;

  std::ostringstream msg;
  msg << "admissibility range(PB) = N(A): rank(PB) = " << out.rank_pb
      << ", rank(P) = " << out.rank_p;
  if (!out.admissible) msg << " (violated)";
  out.diagnostic = msg.str();
  return out;
}

Eigen::MatrixXd mbar_inverse_p(const ConstrainedModel& model,
                               const ProjectorBundle& proj) {
  return solve_mbar(model, proj.p);
}

Eigen::MatrixXd reaction_projector(const PlantMatrices& plant,
                                   const ProjectorBundle& proj,
                                   const ConstrainedModel& model) {
  const Eigen::Index n = proj.dim();
  return Eigen::MatrixXd::Identity(n, n) -
         plant.mass * mbar_inverse_p(model, proj);
}

ObliqueProjectors build_oblique(const PlantMatrices& plant,
                                const ProjectorBundle& proj,
                                const ConstrainedModel& model) {
  require_admissible(plant.input, proj);
  ObliqueProjectors out;
  out.gamma = pseudo_inverse(proj.p * plant.input, proj.rank_tol).matrix;
  out.r = plant.input * out.gamma;
  out.s = reaction_projector(plant, proj, model);
  return out;
}

Eigen::VectorXd nonlinear_forces(const PlantMatrices& plant,
                                 const Eigen::VectorXd& qdot) {
  return plant.gravity - plant.coriolis * qdot;
}

Eigen::VectorXd acceleration(const PlantMatrices& plant,
                             const ProjectorBundle& proj,
                             const ConstrainedModel& model,
                             const Eigen::VectorXd& qdot,
                             const Eigen::VectorXd& force) {
  const Eigen::MatrixXd minv_p = mbar_inverse_p(model, proj);
  const Eigen::Index n = proj.dim();
  // S^T = I - P Mbar^-1 M, using the symmetry of Mbar^-1 P.
  const Eigen::MatrixXd s_t =
      Eigen::MatrixXd::Identity(n, n) - minv_p.transpose() * plant.mass;
  return minv_p * (force + nonlinear_forces(plant, qdot)) +
         s_t * (proj.omega * qdot);
}

Eigen::VectorXd acceleration_nonminimal(const PlantMatrices& plant,
                                        const ProjectorBundle& proj,
                                        const ConstrainedModel& model,
                                        const Eigen::VectorXd& qdot,
                                        const Eigen::VectorXd& force) {
  const Eigen::VectorXd rhs =
      proj.p * (force + plant.gravity) - model.cbar * qdot;
  return solve_mbar(model, rhs);
}

Eigen::VectorXd constraint_force(const PlantMatrices& plant,
                                 const ProjectorBundle& proj,
                                 const ConstrainedModel& model,
                                 const Eigen::VectorXd& qdot,
                                 const Eigen::VectorXd& force) {
  const Eigen::MatrixXd s = reaction_projector(plant, proj, model);
  return -s * (force + nonlinear_forces(plant, qdot) -
               plant.mass * (proj.omega * qdot));
}

ActuationResolution resolve_actuation(const Eigen::VectorXd& f_par_desired,
                                      const Eigen::MatrixXd& input,
                                      const ProjectorBundle& proj,
                                      double tol) {
  require_admissible(input, proj);
  if ((proj.q * f_par_desired).norm() > tol * (1.0 + f_par_desired.norm())) {
    throw InvalidTarget(
        "desired null-space force has a component along the constraints");
  }
  const Eigen::MatrixXd gamma =
      pseudo_inverse(proj.p * input, proj.rank_tol).matrix;
  ActuationResolution out;
  out.u = gamma * f_par_desired;
  out.force = input * out.u;
  return out;
}

Eigen::VectorXd force_split_for_control(const Eigen::VectorXd& f_par,
                                        const Eigen::VectorXd& f_c_desired,
                                        const PlantMatrices& plant,
                                        const ProjectorBundle& proj,
                                        const ConstrainedModel& model,
                                        const Eigen::VectorXd& qdot,
                                        double tol) {
  if ((proj.p * f_c_desired).norm() > tol * (1.0 + f_c_desired.norm())) {
    throw InvalidTarget(
        "desired constraint force has a component in the admissible space");
  }
  const Eigen::MatrixXd s = reaction_projector(plant, proj, model);
  return -s * (f_par + nonlinear_forces(plant, qdot)) +
         s * (plant.mass * (proj.omega * qdot)) - f_c_desired;
}

ForceDecomposition decompose_force(const PlantMatrices& plant,
                                   const ProjectorBundle& proj,
                                   const ConstrainedModel& model,
                                   const Eigen::VectorXd& qdot,
                                   const Eigen::VectorXd& force) {
  ForceDecomposition out;
  out.f_par = proj.p * force;
  out.f_perp = proj.q * force;
  out.f_c = constraint_force(plant, proj, model, qdot, force);
  if (check_admissibility(plant.input, proj).admissible) {
    out.u = pseudo_inverse(proj.p * plant.input, proj.rank_tol).matrix *
            out.f_par;
  }
  return out;
}

}  // namespace projdyn
