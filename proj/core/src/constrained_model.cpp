#include "projdyn/constrained_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "projdyn/errors.hpp"

namespace projdyn {
namespace {

void check_dimensions(const PlantMatrices& plant, const ProjectorBundle& proj) {
  const Eigen::Index n = proj.dim();
  if (plant.mass.rows() != n || plant.mass.cols() != n ||
      plant.coriolis.rows() != n || plant.coriolis.cols() != n ||
      plant.gravity.size() != n) {
    throw InvalidInput("plant matrices do not match projector dimension " +
                       std::to_string(n));
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd pmp(const PlantMatrices& plant, const ProjectorBundle& proj) {
  return symmetrized(proj.p * plant.mass * proj.p);
}

}  // namespace

ConstrainedModel assemble(const PlantMatrices& plant,
                          const ProjectorBundle& proj, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidParameter("virtual mass mu must be positive and finite");
  }
  check_dimensions(plant, proj);

  const Eigen::MatrixXd& p = proj.p;
  const Eigen::MatrixXd& lambda = proj.lambda;

  ConstrainedModel out;
  out.mu = mu;
  out.mbar = pmp(plant, proj) + mu * proj.q;
  out.cbar = p * plant.coriolis * p +
             p * plant.mass * (lambda * p + p * lambda.transpose()) -
             mu * lambda * p;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.mbar,
                                                     Eigen::EigenvaluesOnly);
  out.spectrum = eig.eigenvalues();
  const double lo = out.spectrum.size() > 0 ? out.spectrum.minCoeff() : 1.0;
  const double hi = out.spectrum.size() > 0 ? out.spectrum.maxCoeff() : 1.0;
  out.cond = hi / lo;
  return out;
}

Eigen::VectorXd nonzero_pmp_eigenvalues(const PlantMatrices& plant,
                                        const ProjectorBundle& proj) {
  check_dimensions(plant, proj);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pmp(plant, proj),
                                                     Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& values = eig.eigenvalues();
  if (values.size() == 0) return values;
  const double cutoff = proj.rank_tol * std::max(values.maxCoeff(), 0.0);
  std::vector<double> kept;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) > cutoff) kept.push_back(values(i));
  }
  return Eigen::Map<Eigen::VectorXd>(kept.data(),
                                     static_cast<Eigen::Index>(kept.size()));
}

double mbar_condition(double mu, double lambda_min_nonzero,
                      double lambda_max) {
  return std::max(mu, lambda_max) / std::min(mu, lambda_min_nonzero);
}

MbarSpectrum spectrum_of_mbar(const PlantMatrices& plant,
                              const ProjectorBundle& proj, double mu) {
  if (!(mu > 0.0)) {
    throw InvalidParameter("virtual mass mu must be positive and finite");
  }
  check_dimensions(plant, proj);
  const Eigen::Index n = proj.dim();
  const Eigen::Index free_dims = n - proj.rank;

  // The n - r largest eigenvalues of PMP are its nonzero ones; the r
  // directions spanning the constrained space carry mu.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pmp(plant, proj),
                                                     Eigen::EigenvaluesOnly);
  MbarSpectrum out;
  out.eigenvalues.resize(n);
  out.eigenvalues.head(proj.rank).setConstant(mu);
  out.eigenvalues.tail(free_dims) = eig.eigenvalues().tail(free_dims);
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());

  if (free_dims == 0) {
    out.cond = 1.0;
  } else {
    const Eigen::VectorXd nonzero = eig.eigenvalues().tail(free_dims);
    out.cond = mbar_condition(mu, nonzero.minCoeff(), nonzero.maxCoeff());
  }
  return out;
}

MuSelection optimal_mu(const PlantMatrices& plant, const ProjectorBundle& proj,
                       const MuPolicy& policy) {
  const Eigen::VectorXd nonzero = nonzero_pmp_eigenvalues(plant, proj);
  MuSelection out;

  if (nonzero.size() == 0) {
    // Fully constrained: Mbar = mu I, every mu is equally conditioned.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        symmetrized(plant.mass), Eigen::EigenvaluesOnly);
    out.fully_constrained = true;
    out.interval_lo = std::numeric_limits<double>::quiet_NaN();
    out.interval_hi = std::numeric_limits<double>::quiet_NaN();
    out.mu = policy.kind == MuPolicy::Kind::kFixed ? policy.value
                                                   : eig.eigenvalues().mean();
    out.cond = 1.0;
    return out;
  }

  out.interval_lo = nonzero.minCoeff();
  out.interval_hi = nonzero.maxCoeff();
  switch (policy.kind) {
    case MuPolicy::Kind::kFixed:
      out.mu = policy.value;
      break;
    case MuPolicy::Kind::kGeometricMean:
      out.mu = std::sqrt(out.interval_lo * out.interval_hi);
      break;
    case MuPolicy::Kind::kMidpoint:
      out.mu = 0.5 * (out.interval_lo + out.interval_hi);
      break;
  }
  if (!(out.mu > 0.0)) {
    throw InvalidParameter("virtual mass mu must be positive and finite");
  }
  // Exactly one of the first r eigenvalues would be mu; with no constraint
  // active (rank 0) mu does not enter the spectrum at all.
  out.cond = proj.rank == 0
                 ? out.interval_hi / out.interval_lo
                 : mbar_condition(out.mu, out.interval_lo, out.interval_hi);
  return out;
}

KineticEnergy kinetic_energy(const PlantMatrices& plant,
                             const ProjectorBundle& proj, double mu,
                             const Eigen::VectorXd& qdot,
                             double admissibility_tol) {
  if (!(mu > 0.0)) {
    throw InvalidParameter("virtual mass mu must be positive and finite");
  }
  check_dimensions(plant, proj);
  const Eigen::MatrixXd mbar = pmp(plant, proj) + mu * proj.q;
  KineticEnergy out;
  out.value = 0.5 * qdot.dot(mbar * qdot);
  out.plant_value = 0.5 * qdot.dot(plant.mass * qdot);
  out.admissible =
      (proj.q * qdot).norm() <= admissibility_tol * (1.0 + qdot.norm());
  return out;
}

}  // namespace projdyn
