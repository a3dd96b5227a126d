#include "projdyn/regulation.hpp"

#include <cmath>
#include <string>

#include "projdyn/errors.hpp"
#include "projdyn/force_resolution.hpp"

namespace projdyn {
namespace {

void require_spd(const Eigen::MatrixXd& m, const char* name, Eigen::Index n) {
  if (m.rows() != n || m.cols() != n) {
    throw InvalidParameter(std::string(name) + " must be " +
                           std::to_string(n) + "x" + std::to_string(n));
  }
  if (!m.allFinite() || (m - m.transpose()).norm() > 1e-12 * (1.0 + m.norm())) {
    throw InvalidParameter(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw InvalidParameter(std::string(name) + " must be positive definite");
  }
}

}  // namespace

RegulationGains RegulationGains::isotropic(Eigen::Index n, double kp,
                                           double kd, double sigma) {
  RegulationGains gains;
  gains.kp = kp * Eigen::MatrixXd::Identity(n, n);
  gains.kd = kd * Eigen::MatrixXd::Identity(n, n);
  gains.sigma = sigma;
  return gains;
}

void validate_gains(const RegulationGains& gains, Eigen::Index n) {
  require_spd(gains.kp, "Kp", n);
  require_spd(gains.kd, "Kd", n);
  if (!(gains.sigma > 1.0)) {
    throw InvalidParameter("sigma must be greater than 1");
  }
  if (gains.xi.size() != 0) {
    if (gains.xi.size() != n) throw InvalidParameter("xi must have n entries");
    if (std::abs(gains.xi.norm() - 1.0) > 1e-9) {
      throw InvalidParameter("xi must be a unit vector");
    }
  }
  if (!(gains.deadband >= 0.0) || !(gains.velocity_scale >= 0.0)) {
    throw InvalidParameter("deadband parameters must be non-negative");
  }
}

Eigen::VectorXd default_xi(const Eigen::MatrixXd& p, double tol) {
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double norm = p.col(j).norm();
    if (norm > tol) return p.col(j) / norm;
  }
  return {};
}

EtaChoice select_eta(const Eigen::VectorXd& qdot, const ProjectorBundle& proj,
                     const Eigen::VectorXd& xi, double deadband_threshold) {
  EtaChoice out;
  const double speed = qdot.norm();
  if (speed > deadband_threshold) {
    out.eta = qdot / speed;
    return out;
  }
  out.from_fallback = true;
  // xi has to lie in N(A) at use time; the null space moves with q.
  Eigen::VectorXd projected =
      xi.size() == proj.dim() ? Eigen::VectorXd(proj.p * xi)
                              : Eigen::VectorXd::Zero(proj.dim());
  if (projected.norm() <= 1e-8) projected = default_xi(proj.p);
  if (projected.size() == 0 || projected.norm() <= 1e-8) {
    out.eta = Eigen::VectorXd::Zero(proj.dim());
  } else {
    out.eta = projected.normalized();
  }
  return out;
}

ControlOutput control_force(const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qdot,
                            const Eigen::VectorXd& q_star,
                            const RegulationGains& gains,
                            const PlantMatrices& plant,
                            const ProjectorBundle& proj,
                            const Eigen::VectorXd& eta) {
  const AdmissibilityReport report = check_admissibility(plant.input, proj);
  if (!report.admissible) {
    throw RankDeficiency("regulation needs an admissible actuation map: " +
                         report.diagnostic);
  }
  const Eigen::VectorXd e = q - q_star;
  const Eigen::VectorXd demand = plant.gravity +
                                 gains.kp * (e + gains.sigma * e.norm() * eta) +
                                 gains.kd * qdot;
  const Eigen::MatrixXd gamma =
      pseudo_inverse(proj.p * plant.input, proj.rank_tol).matrix;

  ControlOutput out;
  out.u = -gamma * demand;
  out.force = plant.input * out.u;  // = -R demand
  out.eta = eta;
  return out;
}

ControlOutput control_force(const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qdot,
                            const Eigen::VectorXd& q_star,
                            const RegulationGains& gains,
                            const PlantMatrices& plant,
                            const ProjectorBundle& proj) {
  const double threshold = gains.deadband * (1.0 + gains.velocity_scale);
  const EtaChoice eta = select_eta(qdot, proj, gains.xi, threshold);
  return control_force(q, qdot, q_star, gains, plant, proj, eta.eta);
}

double lyapunov_value(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                      const Eigen::VectorXd& q_star, const Eigen::MatrixXd& kp,
                      const ConstrainedModel& model) {
  const Eigen::VectorXd e = q - q_star;
  return 0.5 * qdot.dot(model.mbar * qdot) + 0.5 * e.dot(kp * e);
}

Regulator::Regulator(RegulationGains gains, Eigen::VectorXd q_star)
    : gains_(std::move(gains)), q_star_(std::move(q_star)) {
  validate_gains(gains_, q_star_.size());
  xi_ = gains_.xi;
}

EtaChoice Regulator::choose(const Eigen::VectorXd& qdot,
                            const ProjectorBundle& proj) const {
  const double threshold = gains_.deadband * (1.0 + gains_.velocity_scale);
  return select_eta(qdot, proj, xi_, threshold);
}

Eigen::VectorXd Regulator::begin_step(const Eigen::VectorXd& qdot,
                                      const ProjectorBundle& proj) {
  if (xi_.size() == 0) xi_ = default_xi(proj.p);
  EtaChoice next = choose(qdot, proj);
  if (previous_ && !holding_) {
    const bool regime_changed = next.from_fallback != previous_->from_fallback;
    const bool reversed = next.eta.dot(previous_->eta) < 0.0;
    if (regime_changed || reversed) {
      holding_ = true;
      return previous_->eta;
    }
  }
  holding_ = false;
  previous_ = next;
  return next.eta;
}

Eigen::VectorXd Regulator::peek_eta(const Eigen::VectorXd& qdot,
                                    const ProjectorBundle& proj) const {
  if (xi_.size() == 0) {
    const double threshold = gains_.deadband * (1.0 + gains_.velocity_scale);
    return select_eta(qdot, proj, default_xi(proj.p), threshold).eta;
  }
  EtaChoice next = choose(qdot, proj);
  if (previous_ && !holding_) {
    const bool regime_changed = next.from_fallback != previous_->from_fallback;
    const bool reversed = next.eta.dot(previous_->eta) < 0.0;
    if (regime_changed || reversed) return previous_->eta;
  }
  return next.eta;
}

void Regulator::reset() {
  previous_.reset();
  holding_ = false;
  xi_ = gains_.xi;
}

}  // namespace projdyn
