#ifndef PROJDYN_REGULATION_HPP
#define PROJDYN_REGULATION_HPP

#include <Eigen/Dense>
#include <optional>

#include "projdyn/constrained_model.hpp"
#include "projdyn/projection.hpp"

namespace projdyn {

/// Gains of the setpoint regulation law
///   f = -R (f_g + Kp (e + sigma ||e|| eta) + Kd q'),   e = q - q*.
struct RegulationGains {
  Eigen::MatrixXd kp;
  Eigen::MatrixXd kd;
  double sigma = 1.5;
  // Fallback direction used for eta when the velocity is inside the deadband.
  // Empty means "pick from P at the first state the controller sees".
  Eigen::VectorXd xi;
  // eta switches to xi when ||q'|| <= deadband * (1 + velocity_scale).
  double deadband = 1e-9;
  double velocity_scale = 1.0;

  static RegulationGains isotropic(Eigen::Index n, double kp, double kd,
                                   double sigma);
};

/// Throws InvalidParameter unless Kp, Kd are symmetric p.d., sigma > 1 and the
/// dimensions agree with n.
void validate_gains(const RegulationGains& gains, Eigen::Index n);

/// Normalized first column of P whose norm exceeds tol. Empty vector if P has
/// no such column (no admissible direction).
Eigen::VectorXd default_xi(const Eigen::MatrixXd& p, double tol = 1e-8);

struct EtaChoice {
  Eigen::VectorXd eta;
  bool from_fallback = false;
};

/// eta = q'/||q'|| outside the deadband, otherwise xi re-projected through P
/// and normalized. Returns a zero vector if P annihilates xi and no other
/// admissible direction exists.
EtaChoice select_eta(const Eigen::VectorXd& qdot, const ProjectorBundle& proj,
                     const Eigen::VectorXd& xi, double deadband_threshold);

struct ControlOutput {
  Eigen::VectorXd force;  // generalized force f = B u
  Eigen::VectorXd u;      // actuator vector
  Eigen::VectorXd eta;
};

/// Evaluates the law for a given eta. Throws RankDeficiency when B is not
/// admissible at this state.
ControlOutput control_force(const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qdot,
                            const Eigen::VectorXd& q_star,
                            const RegulationGains& gains,
                            const PlantMatrices& plant,
                            const ProjectorBundle& proj,
                            const Eigen::VectorXd& eta);

/// Evaluates the law with eta chosen by select_eta (no switching memory).
ControlOutput control_force(const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qdot,
                            const Eigen::VectorXd& q_star,
                            const RegulationGains& gains,
                            const PlantMatrices& plant,
                            const ProjectorBundle& proj);

/// V = 1/2 q'^T Mbar q' + 1/2 e^T Kp e.
double lyapunov_value(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                      const Eigen::VectorXd& q_star, const Eigen::MatrixXd& kp,
                      const ConstrainedModel& model);

/// Controller with switching memory for eta. eta is sampled once per
/// integration step; when it jumps between the velocity direction and the
/// fallback direction (or reverses), the previous eta is held for one more
/// step.
class Regulator {
 public:
  Regulator(RegulationGains gains, Eigen::VectorXd q_star);

  const RegulationGains& gains() const { return gains_; }
  const Eigen::VectorXd& target() const { return q_star_; }

  /// Chooses eta for the step starting at this state and updates the
  /// switching memory.
  Eigen::VectorXd begin_step(const Eigen::VectorXd& qdot,
                             const ProjectorBundle& proj);

  /// eta that begin_step would return, without touching the memory.
  Eigen::VectorXd peek_eta(const Eigen::VectorXd& qdot,
                           const ProjectorBundle& proj) const;

  void reset();

 private:
  EtaChoice choose(const Eigen::VectorXd& qdot,
                   const ProjectorBundle& proj) const;

  RegulationGains gains_;
  Eigen::VectorXd q_star_;
  Eigen::VectorXd xi_;
  std::optional<EtaChoice> previous_;
  bool holding_ = false;
};

}  // namespace projdyn

#endif  // PROJDYN_REGULATION_HPP
