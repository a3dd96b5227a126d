#ifndef PROJDYN_MECHANICAL_SYSTEM_HPP
#define PROJDYN_MECHANICAL_SYSTEM_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "projdyn/constrained_model.hpp"
#include "projdyn/projection.hpp"

namespace projdyn {

struct GeneralizedState {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
};

/// Which of the m potential constraint rows are currently enforced. Inactive
/// rows are zeroed in A, so matrix dimensions never change.
using ActiveSet = std::vector<bool>;

/// Run-time change of the active constraint set.
struct TopologyEvent {
  double time = 0.0;
  std::vector<int> activate;
  std::vector<int> deactivate;
};

/// Evaluator bundle for a constrained mechanical system in dependent
/// coordinates. Optional evaluators may be left empty:
///   coriolis       -> zero matrix
///   potential      -> NaN energies in traces
///   jacobian_rate  -> central finite differences of jacobian along q'
///   input_map      -> identity (k = n)
///   residual       -> no position-level checks or retraction
struct MechanicalSystem {
  using MatrixOfQ = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using MatrixOfQQd = std::function<Eigen::MatrixXd(const Eigen::VectorXd&,
                                                    const Eigen::VectorXd&)>;
  using VectorOfQ = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Sampler =
      std::function<GeneralizedState(std::mt19937_64&, const ActiveSet&)>;

  std::string name;
  std::string description;
  Eigen::Index n = 0;  // coordinates
  Eigen::Index m = 0;  // potential constraint rows
  Eigen::Index k = 0;  // actuators

  MatrixOfQ mass;
  MatrixOfQQd coriolis;
  VectorOfQ gravity;
  std::function<double(const Eigen::VectorXd&)> potential;
  MatrixOfQ jacobian;
  MatrixOfQQd jacobian_rate;
  MatrixOfQ input_map;
  VectorOfQ residual;

  ActiveSet initial_active;
  GeneralizedState default_state;
  std::vector<TopologyEvent> default_events;
  std::optional<Eigen::VectorXd> default_target;
  // Configuration at which rank(A) drops, when the system has one.
  std::optional<Eigen::VectorXd> singular_configuration;
  // Random constraint-consistent state with admissible velocity.
  Sampler sampler;

  PlantMatrices plant(const Eigen::VectorXd& q,
                      const Eigen::VectorXd& qdot) const;

  /// A and A_dot with inactive rows zeroed.
  ConstraintJacobian constraint_jacobian(const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& qdot,
                                         const ActiveSet& active) const;

  /// Active rows of Phi(q); nullopt when the system has no residual.
  std::optional<Eigen::VectorXd> active_residual(
      const Eigen::VectorXd& q, const ActiveSet& active) const;

  ActiveSet all_active() const { return ActiveSet(m, true); }
  bool has_residual() const { return static_cast<bool>(residual); }
};

/// Central-difference A_dot along q': the step is 1e-6 (1 + ||q||) in
/// configuration space.
Eigen::MatrixXd finite_difference_jacobian_rate(
    const MechanicalSystem::MatrixOfQ& jacobian, const Eigen::VectorXd& q,
    const Eigen::VectorXd& qdot);

/// ||A(q) q'|| with the given active set.
double velocity_drift(const MechanicalSystem& system, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& qdot, const ActiveSet& active);

}  // namespace projdyn

#endif  // PROJDYN_MECHANICAL_SYSTEM_HPP
