#ifndef PROJDYN_SIMULATION_HPP
#define PROJDYN_SIMULATION_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "projdyn/constrained_model.hpp"
#include "projdyn/mechanical_system.hpp"
#include "projdyn/regulation.hpp"

namespace projdyn {

/// Open-loop generalized force f(t, q, q').
using ForceSchedule = std::function<Eigen::VectorXd(
    double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct RegulationConfig {
  RegulationGains gains;
  Eigen::VectorXd target;
};

struct SimulationOptions {
  double rank_tol = kDefaultRankTol;
  // Accepted steps satisfy ||A q'|| <= drift_tol (1 + ||q'||).
  double drift_tol = 1e-12;
  // Position retraction onto Phi = 0 every N steps; 0 disables it.
  int retraction_interval = 0;
  double retraction_tol = 1e-12;
  // Tolerance for validating that the target satisfies Phi(q*) = 0.
  double target_tol = 1e-8;
};

struct Scenario {
  std::shared_ptr<const MechanicalSystem> system;
  GeneralizedState initial;
  ActiveSet initial_active;  // empty -> system->initial_active
  double horizon = 1.0;
  double dt = 1e-3;
  MuPolicy mu_policy = MuPolicy::geometric_mean();
  std::optional<RegulationConfig> controller;
  ForceSchedule open_loop;  // empty -> zero force
  std::vector<TopologyEvent> events;
  SimulationOptions options;
};

/// Throws InvalidParameter / InvalidInput describing the first violation.
void validate_scenario(const Scenario& scenario);

/// Catalog system with its default state, events and (for "regulate") the
/// system's default target with Kp = Kd = 10 I, sigma = 1.5.
Scenario default_scenario(std::string_view system_name, bool regulate = false);

struct TraceRecord {
  double t = 0.0;
  Eigen::VectorXd q, qdot, qddot;
  Eigen::VectorXd force;             // total applied generalized force f
  Eigen::VectorXd u;                 // actuator vector (empty if open loop)
  Eigen::VectorXd constraint_force;  // f_c
  double kinetic = 0.0;
  double potential = 0.0;  // NaN if the system has no potential
  double total = 0.0;
  double lyapunov = 0.0;  // NaN without controller
  int rank = 0;
  double cond = 1.0;
  double mu = 1.0;
  double drift_velocity = 0.0;  // ||A q'||
  double drift_position = 0.0;  // ||Phi(q)||, NaN without residual
};

struct TraceEvent {
  enum class Kind { kTopology, kRankChange, kMuUpdate };
  Kind kind = Kind::kTopology;
  double time = 0.0;
  int rank_before = 0;
  int rank_after = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double mu = 0.0;
};

const char* to_string(TraceEvent::Kind kind);

struct SimulationTrace {
  std::string system;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  std::vector<TraceRecord> records;
  std::vector<TraceEvent> events;
};

/// Thrown when the integrator produces non-finite values.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, GeneralizedState last_good,
                  std::size_t step_index);

  const GeneralizedState& last_good() const { return last_good_; }
  std::size_t step_index() const { return step_index_; }

 private:
  GeneralizedState last_good_;
  std::size_t step_index_;
};

/// Fixed-step RK4 integration of the non-minimal order model with per-step
/// velocity projection, event handling and trace recording.
class Simulator {
 public:
  explicit Simulator(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const ActiveSet& active() const { return active_; }
  double mu() const { return mu_; }

  /// One RK4 step of length h from state followed by q' <- P(q) q'. Uses the
  /// current active set and, when regulating, samples eta once at the start
  /// of the step.
  GeneralizedState step(const GeneralizedState& state, double h);

  /// Applies a topology event to the state: updates the active set,
  /// projects the velocity through the new P (inelastic capture) and
  /// re-selects mu. Returns the captured state.
  GeneralizedState apply_event(const GeneralizedState& state,
                               const TopologyEvent& event,
                               std::vector<TraceEvent>* log);

  SimulationTrace run();

  /// Diagnostic record at a state, with the force the controller would apply.
  TraceRecord record(const GeneralizedState& state) const;

 private:
  Eigen::VectorXd applied_force(double t, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qdot,
                                const ProjectorBundle& proj,
                                const PlantMatrices& plant,
                                const Eigen::VectorXd* eta,
                                Eigen::VectorXd* u) const;
  Eigen::VectorXd derivative_acceleration(double t, const Eigen::VectorXd& q,
                                          const Eigen::VectorXd& qdot,
                                          const Eigen::VectorXd* eta) const;
  ProjectorBundle projectors_at(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qdot) const;
  void select_mu(const GeneralizedState& state);
  GeneralizedState project_velocity(const GeneralizedState& state) const;

  Scenario scenario_;
  const MechanicalSystem& system_;
  ActiveSet active_;
  double mu_ = 1.0;
  std::optional<Regulator> regulator_;
  std::size_t steps_taken_ = 0;
};

SimulationTrace run(const Scenario& scenario);

/// Gauss-Newton retraction q <- q - A^+ Phi until ||Phi|| <= tol. Throws
/// InconsistentState after max_iterations or when the system has no
/// residual.
Eigen::VectorXd project_to_constraints(const Eigen::VectorXd& q_raw,
                                       const MechanicalSystem& system,
                                       const ActiveSet& active,
                                       double tol = 1e-12,
                                       int max_iterations = 20);

}  // namespace projdyn

#endif  // PROJDYN_SIMULATION_HPP
