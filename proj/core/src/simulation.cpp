#include "projdyn/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "projdyn/catalog.hpp"
#include "projdyn/errors.hpp"
#include "projdyn/force_resolution.hpp"

namespace projdyn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finite(const GeneralizedState& s) {
  return std::isfinite(s.t) && s.q.allFinite() && s.qdot.allFinite();
}

double event_time_tol(double dt) { return 1e-9 * dt; }

}  // namespace

const char* to_string(TraceEvent::Kind kind) {
  switch (kind) {
    case TraceEvent::Kind::kTopology:
      return "topology";
    case TraceEvent::Kind::kRankChange:
      return "rank-change";
    case TraceEvent::Kind::kMuUpdate:
      return "mu-update";
  }
  return "unknown";
}

DivergenceError::DivergenceError(const std::string& what,
                                 GeneralizedState last_good,
                                 std::size_t step_index)
    : std::runtime_error(what),
      last_good_(std::move(last_good)),
      step_index_(step_index) {}

void validate_scenario(const Scenario& sc) {
  if (!sc.system) throw InvalidInput("scenario has no system");
  const MechanicalSystem& sys = *sc.system;
  if (!(sc.dt > 0.0) || !std::isfinite(sc.dt)) {
    throw InvalidParameter("step size must be positive");
  }
  if (!(sc.horizon >= 0.0) || !std::isfinite(sc.horizon)) {
    throw InvalidParameter("horizon must be non-negative");
  }
  if (sc.initial.q.size() != sys.n || sc.initial.qdot.size() != sys.n) {
    throw InvalidInput("initial state must have " + std::to_string(sys.n) +
                       " coordinates");
  }
  if (!finite(sc.initial)) throw InvalidInput("initial state is not finite");
  const ActiveSet& active =
      sc.initial_active.empty() ? sys.initial_active : sc.initial_active;
  if (static_cast<Eigen::Index>(active.size()) != sys.m) {
    throw InvalidInput("active set must have " + std::to_string(sys.m) +
                       " entries");
  }
  for (std::size_t i = 0; i < sc.events.size(); ++i) {
    const TopologyEvent& ev = sc.events[i];
    if (i > 0 && ev.time < sc.events[i - 1].time) {
      throw InvalidInput("events must be ordered by time");
    }
    for (int row : ev.activate) {
      if (row < 0 || row >= sys.m) throw InvalidInput("event row out of range");
    }
    for (int row : ev.deactivate) {
      if (row < 0 || row >= sys.m) throw InvalidInput("event row out of range");
    }
  }
  if (sc.mu_policy.kind == MuPolicy::Kind::kFixed && !(sc.mu_policy.value > 0.0)) {
    throw InvalidParameter("virtual mass mu must be positive");
  }
  if (auto phi = sys.active_residual(sc.initial.q, active);
      phi && phi->norm() > 1e-6) {
    std::ostringstream msg;
    msg << "initial configuration violates the constraints (||Phi|| = "
        << phi->norm() << "); retract it with project_to_constraints first";
    throw InvalidInput(msg.str());
  }
  const double drift =
      velocity_drift(sys, sc.initial.q, sc.initial.qdot, active);
  if (drift > 1e-6 * (1.0 + sc.initial.qdot.norm())) {
    throw InvalidInput("initial velocity is not admissible (||A q'|| = " +
                       std::to_string(drift) + ")");
  }
  if (sc.controller) {
    const RegulationConfig& ctl = *sc.controller;
    if (ctl.target.size() != sys.n) {
      throw InvalidInput("regulation target must have n coordinates");
    }
    validate_gains(ctl.gains, sys.n);
    if (auto phi = sys.active_residual(ctl.target, active);
        phi && phi->norm() > sc.options.target_tol) {
      throw InvalidParameter(
          "regulation target is not a constraint-consistent configuration");
    }
  }
}

Scenario default_scenario(std::string_view system_name, bool regulate) {
  auto system = std::make_shared<const MechanicalSystem>(find_system(system_name));
  Scenario sc;
  sc.system = system;
  sc.initial = system->default_state;
  sc.initial_active = system->initial_active;
  sc.horizon = 10.0;
  sc.dt = 1e-3;
  sc.events = system->default_events;
  if (regulate) {
    if (!system->default_target) {
      throw InvalidInput("system " + system->name + " has no default target");
    }
    sc.controller = RegulationConfig{
        RegulationGains::isotropic(system->n, 10.0, 10.0, 1.5),
        *system->default_target};
  }
  return sc;
}

Simulator::Simulator(Scenario scenario)
    : scenario_(std::move(scenario)),
      system_((validate_scenario(scenario_), *scenario_.system)) {
  active_ = scenario_.initial_active.empty() ? system_.initial_active
                                             : scenario_.initial_active;
  if (scenario_.controller) {
    regulator_.emplace(scenario_.controller->gains, scenario_.controller->target);
  }
  select_mu(scenario_.initial);
}

ProjectorBundle Simulator::projectors_at(const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& qdot) const {
  return build_projectors(system_.constraint_jacobian(q, qdot, active_),
                          scenario_.options.rank_tol);
}

void Simulator::select_mu(const GeneralizedState& state) {
  const PlantMatrices plant = system_.plant(state.q, state.qdot);
  const ProjectorBundle proj = projectors_at(state.q, state.qdot);
  mu_ = optimal_mu(plant, proj, scenario_.mu_policy).mu;
}

Eigen::VectorXd Simulator::applied_force(double t, const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& qdot,
                                         const ProjectorBundle& proj,
                                         const PlantMatrices& plant,
                                         const Eigen::VectorXd* eta,
                                         Eigen::VectorXd* u) const {
  Eigen::VectorXd f = scenario_.open_loop ? scenario_.open_loop(t, q, qdot)
                                          : Eigen::VectorXd::Zero(system_.n);
  if (regulator_ && eta != nullptr) {
    const ControlOutput ctl =
        control_force(q, qdot, regulator_->target(), regulator_->gains(), plant,
                      proj, *eta);
    f += ctl.force;
    if (u != nullptr) *u = ctl.u;
  }
  return f;
}

Eigen::VectorXd Simulator::derivative_acceleration(
    double t, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
    const Eigen::VectorXd* eta) const {
  const PlantMatrices plant = system_.plant(q, qdot);
  const ProjectorBundle proj = projectors_at(q, qdot);
  const ConstrainedModel model = assemble(plant, proj, mu_);
  const Eigen::VectorXd f = applied_force(t, q, qdot, proj, plant, eta, nullptr);
  return acceleration(plant, proj, model, qdot, f);
}

GeneralizedState Simulator::project_velocity(
    const GeneralizedState& state) const {
  GeneralizedState out = state;
  const double tol = scenario_.options.drift_tol;
  for (int pass = 0; pass < 2; ++pass) {
    const ProjectorBundle proj = projectors_at(out.q, out.qdot);
    out.qdot = proj.p * out.qdot;
    if (velocity_drift(system_, out.q, out.qdot, active_) <=
        tol * (1.0 + out.qdot.norm())) {
      break;
    }
  }
  return out;
}

GeneralizedState Simulator::step(const GeneralizedState& state, double h) {
  if (!(h > 0.0)) throw InvalidParameter("step size must be positive");
  if (!finite(state)) {
    throw DivergenceError("non-finite state handed to step", state, steps_taken_);
  }

  Eigen::VectorXd eta;
  const Eigen::VectorXd* eta_ptr = nullptr;
  if (regulator_) {
    eta = regulator_->begin_step(state.qdot, projectors_at(state.q, state.qdot));
    eta_ptr = &eta;
  }

  const double t = state.t;
  const Eigen::VectorXd& q = state.q;
  const Eigen::VectorXd& v = state.qdot;

  // A non-finite stage would otherwise surface as an input error from the
  // projector of the next stage.
  auto stage = [&](double ts, const Eigen::VectorXd& qs, const Eigen::VectorXd& vs) {
    Eigen::VectorXd a = derivative_acceleration(ts, qs, vs, eta_ptr);
    if (!a.allFinite()) {
      throw DivergenceError("non-finite acceleration at t = " + std::to_string(ts),
                            state, steps_taken_);
    }
    return a;
  };
  const Eigen::VectorXd a1 = stage(t, q, v);
  const Eigen::VectorXd q2 = q + 0.5 * h * v;
  const Eigen::VectorXd v2 = v + 0.5 * h * a1;
  const Eigen::VectorXd a2 = stage(t + 0.5 * h, q2, v2);
  const Eigen::VectorXd q3 = q + 0.5 * h * v2;
  const Eigen::VectorXd v3 = v + 0.5 * h * a2;
  const Eigen::VectorXd a3 = stage(t + 0.5 * h, q3, v3);
  const Eigen::VectorXd q4 = q + h * v3;
  const Eigen::VectorXd v4 = v + h * a3;
  const Eigen::VectorXd a4 = stage(t + h, q4, v4);

  GeneralizedState next;
  next.t = t + h;
  next.q = q + (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
  next.qdot = v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  if (!finite(next)) {
    throw DivergenceError("integration diverged at t = " + std::to_string(next.t),
                          state, steps_taken_);
  }

  ++steps_taken_;
  const int every = scenario_.options.retraction_interval;
  if (every > 0 && system_.has_residual() && steps_taken_ % every == 0) {
    next.q = project_to_constraints(next.q, system_, active_,
                                    scenario_.options.retraction_tol);
  }
  next = project_velocity(next);
  if (!finite(next)) {
    throw DivergenceError("velocity projection diverged at t = " +
                              std::to_string(next.t),
                          state, steps_taken_);
  }
  return next;
}

GeneralizedState Simulator::apply_event(const GeneralizedState& state,
                                        const TopologyEvent& event,
                                        std::vector<TraceEvent>* log) {
  const TraceRecord before = record(state);
  for (int row : event.deactivate) active_[static_cast<std::size_t>(row)] = false;
  for (int row : event.activate) active_[static_cast<std::size_t>(row)] = true;

  GeneralizedState captured = project_velocity(state);
  select_mu(captured);
  if (regulator_) regulator_->reset();
  const TraceRecord after = record(captured);

  if (log != nullptr) {
    TraceEvent topo;
    topo.kind = TraceEvent::Kind::kTopology;
    topo.time = state.t;
    topo.rank_before = before.rank;
    topo.rank_after = after.rank;
    topo.energy_before = before.total;
    topo.energy_after = after.total;
    topo.mu = mu_;
    log->push_back(topo);

    TraceEvent mu_update = topo;
    mu_update.kind = TraceEvent::Kind::kMuUpdate;
    log->push_back(mu_update);
  }
  return captured;
}

TraceRecord Simulator::record(const GeneralizedState& state) const {
  const PlantMatrices plant = system_.plant(state.q, state.qdot);
  const ProjectorBundle proj = projectors_at(state.q, state.qdot);
  const ConstrainedModel model = assemble(plant, proj, mu_);

  TraceRecord rec;
  rec.t = state.t;
  rec.q = state.q;
  rec.qdot = state.qdot;

  Eigen::VectorXd eta;
  const Eigen::VectorXd* eta_ptr = nullptr;
  if (regulator_) {
    eta = regulator_->peek_eta(state.qdot, proj);
    eta_ptr = &eta;
  }
  rec.force = applied_force(state.t, state.q, state.qdot, proj, plant, eta_ptr,
                            &rec.u);
  rec.qddot = acceleration(plant, proj, model, state.qdot, rec.force);
  rec.constraint_force =
      constraint_force(plant, proj, model, state.qdot, rec.force);

  rec.kinetic = kinetic_energy(plant, proj, mu_, state.qdot).value;
  rec.potential = system_.potential ? system_.potential(state.q) : kNaN;
  rec.total = rec.kinetic + rec.potential;
  rec.lyapunov = regulator_ ? lyapunov_value(state.q, state.qdot,
                                             regulator_->target(),
                                             regulator_->gains().kp, model)
                            : kNaN;
  rec.rank = proj.rank;
  rec.cond = model.cond;
  rec.mu = mu_;
  rec.drift_velocity = velocity_drift(system_, state.q, state.qdot, active_);
  const auto phi = system_.active_residual(state.q, active_);
  rec.drift_position = phi ? phi->norm() : kNaN;
  return rec;
}

SimulationTrace Simulator::run() {
  SimulationTrace trace;
  trace.system = system_.name;
  trace.n = system_.n;
  trace.k = system_.input_map ? system_.input_map(scenario_.initial.q).cols()
                              : system_.n;

  const double dt = scenario_.dt;
  const double eps = event_time_tol(dt);
  const auto steps =
      static_cast<std::size_t>(std::llround(scenario_.horizon / dt));
  const double t0 = scenario_.initial.t;
  trace.records.reserve(steps + 1);

  std::size_t next_event = 0;
  const auto& events = scenario_.events;
  auto apply_due = [&](GeneralizedState& s, double until) {
    while (next_event < events.size() && events[next_event].time <= until) {
      s = apply_event(s, events[next_event], &trace.events);
      ++next_event;
    }
  };

  GeneralizedState state = scenario_.initial;
  int last_rank = projectors_at(state.q, state.qdot).rank;
  auto log_rank = [&](const GeneralizedState& s) {
    const int rank = projectors_at(s.q, s.qdot).rank;
    if (rank != last_rank) {
      TraceEvent ev;
      ev.kind = TraceEvent::Kind::kRankChange;
      ev.time = s.t;
      ev.rank_before = last_rank;
      ev.rank_after = rank;
      ev.energy_before = ev.energy_after = kNaN;
      ev.mu = mu_;
      trace.events.push_back(ev);
      last_rank = rank;
    }
  };

  for (std::size_t k = 0; k < steps; ++k) {
    const double t_next = t0 + static_cast<double>(k + 1) * dt;
    apply_due(state, state.t + eps);
    log_rank(state);
    trace.records.push_back(record(state));

    try {
      while (next_event < events.size() &&
             events[next_event].time < t_next - eps) {
        state = step(state, events[next_event].time - state.t);
        state.t = events[next_event].time;
        apply_due(state, state.t + eps);
        log_rank(state);
      }
      state = step(state, t_next - state.t);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (step " +
                                std::to_string(k) + ")",
                            e.last_good(), k);
    }
    state.t = t_next;
    log_rank(state);
  }
  apply_due(state, state.t + eps);
  log_rank(state);
  trace.records.push_back(record(state));
  return trace;
}

SimulationTrace run(const Scenario& scenario) {
  Simulator sim(scenario);
  return sim.run();
}

Eigen::VectorXd project_to_constraints(const Eigen::VectorXd& q_raw,
                                       const MechanicalSystem& system,
                                       const ActiveSet& active, double tol,
                                       int max_iterations) {
  if (!system.has_residual()) {
    throw InconsistentState("system " + system.name +
                            " has no position-level constraint residual");
  }
  Eigen::VectorXd q = q_raw;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(system.n);
  for (int it = 0; it <= max_iterations; ++it) {
    const Eigen::VectorXd phi = *system.active_residual(q, active);
    if (phi.norm() <= tol) return q;
    if (it == max_iterations) break;
    const ConstraintJacobian jac = system.constraint_jacobian(q, zero, active);
    const PseudoInverse pinv = pseudo_inverse(jac.a);
    if (pinv.rank == 0) {
      throw InconsistentState(
          "constraint gradient vanishes; cannot retract configuration");
    }
    q -= pinv.matrix * phi;
    if (!q.allFinite()) break;
  }
  std::ostringstream msg;
  msg << "retraction did not converge within " << max_iterations
      << " iterations";
  throw InconsistentState(msg.str());
}

}  // namespace projdyn
