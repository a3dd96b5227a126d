#include "cli_app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "projdyn/catalog.hpp"
#include "projdyn/constrained_model.hpp"
#include "projdyn/errors.hpp"
#include "projdyn/projection.hpp"
#include "projdyn/scenario_loader.hpp"
#include "projdyn/simulation.hpp"
#include "projdyn/system_loader.hpp"
#include "projdyn/trace_io.hpp"
#include "projdyn/verification/invariant_battery.hpp"

namespace projdyn::cli {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Raised for argument combinations CLI11 cannot express on its own.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string join(const VectorXd& v) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  return "(" + os.str() + ")";
}

std::shared_ptr<const MechanicalSystem> resolve_system(
    const std::string& name, const std::string& system_file) {
  if (!system_file.empty()) {
    return std::make_shared<const MechanicalSystem>(load_system_file(system_file));
  }
  return std::make_shared<const MechanicalSystem>(find_system(name));
}

double effective_rank_tol(const CLI::Option* flag, double value) {
  return flag->count() > 0 ? value : rank_tol_from_env();
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string system = "pendulum";
  std::string system_file;
  std::string scenario_file;
  double horizon = 10.0;
  double dt = 1e-3;
  std::string mu = "auto";
  std::string controller = "none";
  std::vector<double> target;
  double kp = 10.0, kd = 10.0, sigma = 1.5;
  std::string out;
  std::string format = "csv";
  double rank_tol = kDefaultRankTol;
  int retraction_interval = 0;
  bool quiet = false;

  CLI::Option* horizon_opt = nullptr;
  CLI::Option* dt_opt = nullptr;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* controller_opt = nullptr;
  CLI::Option* rank_tol_opt = nullptr;
  CLI::Option* retraction_opt = nullptr;
};

Scenario build_scenario(const SimulateArgs& a) {
  Scenario sc;
  if (!a.scenario_file.empty()) {
    sc = load_scenario_file(a.scenario_file);
  } else {
    auto system = resolve_system(a.system, a.system_file);
    sc.system = system;
    sc.initial = system->default_state;
    sc.initial_active = system->initial_active;
    sc.events = system->default_events;
    sc.horizon = a.horizon;
    sc.dt = a.dt;
  }
  if (a.horizon_opt->count()) sc.horizon = a.horizon;
  if (a.dt_opt->count()) sc.dt = a.dt;
  if (a.mu_opt->count() || a.scenario_file.empty()) {
    sc.mu_policy = parse_mu_policy(a.mu);
  }
  if (a.retraction_opt->count()) sc.options.retraction_interval = a.retraction_interval;
  if (a.rank_tol_opt->count() || a.scenario_file.empty()) {
    sc.options.rank_tol = effective_rank_tol(a.rank_tol_opt, a.rank_tol);
  }

  const bool explicit_none = a.controller_opt->count() && a.controller == "none";
  const bool regulate = a.controller == "regulate" || (sc.controller && !explicit_none);
  if (explicit_none) {
    if (!a.target.empty()) throw UsageError("--target requires --controller regulate");
    sc.controller.reset();
  } else if (regulate) {
    VectorXd target;
    if (!a.target.empty()) {
      target = to_eigen(a.target);
    } else if (sc.controller) {
      target = sc.controller->target;
    } else if (sc.system->default_target) {
      target = *sc.system->default_target;
    } else {
      throw UsageError("--controller regulate needs --target for system " +
                       sc.system->name);
    }
    if (a.controller == "regulate" || !sc.controller) {
      sc.controller = RegulationConfig{
          RegulationGains::isotropic(sc.system->n, a.kp, a.kd, a.sigma), target};
    } else {
      sc.controller->target = target;
    }
  } else if (!a.target.empty()) {
    throw UsageError("--target requires --controller regulate");
  }
  return sc;
}

void print_summary(const SimulationTrace& trace, const Scenario& sc,
                   std::ostream& out) {
  const auto& recs = trace.records;
  const TraceRecord& first = recs.front();
  const TraceRecord& last = recs.back();
  double max_drift = 0.0, max_energy_dev = 0.0;
  for (const TraceRecord& r : recs) {
    max_drift = std::max(max_drift, r.drift_velocity);
    if (std::isfinite(r.total) && std::isfinite(first.total)) {
      max_energy_dev = std::max(max_energy_dev, std::abs(r.total - first.total));
    }
  }
  const double scale = std::max(1.0, std::abs(first.total));

  out << "system: " << trace.system << '\n';
  out << "records: " << recs.size() << " (horizon " << sc.horizon << ", dt "
      << sc.dt << ")\n";
  out << std::scientific << std::setprecision(6);
  if (std::isfinite(first.total)) {
    out << "energy: initial " << first.total << ", final " << last.total
        << ", max relative drift " << max_energy_dev / scale << '\n';
  } else {
    out << "energy: kinetic initial " << first.kinetic << ", final "
        << last.kinetic << " (no potential)\n";
  }
  out << "max velocity drift ||A qdot||: " << max_drift << '\n';
  out << "final ||qdot||: " << last.qdot.norm() << '\n';
  if (sc.controller) {
    out << "final ||e||: " << (last.q - sc.controller->target).norm()
        << ", final V: " << last.lyapunov << '\n';
  }
  out << std::defaultfloat;
  out << "final q: " << join(last.q) << '\n';
  out << "events: " << trace.events.size() << '\n';
  for (const TraceEvent& ev : trace.events) {
    out << "  t=" << ev.time << ' ' << to_string(ev.kind);
    if (ev.kind == TraceEvent::Kind::kMuUpdate) {
      out << " mu=" << ev.mu;
    } else {
      out << " rank " << ev.rank_before << " -> " << ev.rank_after;
    }
    if (ev.kind == TraceEvent::Kind::kTopology) {
      out << " energy " << ev.energy_before << " -> " << ev.energy_after;
    }
    out << '\n';
  }
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const Scenario sc = build_scenario(a);
  const SimulationTrace trace = run(sc);
  if (!a.out.empty()) {
    std::ofstream file(a.out, std::ios::binary);
    if (!file) throw UsageError("cannot open " + a.out + " for writing");
    if (a.format == "jsonl") {
      write_jsonl(trace, file);
    } else {
      write_csv(trace, file);
    }
    if (!file) throw std::runtime_error("failed writing " + a.out);
  }
  if (!a.quiet) print_summary(trace, sc, out);
  return kExitOk;
}

// ------------------------------------------------------------------- check

struct CheckArgs {
  std::uint64_t seed = 42;
  int samples = 200;
  bool inject_fault = false;
  std::string report;
  double rank_tol = kDefaultRankTol;
  CLI::Option* rank_tol_opt = nullptr;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  verification::BatteryOptions opt;
  opt.seed = a.seed;
  opt.samples = a.samples;
  opt.inject_fault = a.inject_fault;
  opt.rank_tol = effective_rank_tol(a.rank_tol_opt, a.rank_tol);
  const auto results = verification::run_battery(opt);
  verification::print_battery_table(results, out);
  const std::string json = verification::battery_report_json(results, opt);
  if (!a.report.empty()) {
    std::ofstream file(a.report);
    if (!file) throw UsageError("cannot open " + a.report + " for writing");
    file << json << '\n';
  }
  const bool ok = verification::all_passed(results);
  if (!ok) {
    out << "failed:";
    for (const auto& r : results) {
      if (!r.passed) out << ' ' << r.name;
    }
    out << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string system = "pendulum";
  std::string system_file;
  std::vector<double> q;
  double mu_min = 0.0, mu_max = 0.0;
  int points = 25;
  std::string out;
  double rank_tol = kDefaultRankTol;
  CLI::Option* rank_tol_opt = nullptr;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto system = resolve_system(a.system, a.system_file);
  VectorXd q = system->default_state.q;
  if (!a.q.empty()) {
    if (static_cast<Eigen::Index>(a.q.size()) != system->n) {
      throw UsageError("--q needs " + std::to_string(system->n) + " values");
    }
    q = to_eigen(a.q);
  }
  const VectorXd qdot = VectorXd::Zero(system->n);
  const double tol = effective_rank_tol(a.rank_tol_opt, a.rank_tol);
  const PlantMatrices plant = system->plant(q, qdot);
  const ProjectorBundle proj =
      build_projectors(system->constraint_jacobian(q, qdot, system->initial_active), tol);
  const VectorXd nz = nonzero_pmp_eigenvalues(plant, proj);
  const MuSelection sel = optimal_mu(plant, proj);

  out << "system: " << system->name << '\n';
  out << "q: " << join(q) << '\n';
  out << "rank(A): " << proj.rank << " of " << system->m << " rows, n = "
      << system->n << '\n';
  out << std::setprecision(10);
  out << "nonzero eig(PMP): " << join(nz) << '\n';
  if (sel.fully_constrained) {
    out << "no admissible direction: cond(Mbar) = 1 for every mu\n";
  } else {
    out << "optimal mu interval: [" << sel.interval_lo << ", "
        << sel.interval_hi << "]\n";
    out << "optimal cond: " << sel.interval_hi / sel.interval_lo << '\n';
  }
  const MbarSpectrum spec = spectrum_of_mbar(plant, proj, sel.mu);
  out << "selected mu: " << sel.mu << ", cond " << spec.cond << '\n';
  out << "eig(Mbar) at selected mu: " << join(spec.eigenvalues) << '\n';

  const double lo_eig = nz.size() ? nz.minCoeff() : 1.0;
  const double hi_eig = nz.size() ? nz.maxCoeff() : 1.0;
  const double mu_min = a.mu_min > 0.0 ? a.mu_min : 1e-3 * lo_eig;
  const double mu_max = a.mu_max > 0.0 ? a.mu_max : 1e3 * hi_eig;
  if (!(mu_max > mu_min) || a.points < 2) {
    throw UsageError("need mu-max > mu-min and at least 2 points");
  }

  std::ostringstream table;
  table << "mu,cond,in_interval\n";
  out << "cond(Mbar) over mu:\n";
  out << "  " << std::setw(16) << "mu" << std::setw(18) << "cond" << "  in\n";
  for (int i = 0; i < a.points; ++i) {
    const double s = static_cast<double>(i) / (a.points - 1);
    const double mu = mu_min * std::pow(mu_max / mu_min, s);
    const double cond = spectrum_of_mbar(plant, proj, mu).cond;
    const bool inside = !sel.fully_constrained && mu >= sel.interval_lo &&
                        mu <= sel.interval_hi;
    out << "  " << std::setw(16) << mu << std::setw(18) << cond << "  "
        << (inside ? "*" : "") << '\n';
    table << format_double(mu) << ',' << format_double(cond) << ','
          << (inside ? 1 : 0) << '\n';
  }
  if (!a.out.empty()) {
    std::ofstream file(a.out);
    if (!file) throw UsageError("cannot open " + a.out + " for writing");
    file << table.str();
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Constrained multibody dynamics by orthogonal projection"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and write a trace");
  auto* sys_opt = simulate->add_option("--system", sim.system, "Catalog system name")
                      ->capture_default_str();
  auto* sys_file_opt =
      simulate->add_option("--system-file", sim.system_file, "User system definition (JSON)");
  auto* scen_opt = simulate->add_option("--scenario-file", sim.scenario_file,
                                        "Scenario definition (JSON)");
  scen_opt->excludes(sys_opt)->excludes(sys_file_opt);
  sys_opt->excludes(sys_file_opt);
  sim.horizon_opt = simulate->add_option("--horizon", sim.horizon, "Simulated time [s]")
                        ->check(CLI::PositiveNumber)->capture_default_str();
  sim.dt_opt = simulate->add_option("--dt", sim.dt, "Step size [s]")
                   ->check(CLI::PositiveNumber)->capture_default_str();
  sim.mu_opt = simulate->add_option("--mu", sim.mu,
                                    "Virtual mass: number, auto, geometric or midpoint")
                   ->capture_default_str();
  sim.controller_opt =
      simulate->add_option("--controller", sim.controller, "none or regulate")
          ->check(CLI::IsMember({"none", "regulate"}))
          ->capture_default_str();
  simulate->add_option("--target", sim.target, "Setpoint q*, comma separated")
      ->delimiter(',');
  simulate->add_option("--kp", sim.kp, "Isotropic position gain")
      ->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--kd", sim.kd, "Isotropic velocity gain")
      ->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "Switching gain (> 1)")
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "Trace output file");
  simulate->add_option("--format", sim.format, "Trace format")
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
  sim.rank_tol_opt = simulate->add_option("--rank-tol", sim.rank_tol,
                                          "Relative rank tolerance (env PROJDYN_RANK_TOL)")
                         ->check(CLI::PositiveNumber);
  sim.retraction_opt =
      simulate->add_option("--retraction-interval", sim.retraction_interval,
                           "Project positions onto Phi = 0 every N steps (0 = off)")
          ->check(CLI::NonNegativeNumber);
  simulate->add_flag("--quiet", sim.quiet, "Suppress the summary");

  CheckArgs chk;
  auto* check = app.add_subcommand("check", "Run the invariant battery");
  check->add_option("--seed", chk.seed, "Random seed")->capture_default_str();
  check->add_option("--samples", chk.samples, "Random instances per suite")
      ->check(CLI::PositiveNumber)->capture_default_str();
  check->add_flag("--inject-fault", chk.inject_fault,
                  "Corrupt Cbar to confirm the battery detects it");
  check->add_option("--report", chk.report, "Write the JSON report to this file");
  chk.rank_tol_opt = check->add_option("--rank-tol", chk.rank_tol, "Relative rank tolerance")
                         ->check(CLI::PositiveNumber);

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Spectrum and conditioning of Mbar versus mu");
  auto* ana_sys = analyze->add_option("--system", ana.system, "Catalog system name")
                      ->capture_default_str();
  analyze->add_option("--system-file", ana.system_file, "User system definition (JSON)")
      ->excludes(ana_sys);
  analyze->add_option("--q", ana.q, "Configuration, comma separated")->delimiter(',');
  analyze->add_option("--mu-min", ana.mu_min, "Lower end of the mu grid");
  analyze->add_option("--mu-max", ana.mu_max, "Upper end of the mu grid");
  analyze->add_option("--points", ana.points, "Grid points")->capture_default_str();
  analyze->add_option("--out", ana.out, "Write the grid as CSV");
  ana.rank_tol_opt = analyze->add_option("--rank-tol", ana.rank_tol, "Relative rank tolerance")
                         ->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "List catalog systems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*check) return cmd_check(chk, out);
    if (*analyze) return cmd_analyze(ana, out);
    if (*list) {
      for (const MechanicalSystem& s : catalog()) {
        out << std::left << std::setw(20) << s.name << s.description << '\n';
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    err << "invalid parameter: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidTarget& e) {
    err << "invalid target: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << "; last good state t="
        << e.last_good().t << " q=" << join(e.last_good().q) << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace projdyn::cli
