#include "projdyn/verification/invariant_battery.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "projdyn/catalog.hpp"
#include "projdyn/constrained_model.hpp"
#include "projdyn/force_resolution.hpp"
#include "projdyn/projection.hpp"
#include "projdyn/simulation.hpp"
#include "projdyn/verification/kkt_oracle.hpp"
#include "projdyn/verification/random_instances.hpp"

namespace projdyn::verification {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Tracker {
 public:
  Tracker(std::string name, std::string description, double tolerance)
      : result_{std::move(name), std::move(description), 0.0, tolerance, 0,
                false} {}

  void add(double residual) {
    ++result_.samples;
    if (!std::isfinite(residual)) {
      result_.max_residual = std::numeric_limits<double>::infinity();
      return;
    }
    result_.max_residual = std::max(result_.max_residual, residual);
  }

  CheckResult finish() {
    result_.passed = result_.samples > 0 &&
                     result_.max_residual <= result_.tolerance;
    return result_;
  }

 private:
  CheckResult result_;
};

PlantMatrices plant_of(const RandomInstance& inst) {
  const Eigen::Index n = inst.mass.rows();
  return {inst.mass, inst.coriolis, inst.gravity, MatrixXd::Identity(n, n)};
}

VectorXd admissible_velocity(std::mt19937_64& rng, const ProjectorBundle& proj) {
  return proj.p * random_matrix(rng, proj.dim(), 1, 2.0);
}

double skew_defect(const MatrixXd& x) { return (x + x.transpose()).norm(); }

CheckResult projector_algebra(const BatteryOptions& opt) {
  Tracker t("projector_algebra",
            "P^2 = P, P^T = P, A P = 0, P Lambda = Lambda^T P = 0", 1e-10);
  std::mt19937_64 rng(opt.seed);
  for (int i = 0; i < opt.samples; ++i) {
    const RandomInstance inst = random_instance(rng);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot}, opt.rank_tol);
    const double lambda_scale = 1.0 + pb.lambda.norm();
    t.add(std::max({(pb.p * pb.p - pb.p).norm(),
                    (pb.p - pb.p.transpose()).norm(),
                    (inst.a * pb.p).norm() / (1.0 + inst.a.norm()),
                    (pb.p * pb.lambda).norm() / lambda_scale,
                    (pb.lambda.transpose() * pb.p).norm() / lambda_scale}));
  }
  return t.finish();
}

CheckResult pdot_finite_difference(const BatteryOptions& opt) {
  Tracker t("pdot_fd_order",
            "central-difference P_dot residual ratio under h halving, "
            "distance from 4",
            0.5);
  std::mt19937_64 rng(opt.seed + 1);
  const int samples = std::max(1, opt.samples / 4);
  for (int i = 0; i < samples; ++i) {
    const auto n = static_cast<Eigen::Index>(random_int(rng, 2, 8));
    const auto m = static_cast<Eigen::Index>(random_int(rng, 1, static_cast<int>(n) - 1));
    const MatrixXd a0 = random_matrix(rng, m, n);
    const MatrixXd a1 = random_matrix(rng, m, n);
    const MatrixXd a2 = random_matrix(rng, m, n);
    const auto family = [&](double time) {
      return ConstraintJacobian{a0 + time * a1 + 0.5 * time * time * a2,
                                a1 + time * a2};
    };
    const double r1 = pdot_fd_residual(family, 0.0, 1e-2, opt.rank_tol);
    const double r2 = pdot_fd_residual(family, 0.0, 5e-3, opt.rank_tol);
    t.add(std::abs(r1 / r2 - 4.0));
  }
  return t.finish();
}

CheckResult spectrum_law(const BatteryOptions& opt) {
  Tracker t("spectrum_law",
            "eig(Mbar) equals {mu}^rank(A) union eig_nonzero(PMP), relative",
            1e-9);
  std::mt19937_64 rng(opt.seed + 2);
  std::uniform_real_distribution<double> log_mu(-2.0, 2.0);
  for (int i = 0; i < opt.samples; ++i) {
    const RandomInstance inst = random_instance(rng);
    const PlantMatrices plant = plant_of(inst);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot}, opt.rank_tol);
    const double mu = std::pow(10.0, log_mu(rng));
    const ConstrainedModel model = assemble(plant, pb, mu);
    const MbarSpectrum law = spectrum_of_mbar(plant, pb, mu);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(model.mbar, Eigen::EigenvaluesOnly);
    const VectorXd direct = es.eigenvalues();
    if (direct.size() != law.eigenvalues.size()) {
      t.add(std::numeric_limits<double>::infinity());
      continue;
    }
    t.add((direct - law.eigenvalues).cwiseAbs().maxCoeff() /
          direct.cwiseAbs().maxCoeff());
  }
  return t.finish();
}

CheckResult mbar_positive_definite(const BatteryOptions& opt) {
  Tracker t("mbar_positive_definite",
            "min(mu, lambda_min!=0(PMP)) - min eig(Mbar), including rank-"
            "deficient A (must stay <= 1e-9)",
            1e-9);
  std::mt19937_64 rng(opt.seed + 3);
  std::uniform_real_distribution<double> log_mu(-2.0, 2.0);
  for (int i = 0; i < opt.samples; ++i) {
    const RandomInstance inst = random_instance(rng);
    const PlantMatrices plant = plant_of(inst);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot}, opt.rank_tol);
    const double mu = std::pow(10.0, log_mu(rng));
    const ConstrainedModel model = assemble(plant, pb, mu);
    const VectorXd nz = nonzero_pmp_eigenvalues(plant, pb);
    const double bound = nz.size() > 0 ? std::min(mu, nz.minCoeff()) : mu;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(model.mbar, Eigen::EigenvaluesOnly);
    t.add(std::max(0.0, bound - es.eigenvalues().minCoeff()));
  }
  return t.finish();
}

// For a plant with Mdot - 2C skew, Mbar_dot - 2 Cbar is skew as well. Mdot
// is drawn symmetric and C is built from it with a random skew part.
CheckResult skew_symmetry(const BatteryOptions& opt) {
  Tracker t("skew_symmetry",
            "||X + X^T|| for X = Mbar_dot - 2 Cbar, relative", 1e-10);
  std::mt19937_64 rng(opt.seed + 4);
  std::uniform_real_distribution<double> log_mu(-2.0, 2.0);
  for (int i = 0; i < opt.samples; ++i) {
    const RandomInstance inst = random_instance(rng);
    const Eigen::Index n = inst.mass.rows();
    const MatrixXd g = random_matrix(rng, n, n);
    const MatrixXd m_dot = g + g.transpose();
    const MatrixXd w = random_matrix(rng, n, n);
    const MatrixXd skew = w - w.transpose();
    PlantMatrices plant = plant_of(inst);
    plant.coriolis = 0.5 * (m_dot - skew);

    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot}, opt.rank_tol);
    const double mu = std::pow(10.0, log_mu(rng));
    ConstrainedModel model = assemble(plant, pb, mu);
    if (opt.inject_fault) model.cbar += 2.0 * mu * pb.lambda * pb.p;

    const MatrixXd mbar_dot = pb.p_dot * inst.mass * pb.p +
                              pb.p * m_dot * pb.p +
                              pb.p * inst.mass * pb.p_dot - mu * pb.p_dot;
    const MatrixXd x = mbar_dot - 2.0 * model.cbar;
    t.add(skew_defect(x) / (1.0 + mbar_dot.norm() + model.cbar.norm()));
  }
  return t.finish();
}

CheckResult optimal_mu_interval(const BatteryOptions& opt) {
  Tracker t("optimal_mu_interval",
            "log-grid minimum of cond(Mbar) vs lambda_max/lambda_min!=0 and "
            "argmin set vs [lambda_min!=0, lambda_max], relative",
            1e-9);
  std::mt19937_64 rng(opt.seed + 5);
  const int samples = std::max(1, opt.samples / 2);
  for (int i = 0; i < samples; ++i) {
    const RandomInstance inst = random_instance(rng);
    const PlantMatrices plant = plant_of(inst);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot}, opt.rank_tol);
    const VectorXd nz = nonzero_pmp_eigenvalues(plant, pb);
    if (nz.size() == 0 || pb.rank == 0) continue;
    const double lo = nz.minCoeff(), hi = nz.maxCoeff();
    const double best = hi / lo;
    const int grid = 241;
    double grid_min = std::numeric_limits<double>::infinity();
    double misplaced = 0.0;
    for (int j = 0; j < grid; ++j) {
      const double s = static_cast<double>(j) / (grid - 1);
      const double mu = lo * 1e-3 * std::pow(1e3 * hi / (lo * 1e-3), s);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(assemble(plant, pb, mu).mbar,
                                                 Eigen::EigenvaluesOnly);
      const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
      grid_min = std::min(grid_min, cond);
      const bool inside = mu >= lo * (1 - 1e-12) && mu <= hi * (1 + 1e-12);
      // Outside the interval cond exceeds the minimum by the relative
      // distance to the nearest endpoint; inside it must sit on the minimum.
      if (inside) misplaced = std::max(misplaced, std::abs(cond - best) / best);
    }
    const MuSelection sel = optimal_mu(plant, pb);
    const bool sel_inside = sel.mu >= lo * (1 - 1e-12) && sel.mu <= hi * (1 + 1e-12);
    t.add(std::max({std::abs(grid_min - best) / best, misplaced,
                    sel_inside ? 0.0 : 1.0}));
  }
  return t.finish();
}

CheckResult kkt_agreement(const BatteryOptions& opt) {
  Tracker t("kkt_oracle",
            "acceleration and constraint force vs augmented least-squares "
            "system, relative",
            1e-8);
  std::mt19937_64 rng(opt.seed + 6);
  for (int i = 0; i < opt.samples; ++i) {
    const RandomInstance inst = random_instance(rng);
    const PlantMatrices plant = plant_of(inst);
    const ConstraintJacobian jac{inst.a, inst.a_dot};
    const ProjectorBundle pb = build_projectors(jac, opt.rank_tol);
    const VectorXd qdot = admissible_velocity(rng, pb);
    const ConstrainedModel model = assemble(plant, pb, optimal_mu(plant, pb).mu);
    const VectorXd qdd = acceleration(plant, pb, model, qdot, inst.force);
    const VectorXd fc = constraint_force(plant, pb, model, qdot, inst.force);
    const KktSolution ref = solve_kkt(plant, jac, qdot, inst.force);
    if (!ref.consistent) {
      t.add(std::numeric_limits<double>::infinity());
      continue;
    }
    t.add(std::max((qdd - ref.qddot).norm() / (1.0 + ref.qddot.norm()),
                   (fc - ref.constraint_force).norm() /
                       (1.0 + ref.constraint_force.norm())));
  }
  return t.finish();
}

CheckResult acceleration_routes(const BatteryOptions& opt) {
  Tracker t("acceleration_routes",
            "Omega-form acceleration vs direct solve with Cbar, relative",
            1e-9);
  std::mt19937_64 rng(opt.seed + 7);
  for (int i = 0; i < opt.samples; ++i) {
    const RandomInstance inst = random_instance(rng);
    const PlantMatrices plant = plant_of(inst);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot}, opt.rank_tol);
    const VectorXd qdot = admissible_velocity(rng, pb);
    const ConstrainedModel model = assemble(plant, pb, optimal_mu(plant, pb).mu);
    const VectorXd a1 = acceleration(plant, pb, model, qdot, inst.force);
    const VectorXd a2 = acceleration_nonminimal(plant, pb, model, qdot, inst.force);
    t.add((a1 - a2).norm() / (1.0 + a1.norm()));
  }
  return t.finish();
}

CheckResult oblique_identities(const BatteryOptions& opt) {
  Tracker t("oblique_identities",
            "R^2 = R, PR = P, RP = R, S^2 = S, QS = S, SQ = Q, "
            "Mbar^-1 P = pinv(PMP)",
            1e-10);
  std::mt19937_64 rng(opt.seed + 8);
  for (int i = 0; i < opt.samples; ++i) {
    const RandomInstance inst = random_instance(rng);
    const Eigen::Index n = inst.mass.rows();
    PlantMatrices plant = plant_of(inst);
    plant.input = random_matrix(rng, n, random_int(rng, static_cast<int>(n),
                                                   static_cast<int>(n) + 2));
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot}, opt.rank_tol);
    const ConstrainedModel model = assemble(plant, pb, optimal_mu(plant, pb).mu);
    if (!check_admissibility(plant.input, pb).admissible) continue;
    const ObliqueProjectors ob = build_oblique(plant, pb, model);
    const MatrixXd& r = ob.r;
    const MatrixXd& s = ob.s;
    const double rs = 1.0 + r.norm() * r.norm();
    const double ss = 1.0 + s.norm() * s.norm();
    const MatrixXd pmp = pb.p * plant.mass * pb.p;
    const MatrixXd pinv = pseudo_inverse(pmp, 1e-9).matrix;
    t.add(std::max({(r * r - r).norm() / rs, (pb.p * r - pb.p).norm() / rs,
                    (r * pb.p - r).norm() / rs, (s * s - s).norm() / ss,
                    (pb.q * s - s).norm() / ss, (s * pb.q - pb.q).norm() / ss,
                    (mbar_inverse_p(model, pb) - pinv).norm() /
                        (1.0 + pinv.norm())}));
  }
  return t.finish();
}

CheckResult catalog_self_tests(const BatteryOptions& opt) {
  Tracker t("catalog_self_test",
            "mass symmetry, Mdot - 2C skew, analytic vs finite-difference "
            "A_dot and grad(Phi) on every catalog system",
            1e-6);
  for (const MechanicalSystem& sys : catalog()) {
    const SelfTestReport rep = self_test(sys, std::max(10, opt.samples / 4), opt.seed);
    t.add(std::max({rep.max_mass_asymmetry, rep.max_skew_violation,
                    rep.max_jacobian_rate_error,
                    rep.max_residual_gradient_error,
                    rep.min_mass_eigenvalue > 0.0 ? 0.0 : 1.0}));
  }
  return t.finish();
}

CheckResult catalog_kkt(const BatteryOptions& opt) {
  Tracker t("catalog_kkt",
            "acceleration and constraint force vs augmented system on sampled "
            "catalog states, relative",
            1e-8);
  std::mt19937_64 rng(opt.seed + 9);
  for (const MechanicalSystem& sys : catalog()) {
    const ActiveSet active = sys.all_active();
    for (int i = 0; i < std::max(10, opt.samples / 4); ++i) {
      const GeneralizedState st = sys.sampler(rng, active);
      const PlantMatrices plant = sys.plant(st.q, st.qdot);
      const ConstraintJacobian jac = sys.constraint_jacobian(st.q, st.qdot, active);
      const ProjectorBundle pb = build_projectors(jac, opt.rank_tol);
      const ConstrainedModel model = assemble(plant, pb, optimal_mu(plant, pb).mu);
      const VectorXd f = random_matrix(rng, sys.n, 1, 2.0);
      const KktSolution ref = solve_kkt(plant, jac, st.qdot, f);
      const VectorXd qdd = acceleration(plant, pb, model, st.qdot, f);
      const VectorXd fc = constraint_force(plant, pb, model, st.qdot, f);
      t.add(std::max((qdd - ref.qddot).norm() / (1.0 + ref.qddot.norm()),
                     (fc - ref.constraint_force).norm() /
                         (1.0 + ref.constraint_force.norm())));
    }
  }
  return t.finish();
}

CheckResult mu_invariance(const BatteryOptions&) {
  Tracker t("mu_invariance",
            "pendulum state after 1 s with mu = 0.1 vs mu = 10", 1e-6);
  auto run_with = [](double mu) {
    Scenario sc = default_scenario("pendulum");
    sc.horizon = 1.0;
    sc.mu_policy = MuPolicy::fixed(mu);
    return run(sc);
  };
  const SimulationTrace a = run_with(0.1);
  const SimulationTrace b = run_with(10.0);
  for (std::size_t i = 0; i < a.records.size() && i < b.records.size(); ++i) {
    t.add(std::max((a.records[i].q - b.records[i].q).norm(),
                   (a.records[i].qdot - b.records[i].qdot).norm()));
  }
  return t.finish();
}

CheckResult energy_short_run(const BatteryOptions&) {
  Tracker t("energy_conservation",
            "relative total-energy drift, unforced pendulum, 2 s", 1e-5);
  Scenario sc = default_scenario("pendulum");
  sc.horizon = 2.0;
  const SimulationTrace tr = run(sc);
  const double e0 = tr.records.front().total;
  for (const TraceRecord& r : tr.records) {
    t.add(std::abs(r.total - e0) / std::max(1.0, std::abs(e0)));
  }
  return t.finish();
}

}  // namespace

std::vector<CheckResult> run_battery(const BatteryOptions& options) {
  using Suite = std::function<CheckResult(const BatteryOptions&)>;
  const std::vector<Suite> suites = {
      projector_algebra, pdot_finite_difference, spectrum_law,
      mbar_positive_definite, skew_symmetry, optimal_mu_interval,
      kkt_agreement, acceleration_routes, oblique_identities,
      catalog_self_tests, catalog_kkt, mu_invariance, energy_short_run};
  std::vector<CheckResult> out;
  out.reserve(suites.size());
  for (const Suite& s : suites) out.push_back(s(options));
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed; });
}

std::string battery_report_json(const std::vector<CheckResult>& results,
                                const BatteryOptions& options) {
  nlohmann::ordered_json doc;
  doc["seed"] = options.seed;
  doc["samples"] = options.samples;
  doc["rank_tol"] = options.rank_tol;
  doc["inject_fault"] = options.inject_fault;
  doc["passed"] = all_passed(results);
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const CheckResult& r : results) {
    nlohmann::ordered_json c;
    c["name"] = r.name;
    c["description"] = r.description;
    if (std::isfinite(r.max_residual)) {
      c["max_residual"] = r.max_residual;
    } else {
      c["max_residual"] = nullptr;
    }
    c["tolerance"] = r.tolerance;
    c["samples"] = r.samples;
    c["passed"] = r.passed;
    checks.push_back(std::move(c));
  }
  doc["checks"] = std::move(checks);
  return doc.dump(2);
}

void print_battery_table(const std::vector<CheckResult>& results,
                         std::ostream& out) {
  for (const CheckResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(24)
        << r.name << " max=" << std::scientific << std::setprecision(3)
        << r.max_residual << " tol=" << r.tolerance << " n=" << r.samples
        << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace projdyn::verification
