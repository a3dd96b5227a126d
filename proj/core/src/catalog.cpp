#include "projdyn/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "projdyn/errors.hpp"

namespace projdyn {
namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> values) {
  VectorXd out(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) out(i++) = v;
  return out;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

MatrixXd point_mass_matrix(std::initializer_list<double> masses) {
  VectorXd diag(2 * static_cast<Eigen::Index>(masses.size()));
  Eigen::Index i = 0;
  for (double m : masses) {
    diag(i++) = m;
    diag(i++) = m;
  }
  return diag.asDiagonal();
}

// Row pattern shared by the rod constraints |p_b - p_a|^2 = L^2 between two
// planar points stored at coordinate offsets a and b.
void rod_row(MatrixXd& a, Eigen::Index row, const VectorXd& v, Eigen::Index ia,
             Eigen::Index ib) {
  const double dx = v(ib) - v(ia);
  const double dy = v(ib + 1) - v(ia + 1);
  a(row, ia) = -2.0 * dx;
  a(row, ia + 1) = -2.0 * dy;
  a(row, ib) = 2.0 * dx;
  a(row, ib + 1) = 2.0 * dy;
}

MechanicalSystem pendulum_base(const PendulumParams& p, Eigen::Index rows) {
  MechanicalSystem sys;
  sys.n = 2;
  sys.m = rows;
  sys.k = 2;
  const double m = p.mass, g = p.gravity, len = p.length;

  sys.mass = [m](const VectorXd&) -> MatrixXd {
    return m * MatrixXd::Identity(2, 2);
  };
  sys.gravity = [m, g](const VectorXd&) -> VectorXd { return vec({0.0, -m * g}); };
  sys.potential = [m, g](const VectorXd& q) { return m * g * q(1); };
  sys.jacobian = [rows](const VectorXd& q) -> MatrixXd {
    MatrixXd a(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i) a.row(i) << 2.0 * q(0), 2.0 * q(1);
    return a;
  };
  sys.jacobian_rate = [rows](const VectorXd&, const VectorXd& qd) -> MatrixXd {
    MatrixXd a(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i) a.row(i) << 2.0 * qd(0), 2.0 * qd(1);
    return a;
  };
  sys.residual = [rows, len](const VectorXd& q) -> VectorXd {
    return VectorXd::Constant(rows, q.squaredNorm() - len * len);
  };
  sys.initial_active = ActiveSet(static_cast<std::size_t>(rows), true);

  const double th0 = p.initial_angle;
  sys.default_state.q = vec({len * std::sin(th0), -len * std::cos(th0)});
  sys.default_state.qdot = VectorXd::Zero(2);
  sys.default_target = vec({len * std::sin(1.0), -len * std::cos(1.0)});
  sys.sampler = [len](std::mt19937_64& rng, const ActiveSet&) {
    const double th = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const double om = uniform(rng, -3.0, 3.0);
    GeneralizedState s;
    s.q = vec({len * std::sin(th), -len * std::cos(th)});
    s.qdot = vec({len * om * std::cos(th), len * om * std::sin(th)});
    return s;
  };
  return sys;
}

}  // namespace

MechanicalSystem make_pendulum(const PendulumParams& params) {
  MechanicalSystem sys = pendulum_base(params, 1);
  sys.name = "pendulum";
  sys.description = "Cartesian point-mass pendulum (n=2, m=1)";
  return sys;
}

MechanicalSystem make_redundant_pendulum(const PendulumParams& params) {
  MechanicalSystem sys = pendulum_base(params, 2);
  sys.name = "redundant-pendulum";
  sys.description =
      "Cartesian pendulum with a duplicated constraint row (m=2, rank 1)";
  return sys;
}

MechanicalSystem make_double_pendulum(const DoublePendulumParams& p) {
  MechanicalSystem sys;
  sys.name = "double-pendulum";
  sys.description = "Cartesian double pendulum (n=4, m=2)";
  sys.n = 4;
  sys.m = 2;
  sys.k = 4;
  const double m1 = p.mass1, m2 = p.mass2, g = p.gravity;
  const double l1 = p.length1, l2 = p.length2;

  const MatrixXd mass = point_mass_matrix({m1, m2});
  sys.mass = [mass](const VectorXd&) { return mass; };
  sys.gravity = [m1, m2, g](const VectorXd&) -> VectorXd {
    return vec({0.0, -m1 * g, 0.0, -m2 * g});
  };
  sys.potential = [m1, m2, g](const VectorXd& q) {
    return g * (m1 * q(1) + m2 * q(3));
  };
  sys.jacobian = [](const VectorXd& q) -> MatrixXd {
    MatrixXd a = MatrixXd::Zero(2, 4);
    a(0, 0) = 2.0 * q(0);
    a(0, 1) = 2.0 * q(1);
    rod_row(a, 1, q, 0, 2);
    return a;
  };
  sys.jacobian_rate = [](const VectorXd&, const VectorXd& qd) -> MatrixXd {
    MatrixXd a = MatrixXd::Zero(2, 4);
    a(0, 0) = 2.0 * qd(0);
    a(0, 1) = 2.0 * qd(1);
    rod_row(a, 1, qd, 0, 2);
    return a;
  };
  sys.residual = [l1, l2](const VectorXd& q) -> VectorXd {
    const Vector2d p1 = q.head<2>();
    const Vector2d d = q.tail<2>() - p1;
    return vec({p1.squaredNorm() - l1 * l1, d.squaredNorm() - l2 * l2});
  };
  sys.initial_active = ActiveSet(2, true);

  auto state_of = [l1, l2](double t1, double t2, double w1, double w2) {
    GeneralizedState s;
    const Vector2d p1(l1 * std::sin(t1), -l1 * std::cos(t1));
    const Vector2d p2 = p1 + Vector2d(l2 * std::sin(t2), -l2 * std::cos(t2));
    const Vector2d v1(l1 * w1 * std::cos(t1), l1 * w1 * std::sin(t1));
    const Vector2d v2 =
        v1 + Vector2d(l2 * w2 * std::cos(t2), l2 * w2 * std::sin(t2));
    s.q = vec({p1.x(), p1.y(), p2.x(), p2.y()});
    s.qdot = vec({v1.x(), v1.y(), v2.x(), v2.y()});
    return s;
  };
  sys.default_state = state_of(p.initial_angle1, p.initial_angle2, 0.0, 0.0);
  sys.default_target = state_of(0.5, 0.8, 0.0, 0.0).q;
  sys.sampler = [state_of](std::mt19937_64& rng, const ActiveSet&) {
    const double pi = std::numbers::pi;
    return state_of(uniform(rng, -pi, pi), uniform(rng, -pi, pi),
                    uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
  };
  return sys;
}

MechanicalSystem make_slider_crank(const SliderCrankParams& p) {
  MechanicalSystem sys;
  sys.name = "slider-crank";
  sys.description =
      "isosceles slider-crank in Cartesian coordinates (n=4, m=3); rank(A) "
      "drops to 2 at crank pin (0, L), slider at the origin";
  sys.n = 4;
  sys.m = 3;
  sys.k = 4;
  const double m1 = p.crank_mass, m2 = p.slider_mass, g = p.gravity;
  const double len = p.length;

  const MatrixXd mass = point_mass_matrix({m1, m2});
  sys.mass = [mass](const VectorXd&) { return mass; };
  sys.gravity = [m1, m2, g](const VectorXd&) -> VectorXd {
    return vec({0.0, -m1 * g, 0.0, -m2 * g});
  };
  sys.potential = [m1, m2, g](const VectorXd& q) {
    return g * (m1 * q(1) + m2 * q(3));
  };
  sys.jacobian = [](const VectorXd& q) -> MatrixXd {
    MatrixXd a = MatrixXd::Zero(3, 4);
    a(0, 0) = 2.0 * q(0);
    a(0, 1) = 2.0 * q(1);
    rod_row(a, 1, q, 0, 2);
    a(2, 3) = 1.0;
    return a;
  };
  sys.jacobian_rate = [](const VectorXd&, const VectorXd& qd) -> MatrixXd {
    MatrixXd a = MatrixXd::Zero(3, 4);
    a(0, 0) = 2.0 * qd(0);
    a(0, 1) = 2.0 * qd(1);
    rod_row(a, 1, qd, 0, 2);
    return a;
  };
  sys.residual = [len](const VectorXd& q) -> VectorXd {
    const Vector2d p1 = q.head<2>();
    const Vector2d d = q.tail<2>() - p1;
    return vec({p1.squaredNorm() - len * len, d.squaredNorm() - len * len,
                q(3)});
  };
  sys.initial_active = ActiveSet(3, true);

  auto state_of = [len](double th, double om) {
    GeneralizedState s;
    s.q = vec({len * std::cos(th), len * std::sin(th), 2.0 * len * std::cos(th),
               0.0});
    s.qdot = vec({-len * om * std::sin(th), len * om * std::cos(th),
                  -2.0 * len * om * std::sin(th), 0.0});
    return s;
  };
  sys.default_state = state_of(p.initial_crank_angle, 0.0);
  sys.default_target = state_of(0.4, 0.0).q;
  sys.singular_configuration = vec({0.0, len, 0.0, 0.0});
  sys.sampler = [state_of](std::mt19937_64& rng, const ActiveSet&) {
    double th = 0.0;
    do {
      th = uniform(rng, -std::numbers::pi, std::numbers::pi);
    } while (std::abs(std::cos(th)) < 0.05);
    return state_of(th, uniform(rng, -3.0, 3.0));
  };
  return sys;
}

MechanicalSystem make_switching_particle(const SwitchingParticleParams& p) {
  MechanicalSystem sys;
  sys.name = "switching-particle";
  sys.description =
      "free planar particle captured by an inclined rail at a scheduled time";
  sys.n = 2;
  sys.m = 1;
  sys.k = 2;
  const double m = p.mass, g = p.gravity;
  const Vector2d normal(-std::sin(p.rail_angle), std::cos(p.rail_angle));

  sys.mass = [m](const VectorXd&) -> MatrixXd {
    return m * MatrixXd::Identity(2, 2);
  };
  sys.gravity = [m, g](const VectorXd&) -> VectorXd { return vec({0.0, -m * g}); };
  sys.potential = [m, g](const VectorXd& q) { return m * g * q(1); };
  sys.jacobian = [normal](const VectorXd&) -> MatrixXd {
    MatrixXd a(1, 2);
    a << normal.x(), normal.y();
    return a;
  };
  sys.jacobian_rate = [](const VectorXd&, const VectorXd&) -> MatrixXd {
    return MatrixXd::Zero(1, 2);
  };
  sys.initial_active = ActiveSet{false};
  sys.default_state.q = VectorXd::Zero(2);
  sys.default_state.qdot = vec({1.0, 0.5});
  sys.default_events = {TopologyEvent{p.capture_time, {0}, {}}};
  sys.sampler = [normal](std::mt19937_64& rng, const ActiveSet& active) {
    GeneralizedState s;
    s.q = vec({uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)});
    Vector2d v(uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
    if (!active.empty() && active[0]) v -= normal * normal.dot(v);
    s.qdot = v;
    return s;
  };
  return sys;
}

MechanicalSystem make_polar_pendulum(const PendulumParams& p) {
  MechanicalSystem sys;
  sys.name = "polar-pendulum";
  sys.description =
      "pendulum in polar coordinates (r, theta) with r = L; q-dependent inertia";
  sys.n = 2;
  sys.m = 1;
  sys.k = 2;
  const double m = p.mass, g = p.gravity, len = p.length;

  sys.mass = [m](const VectorXd& q) -> MatrixXd {
    return vec({m, m * q(0) * q(0)}).asDiagonal();
  };
  sys.coriolis = [m](const VectorXd& q, const VectorXd& qd) -> MatrixXd {
    MatrixXd c(2, 2);
    c << 0.0, -m * q(0) * qd(1), m * q(0) * qd(1), m * q(0) * qd(0);
    return c;
  };
  sys.gravity = [m, g](const VectorXd& q) -> VectorXd {
    return vec({m * g * std::cos(q(1)), -m * g * q(0) * std::sin(q(1))});
  };
  sys.potential = [m, g](const VectorXd& q) {
    return -m * g * q(0) * std::cos(q(1));
  };
  sys.jacobian = [](const VectorXd&) -> MatrixXd {
    MatrixXd a(1, 2);
    a << 1.0, 0.0;
    return a;
  };
  sys.jacobian_rate = [](const VectorXd&, const VectorXd&) -> MatrixXd {
    return MatrixXd::Zero(1, 2);
  };
  sys.residual = [len](const VectorXd& q) -> VectorXd {
    return vec({q(0) - len});
  };
  sys.initial_active = ActiveSet{true};
  sys.default_state.q = vec({len, p.initial_angle});
  sys.default_state.qdot = VectorXd::Zero(2);
  sys.default_target = vec({len, 1.0});
  sys.sampler = [len](std::mt19937_64& rng, const ActiveSet&) {
    GeneralizedState s;
    s.q = vec({len, uniform(rng, -std::numbers::pi, std::numbers::pi)});
    s.qdot = vec({0.0, uniform(rng, -3.0, 3.0)});
    return s;
  };
  return sys;
}

std::vector<MechanicalSystem> catalog() {
  return {make_pendulum(),        make_double_pendulum(),
          make_slider_crank(),    make_switching_particle(),
          make_redundant_pendulum(), make_polar_pendulum()};
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const MechanicalSystem& sys : catalog()) names.push_back(sys.name);
  return names;
}

MechanicalSystem find_system(std::string_view name) {
  for (MechanicalSystem& sys : catalog()) {
    if (sys.name == name) return std::move(sys);
  }
  std::string known;
  for (const std::string& n : catalog_names()) {
    known += known.empty() ? n : ", " + n;
  }
  throw InvalidInput("unknown system '" + std::string(name) +
                     "' (known: " + known + ")");
}

bool SelfTestReport::passed(double tol) const {
  return max_mass_asymmetry <= tol && min_mass_eigenvalue > 0.0 &&
         max_skew_violation <= tol && max_jacobian_rate_error <= tol &&
         max_residual_gradient_error <= tol;
}

SelfTestReport self_test(const MechanicalSystem& system, int samples,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ActiveSet active = system.all_active();
  const double h = 1e-6;

  SelfTestReport report;
  report.system = system.name;
  report.samples = samples;
  report.min_mass_eigenvalue = std::numeric_limits<double>::infinity();

  for (int s = 0; s < samples; ++s) {
    GeneralizedState state;
    if (system.sampler) {
      state = system.sampler(rng, active);
    } else {
      state.q = system.default_state.q +
                VectorXd::NullaryExpr(system.n, [&] { return uniform(rng, -0.5, 0.5); });
      state.qdot = VectorXd::NullaryExpr(system.n, [&] { return uniform(rng, -1.0, 1.0); });
    }
    const VectorXd& q = state.q;
    const VectorXd& qd = state.qdot;

    const MatrixXd mass = system.mass(q);
    report.max_mass_asymmetry =
        std::max(report.max_mass_asymmetry, (mass - mass.transpose()).norm());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (mass + mass.transpose()),
                                                Eigen::EigenvaluesOnly);
    report.min_mass_eigenvalue =
        std::min(report.min_mass_eigenvalue, eig.eigenvalues().minCoeff());

    const MatrixXd mass_dot =
        (system.mass(q + h * qd) - system.mass(q - h * qd)) / (2.0 * h);
    const MatrixXd c = system.plant(q, qd).coriolis;
    const MatrixXd x = mass_dot - 2.0 * c;
    report.max_skew_violation =
        std::max(report.max_skew_violation, (x + x.transpose()).norm());

    if (system.jacobian_rate) {
      const MatrixXd fd =
          (system.jacobian(q + h * qd) - system.jacobian(q - h * qd)) / (2.0 * h);
      report.max_jacobian_rate_error = std::max(
          report.max_jacobian_rate_error, (system.jacobian_rate(q, qd) - fd).norm());
    }
    if (system.residual) {
      const MatrixXd a = system.jacobian(q);
      MatrixXd grad(system.m, system.n);
      for (Eigen::Index j = 0; j < system.n; ++j) {
        VectorXd dq = VectorXd::Zero(system.n);
        dq(j) = h;
        grad.col(j) = (system.residual(q + dq) - system.residual(q - dq)) / (2.0 * h);
      }
      report.max_residual_gradient_error =
          std::max(report.max_residual_gradient_error, (a - grad).norm());
    }
  }
  return report;
}

}  // namespace projdyn
