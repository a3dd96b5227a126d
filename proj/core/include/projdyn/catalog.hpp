#ifndef PROJDYN_CATALOG_HPP
#define PROJDYN_CATALOG_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "projdyn/mechanical_system.hpp"

namespace projdyn {

inline constexpr double kStandardGravity = 9.81;

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = kStandardGravity;
  double initial_angle = 0.5;  // from the downward vertical
};

/// Point mass on a massless rod, Cartesian q = (x, y), Phi = x^2 + y^2 - L^2.
MechanicalSystem make_pendulum(const PendulumParams& params = {});

/// Same pendulum with its constraint row duplicated (m = 2, rank(A) = 1).
MechanicalSystem make_redundant_pendulum(const PendulumParams& params = {});

struct DoublePendulumParams {
  double mass1 = 1.0, mass2 = 1.0;
  double length1 = 1.0, length2 = 1.0;
  double gravity = kStandardGravity;
  double initial_angle1 = 0.6, initial_angle2 = -0.4;
};

/// q = (x1, y1, x2, y2), two rod constraints.
MechanicalSystem make_double_pendulum(const DoublePendulumParams& params = {});

struct SliderCrankParams {
  double crank_mass = 1.0, slider_mass = 1.0;
  double length = 1.0;  // crank and rod share this length
  double gravity = kStandardGravity;
  double initial_crank_angle = 1.0;
};

/// Isosceles slider-crank with point masses at the crank pin (x1, y1) and the
/// slider (x2, y2). Constraints: crank length, rod length, slider on y = 0.
/// rank(A) drops from 3 to 2 at the crank pin (0, L) with the slider at the
/// origin.
MechanicalSystem make_slider_crank(const SliderCrankParams& params = {});

struct SwitchingParticleParams {
  double mass = 1.0;
  double gravity = kStandardGravity;
  double rail_angle = 0.3;    // inclination of the rail that captures it
  double capture_time = 1.0;
};

/// Free planar particle. A single rail constraint (velocity normal to a line
/// inclined at rail_angle) starts inactive and is switched on at
/// capture_time by the default event schedule.
MechanicalSystem make_switching_particle(
    const SwitchingParticleParams& params = {});

/// Pendulum in polar coordinates q = (r, theta) with the constraint r = L.
/// The inertia depends on q, so C is nonzero.
MechanicalSystem make_polar_pendulum(const PendulumParams& params = {});

std::vector<MechanicalSystem> catalog();
std::vector<std::string> catalog_names();

/// Throws InvalidInput for an unknown name.
MechanicalSystem find_system(std::string_view name);

struct SelfTestReport {
  std::string system;
  int samples = 0;
  double max_mass_asymmetry = 0.0;
  double min_mass_eigenvalue = 0.0;
  double max_skew_violation = 0.0;      // ||X + X^T||, X = Mdot - 2C
  double max_jacobian_rate_error = 0.0;  // analytic A_dot vs central FD
  double max_residual_gradient_error = 0.0;  // A vs FD gradient of Phi

  bool passed(double tol = 1e-6) const;
};

SelfTestReport self_test(const MechanicalSystem& system, int samples = 100,
                         std::uint64_t seed = 1);

}  // namespace projdyn

#endif  // PROJDYN_CATALOG_HPP
