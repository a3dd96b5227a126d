#include "projdyn/force_resolution.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "projdyn/errors.hpp"
#include "projdyn/verification/kkt_oracle.hpp"
#include "projdyn/verification/random_instances.hpp"

namespace projdyn {
namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

// Unit pendulum (m = g = L = 1) at the bottom q = (0, -1), moving with
// angular rate omega.
struct PendulumBottom {
  PlantMatrices plant;
  ConstraintJacobian jac;
  ProjectorBundle proj;
  ConstrainedModel model;
  VectorXd qdot;
};

PendulumBottom pendulum_bottom(double omega, double mu = 1.0) {
  PendulumBottom s;
  s.plant = {MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2), Vector2d(0.0, -1.0),
             MatrixXd::Identity(2, 2)};
  s.jac.a = MatrixXd(1, 2);
  s.jac.a << 0, -2;
  s.jac.a_dot = MatrixXd(1, 2);
  s.jac.a_dot << 2 * omega, 0;
  s.proj = build_projectors(s.jac);
  s.model = assemble(s.plant, s.proj, mu);
  s.qdot = Vector2d(omega, 0.0);
  return s;
}

PlantMatrices random_plant(std::mt19937_64& rng, const verification::RandomInstance& inst) {
  const Eigen::Index n = inst.mass.rows();
  return {inst.mass, inst.coriolis, inst.gravity,
          verification::random_matrix(rng, n, n + verification::random_int(rng, 0, 2))};
}

TEST(Admissibility, FullActuation) {
  const auto s = pendulum_bottom(0.0);
  const AdmissibilityReport rep = check_admissibility(MatrixXd::Identity(2, 2), s.proj);
  EXPECT_TRUE(rep.admissible);
  EXPECT_EQ(rep.rank_pb, 1);
  EXPECT_EQ(rep.rank_p, 1);
}

TEST(Admissibility, ActuationAlongConstraintNormal) {
  const auto s = pendulum_bottom(0.0);
  const AdmissibilityReport rep = check_admissibility(Vector2d(0.0, 1.0), s.proj);
  EXPECT_FALSE(rep.admissible);
  EXPECT_EQ(rep.rank_pb, 0);
  EXPECT_EQ(rep.rank_p, 1);
  EXPECT_FALSE(rep.diagnostic.empty());
}

TEST(Admissibility, NullSpaceBasisGivesOrthogonalR) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const auto inst = verification::random_instance(rng);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot});
    const MatrixXd basis = testing::null_basis(inst.a);
    // Columns span null(A) exactly, in a random non-orthogonal basis.
    const Eigen::Index d = basis.cols();
    const MatrixXd b = basis * (verification::random_matrix(rng, d, d) +
                                3.0 * MatrixXd::Identity(d, d));
    PlantMatrices plant{inst.mass, inst.coriolis, inst.gravity, b};
    ASSERT_TRUE(check_admissibility(b, pb).admissible);
    const ObliqueProjectors ob = build_oblique(plant, pb, assemble(plant, pb, 1.0));
    const MatrixXd b_pinv = pseudo_inverse(b).matrix;
    EXPECT_LT((ob.gamma - b_pinv).norm(), 1e-9 * (1.0 + b_pinv.norm()));
    EXPECT_LT((ob.r - ob.r.transpose()).norm(), 1e-10);
    EXPECT_LT((ob.r - b * b_pinv).norm(), 1e-10);
  }
}

TEST(Oblique, IdentityInputGivesOrthogonalR) {
  const auto s = pendulum_bottom(0.5);
  const ObliqueProjectors ob = build_oblique(s.plant, s.proj, s.model);
  EXPECT_LT((ob.r - s.proj.p).norm(), 1e-15);
  EXPECT_LT((ob.r - ob.r.transpose()).norm(), 1e-15);
  EXPECT_LT((ob.r * ob.r - ob.r).norm(), 1e-15);
}

TEST(Oblique, PendulumReactionProjector) {
  const auto s = pendulum_bottom(0.0);
  const MatrixXd sp = reaction_projector(s.plant, s.proj, s.model);
  EXPECT_LT((sp - MatrixXd(Vector2d(0, 1).asDiagonal())).norm(), 1e-15);
}

TEST(Oblique, UnconstrainedLimit) {
  std::mt19937_64 rng(3);
  const MatrixXd b = verification::random_matrix(rng, 3, 4);
  PlantMatrices plant{verification::random_spd(rng, 3), MatrixXd::Zero(3, 3),
                      VectorXd::Zero(3), b};
  const ProjectorBundle pb = identity_projectors(3);
  const ObliqueProjectors ob = build_oblique(plant, pb, assemble(plant, pb, 1.0));
  EXPECT_LT(ob.s.norm(), 1e-12);
  EXPECT_LT((ob.r - b * pseudo_inverse(b).matrix).norm(), 1e-12);
}

TEST(Oblique, InadmissibleInputThrows) {
  auto s = pendulum_bottom(0.0);
  s.plant.input = Vector2d(0.0, 1.0);
  EXPECT_THROW(build_oblique(s.plant, s.proj, s.model), RankDeficiency);
}

TEST(Oblique, IdentitiesOnRandomInstances) {
  std::mt19937_64 rng(22);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const auto inst = verification::random_instance(rng);
    const PlantMatrices plant = random_plant(rng, inst);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot});
    const ConstrainedModel model = assemble(plant, pb, optimal_mu(plant, pb).mu);
    if (!check_admissibility(plant.input, pb).admissible) continue;
    ++checked;
    const ObliqueProjectors ob = build_oblique(plant, pb, model);
    const double rs = 1.0 + ob.r.squaredNorm();
    const double ss = 1.0 + ob.s.squaredNorm();
    EXPECT_LT((ob.r * ob.r - ob.r).norm(), 1e-10 * rs);
    EXPECT_LT((pb.p * ob.r - pb.p).norm(), 1e-10 * rs);
    EXPECT_LT((ob.r * pb.p - ob.r).norm(), 1e-10 * rs);
    EXPECT_LT((ob.s * ob.s - ob.s).norm(), 1e-10 * ss);
    EXPECT_LT((pb.q * ob.s - ob.s).norm(), 1e-10 * ss);
    EXPECT_LT((ob.s * pb.q - pb.q).norm(), 1e-10 * ss);
  }
  EXPECT_GT(checked, 400);
}

TEST(MbarInverseP, CommutesAndEqualsPseudoInverse) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 300; ++i) {
    const auto inst = verification::random_instance(rng);
    const PlantMatrices plant = random_plant(rng, inst);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot});
    const ConstrainedModel model = assemble(plant, pb, 0.3 + i % 7);
    const MatrixXd x = mbar_inverse_p(model, pb);
    const MatrixXd mbar_inv = model.mbar.inverse();
    const MatrixXd pinv = pseudo_inverse(pb.p * plant.mass * pb.p, 1e-9).matrix;
    const double scale = 1.0 + pinv.norm();
    EXPECT_LT((x - mbar_inv * pb.p).norm(), 1e-10 * scale);
    EXPECT_LT((x - pb.p * mbar_inv).norm(), 1e-10 * scale);
    EXPECT_LT((x - pinv).norm(), 1e-10 * scale);
  }
}

TEST(Acceleration, PendulumCentripetal) {
  for (double omega : {0.0, 0.5, 2.0}) {
    const auto s = pendulum_bottom(omega);
    const VectorXd qdd = acceleration(s.plant, s.proj, s.model, s.qdot, VectorXd::Zero(2));
    EXPECT_NEAR(qdd(0), 0.0, 1e-14);
    EXPECT_NEAR(qdd(1), omega * omega, 1e-14);
  }
}

TEST(Acceleration, UnconstrainedNewton) {
  std::mt19937_64 rng(5);
  const MatrixXd m = verification::random_spd(rng, 4);
  PlantMatrices plant{m, MatrixXd::Zero(4, 4), VectorXd::Zero(4), MatrixXd::Identity(4, 4)};
  const ProjectorBundle pb = identity_projectors(4);
  const VectorXd f = verification::random_matrix(rng, 4, 1);
  const VectorXd qdd = acceleration(plant, pb, assemble(plant, pb, 1.0),
                                    verification::random_matrix(rng, 4, 1), f);
  EXPECT_LT((qdd - m.ldlt().solve(f)).norm(), 1e-12);
}

TEST(Acceleration, MuIndependent) {
  const auto a = pendulum_bottom(1.5, 0.1);
  const auto b = pendulum_bottom(1.5, 10.0);
  const VectorXd f = Vector2d(0.3, -0.7);
  EXPECT_LT((acceleration(a.plant, a.proj, a.model, a.qdot, f) -
             acceleration(b.plant, b.proj, b.model, b.qdot, f)).norm(),
            1e-13);
}

TEST(Acceleration, DynamicsAndConstraintSecondDerivative) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 300; ++i) {
    const auto inst = verification::random_instance(rng);
    const PlantMatrices plant = random_plant(rng, inst);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot});
    const ConstrainedModel model = assemble(plant, pb, optimal_mu(plant, pb).mu);
    const VectorXd qdot = pb.p * verification::random_matrix(rng, pb.dim(), 1);
    const VectorXd qdd = acceleration(plant, pb, model, qdot, inst.force);
    const VectorXd fc = constraint_force(plant, pb, model, qdot, inst.force);
    const double scale = 1.0 + qdd.norm() + fc.norm() + inst.force.norm();
    // Q q'' = P_dot q' from differentiating P q' = q'.
    EXPECT_LT((pb.q * qdd - pb.p_dot * qdot).norm(), 1e-9 * scale);
    // Full plant balance with the reaction.
    EXPECT_LT((plant.mass * qdd + plant.coriolis * qdot - plant.gravity - fc - inst.force).norm(),
              1e-9 * scale);
    EXPECT_LT((pb.p * fc).norm(), 1e-10 * scale);
    EXPECT_LT(std::abs(qdot.dot(fc)), 1e-10 * scale * (1.0 + qdot.norm()));
    // The two acceleration routes agree.
    EXPECT_LT((qdd - acceleration_nonminimal(plant, pb, model, qdot, inst.force)).norm(),
              1e-9 * (1.0 + qdd.norm()));
  }
}

TEST(Acceleration, MatchesAugmentedSystem) {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 300; ++i) {
    const auto inst = verification::random_instance(rng);
    const PlantMatrices plant = random_plant(rng, inst);
    const ConstraintJacobian jac{inst.a, inst.a_dot};
    const ProjectorBundle pb = build_projectors(jac);
    const ConstrainedModel model = assemble(plant, pb, optimal_mu(plant, pb).mu);
    const VectorXd qdot = pb.p * verification::random_matrix(rng, pb.dim(), 1);
    const auto ref = verification::solve_kkt(plant, jac, qdot, inst.force);
    ASSERT_TRUE(ref.consistent);
    const VectorXd qdd = acceleration(plant, pb, model, qdot, inst.force);
    const VectorXd fc = constraint_force(plant, pb, model, qdot, inst.force);
    EXPECT_LT((qdd - ref.qddot).norm(), 1e-8 * (1.0 + ref.qddot.norm()));
    EXPECT_LT((fc - ref.constraint_force).norm(), 1e-8 * (1.0 + fc.norm()));
  }
}

TEST(ConstraintForce, PendulumTension) {
  for (double omega : {0.0, 0.5, 2.0}) {
    const auto s = pendulum_bottom(omega);
    const VectorXd fc = constraint_force(s.plant, s.proj, s.model, s.qdot, VectorXd::Zero(2));
    EXPECT_NEAR(fc(0), 0.0, 1e-14);
    EXPECT_NEAR(fc(1), 1.0 + omega * omega, 1e-14);
  }
}

TEST(ConstraintForce, UnconstrainedIsZero) {
  std::mt19937_64 rng(6);
  PlantMatrices plant{verification::random_spd(rng, 3), verification::random_matrix(rng, 3, 3),
                      verification::random_matrix(rng, 3, 1), MatrixXd::Identity(3, 3)};
  const ProjectorBundle pb = identity_projectors(3);
  const VectorXd fc = constraint_force(plant, pb, assemble(plant, pb, 1.0),
                                       verification::random_matrix(rng, 3, 1),
                                       verification::random_matrix(rng, 3, 1));
  EXPECT_LT(fc.norm(), 1e-12);
}

TEST(ResolveActuation, IdentityInput) {
  const auto s = pendulum_bottom(0.0);
  const ActuationResolution res =
      resolve_actuation(Vector2d(0.7, 0.0), MatrixXd::Identity(2, 2), s.proj);
  EXPECT_LT((res.u - Vector2d(0.7, 0.0)).norm(), 1e-15);
  EXPECT_LT((res.force - Vector2d(0.7, 0.0)).norm(), 1e-15);
}

TEST(ResolveActuation, DuplicatedColumnSplitsEqually) {
  const auto s = pendulum_bottom(0.0);
  MatrixXd b(2, 2);
  b << 1, 1, 0.4, 0.4;
  const VectorXd f_par = Vector2d(2.0, 0.0);
  const ActuationResolution res = resolve_actuation(f_par, b, s.proj);
  EXPECT_NEAR(res.u(0), 1.0, 1e-14);
  EXPECT_NEAR(res.u(1), 1.0, 1e-14);
  const VectorXd oracle = testing::min_norm_actuation(testing::null_basis(s.jac.a), b, f_par);
  EXPECT_LT((res.u - oracle).norm(), 1e-13);
}

TEST(ResolveActuation, RandomAdmissibleInputsMatchNormalEquations) {
  std::mt19937_64 rng(26);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const auto inst = verification::random_instance(rng);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot});
    const Eigen::Index n = pb.dim();
    const MatrixXd b = verification::random_matrix(rng, n, n + verification::random_int(rng, 0, 3));
    if (!check_admissibility(b, pb).admissible) continue;
    ++checked;
    const VectorXd f_par = pb.p * inst.force;
    const ActuationResolution res = resolve_actuation(f_par, b, pb);
    EXPECT_LT((pb.p * b * res.u - f_par).norm(), 1e-10 * (1.0 + f_par.norm()));
    const VectorXd oracle = testing::min_norm_actuation(testing::null_basis(inst.a), b, f_par);
    EXPECT_LT((res.u - oracle).norm(), 1e-8 * (1.0 + oracle.norm()));
    EXPECT_LT((res.force - b * res.u).norm(), 1e-12 * (1.0 + res.force.norm()));
  }
  EXPECT_GT(checked, 250);
}

TEST(ResolveActuation, Errors) {
  const auto s = pendulum_bottom(0.0);
  EXPECT_THROW(resolve_actuation(Vector2d(1.0, 0.0), Vector2d(0.0, 1.0), s.proj),
               RankDeficiency);
  EXPECT_THROW(resolve_actuation(Vector2d(1.0, 1.0), MatrixXd::Identity(2, 2), s.proj),
               InvalidTarget);
}

TEST(ForceSplit, NaturalReactionNeedsNoSqueeze) {
  const auto s = pendulum_bottom(0.8);
  const VectorXd f_par = Vector2d(0.2, 0.0);
  const VectorXd natural = constraint_force(s.plant, s.proj, s.model, s.qdot, f_par);
  const VectorXd f_perp =
      force_split_for_control(f_par, natural, s.plant, s.proj, s.model, s.qdot);
  EXPECT_LT(f_perp.norm(), 1e-14);
}

TEST(ForceSplit, IncreasedTensionAtRest) {
  const auto s = pendulum_bottom(0.0);
  const double delta = 0.25;
  const VectorXd f_perp = force_split_for_control(
      VectorXd::Zero(2), Vector2d(0.0, 1.0 + delta), s.plant, s.proj, s.model, s.qdot);
  EXPECT_NEAR(f_perp(0), 0.0, 1e-15);
  EXPECT_NEAR(f_perp(1), -delta, 1e-15);
}

TEST(ForceSplit, RejectsReactionWithAdmissibleComponent) {
  const auto s = pendulum_bottom(0.0);
  EXPECT_THROW(force_split_for_control(VectorXd::Zero(2), Vector2d(0.1, 1.0), s.plant,
                                       s.proj, s.model, s.qdot),
               InvalidTarget);
}

// Applying f_par + f_perp must reproduce the requested reaction for a
// non-isotropic inertia with nonzero Omega.
TEST(ForceSplit, RealizesRequestedReactionWithCoupledInertia) {
  PlantMatrices plant{MatrixXd(2, 2), MatrixXd::Zero(2, 2), Vector2d(0.0, -2.0),
                      MatrixXd::Identity(2, 2)};
  plant.mass << 2, 1, 1, 3;
  MatrixXd a(1, 2), a_dot(1, 2);
  a << 0, 1;
  a_dot << 0.7, 0;
  const ProjectorBundle pb = build_projectors({a, a_dot});
  const ConstrainedModel model = assemble(plant, pb, 1.0);
  const VectorXd qdot = Vector2d(1.3, 0.0);
  const VectorXd f_par = Vector2d(0.4, 0.0);
  const VectorXd wanted = Vector2d(0.0, 5.0);
  const VectorXd f_perp = force_split_for_control(f_par, wanted, plant, pb, model, qdot);
  const VectorXd realized = constraint_force(plant, pb, model, qdot, f_par + f_perp);
  EXPECT_LT((realized - wanted).norm(), 1e-13);

  // Using Q instead of S in front of M Omega q' misses the target here.
  const VectorXd mo = plant.mass * pb.omega * qdot;
  const MatrixXd s = reaction_projector(plant, pb, model);
  EXPECT_GT((s * mo - pb.q * mo).norm(), 0.1);
}

TEST(Decompose, ParallelAndPerpendicularParts) {
  std::mt19937_64 rng(27);
  for (int i = 0; i < 100; ++i) {
    const auto inst = verification::random_instance(rng);
    const PlantMatrices plant = random_plant(rng, inst);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot});
    const ConstrainedModel model = assemble(plant, pb, 1.0);
    const VectorXd qdot = pb.p * verification::random_matrix(rng, pb.dim(), 1);
    const ForceDecomposition d = decompose_force(plant, pb, model, qdot, inst.force);
    EXPECT_LT((d.f_par + d.f_perp - inst.force).norm(), 1e-12 * (1.0 + inst.force.norm()));
    EXPECT_LT((pb.p * d.f_c).norm(), 1e-9 * (1.0 + d.f_c.norm()));
    if (check_admissibility(plant.input, pb).admissible) {
      EXPECT_LT((pb.p * plant.input * d.u - d.f_par).norm(), 1e-9 * (1.0 + d.f_par.norm()));
    } else {
      EXPECT_EQ(d.u.size(), 0);
    }
  }
}

}  // namespace
}  // namespace projdyn
