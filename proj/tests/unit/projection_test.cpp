#include "projdyn/projection.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "projdyn/errors.hpp"
#include "projdyn/verification/random_instances.hpp"

namespace projdyn {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::penrose_violation;

MatrixXd row(std::initializer_list<double> v) {
  MatrixXd out(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index j = 0;
  for (double x : v) out(0, j++) = x;
  return out;
}

TEST(PseudoInverse, SingleRow) {
  const MatrixXd a = row({0.0, -2.0});
  const PseudoInverse pi = pseudo_inverse(a);
  EXPECT_EQ(pi.rank, 1);
  ASSERT_EQ(pi.matrix.rows(), 2);
  ASSERT_EQ(pi.matrix.cols(), 1);
  EXPECT_NEAR(pi.matrix(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(pi.matrix(1, 0), -0.5, 1e-15);
  EXPECT_LT(penrose_violation(a, pi.matrix), 1e-14);
}

TEST(PseudoInverse, ZeroMatrix) {
  const PseudoInverse pi = pseudo_inverse(MatrixXd::Zero(1, 2));
  EXPECT_EQ(pi.rank, 0);
  EXPECT_EQ(pi.matrix.rows(), 2);
  EXPECT_EQ(pi.matrix.cols(), 1);
  EXPECT_EQ(pi.matrix.norm(), 0.0);
}

TEST(PseudoInverse, RedundantRows) {
  MatrixXd a(2, 2);
  a << 1, 0, 1, 0;
  const PseudoInverse pi = pseudo_inverse(a);
  EXPECT_EQ(pi.rank, 1);
  MatrixXd expected(2, 2);
  expected << 0.5, 0.5, 0, 0;
  EXPECT_LT((pi.matrix - expected).norm(), 1e-15);
  EXPECT_LT(penrose_violation(a, pi.matrix), 1e-14);
}

TEST(PseudoInverse, RejectsNonFinite) {
  MatrixXd a = row({1.0, std::numeric_limits<double>::quiet_NaN()});
  EXPECT_THROW(pseudo_inverse(a), InvalidInput);
  a(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(pseudo_inverse(a), InvalidInput);
}

TEST(PseudoInverse, RejectsBadTolerance) {
  EXPECT_THROW(pseudo_inverse(row({1.0, 0.0}), 0.0), InvalidInput);
  EXPECT_THROW(pseudo_inverse(row({1.0, 0.0}), -1.0), InvalidInput);
}

TEST(PseudoInverse, EmptyMatrix) {
  const PseudoInverse pi = pseudo_inverse(MatrixXd::Zero(0, 3));
  EXPECT_EQ(pi.rank, 0);
  EXPECT_EQ(pi.matrix.rows(), 3);
  EXPECT_EQ(pi.matrix.cols(), 0);
}

TEST(PseudoInverse, PenroseConditionsOnRandomMatrices) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const int m = verification::random_int(rng, 1, 8);
    const int n = verification::random_int(rng, 1, 8);
    const int r = verification::random_int(rng, 1, std::min(m, n));
    const MatrixXd a = verification::random_rank_deficient(rng, m, n, r);
    const PseudoInverse pi = pseudo_inverse(a);
    EXPECT_EQ(pi.rank, r);
    EXPECT_LT(penrose_violation(a, pi.matrix), 1e-10 * (1.0 + a.norm()));
  }
}

TEST(PseudoInverse, MatchesTikhonovLimit) {
  std::mt19937_64 rng(8);
  const MatrixXd a = verification::random_rank_deficient(rng, 3, 5, 2);
  const MatrixXd pinv = pseudo_inverse(a).matrix;
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const MatrixXd reg =
        a.transpose() * (a * a.transpose() + eps * MatrixXd::Identity(3, 3)).inverse();
    const double gap = (reg - pinv).norm();
    EXPECT_LT(gap, previous);
    previous = gap;
  }
  EXPECT_LT(previous, 1e-4);
}

// Numerical rank agrees with exact rank from integer elimination.
TEST(NumericalRank, MatchesIntegerElimination) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> entry(-3, 3);
  for (int trial = 0; trial < 400; ++trial) {
    const int m = verification::random_int(rng, 1, 6);
    const int n = verification::random_int(rng, 1, 6);
    const int r = verification::random_int(rng, 0, std::min(m, n));
    // Integer product of factors gives rank <= r, often exactly r.
    testing::IntMatrix l(m, std::vector<std::int64_t>(r));
    testing::IntMatrix rt(r, std::vector<std::int64_t>(n));
    for (auto& v : l) for (auto& x : v) x = entry(rng);
    for (auto& v : rt) for (auto& x : v) x = entry(rng);
    testing::IntMatrix a(m, std::vector<std::int64_t>(n, 0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < r; ++k) a[i][j] += l[i][k] * rt[k][j];
    EXPECT_EQ(numerical_rank(testing::to_double(a)), testing::bareiss_rank(a))
        << "trial " << trial;
  }
}

TEST(NumericalRank, BareissOracleSanity) {
  EXPECT_EQ(testing::bareiss_rank({{1, 2}, {2, 4}}), 1);
  EXPECT_EQ(testing::bareiss_rank({{0, 0}, {0, 0}}), 0);
  EXPECT_EQ(testing::bareiss_rank({{0, 1, 2}, {1, 0, 3}, {1, 1, 5}}), 2);
  EXPECT_EQ(testing::bareiss_rank({{2, 0, 0}, {0, 3, 0}, {0, 0, 5}}), 3);
}

TEST(BuildProjectors, PendulumAtBottom) {
  const ProjectorBundle pb = build_projectors({row({0.0, -2.0}), row({0.0, 0.0})});
  EXPECT_EQ(pb.rank, 1);
  EXPECT_LT((pb.p - Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix()).norm(), 1e-15);
  EXPECT_LT((pb.q - Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix()).norm(), 1e-15);
}

TEST(BuildProjectors, PendulumMovingThroughBottom) {
  const double omega = 1.7;
  const ProjectorBundle pb =
      build_projectors({row({0.0, -2.0}), row({2.0 * omega, 0.0})});
  MatrixXd lambda(2, 2), pdot(2, 2);
  lambda << 0, 0, omega, 0;
  pdot << 0, omega, omega, 0;
  EXPECT_LT((pb.lambda - lambda).norm(), 1e-14);
  EXPECT_LT((pb.p_dot - pdot).norm(), 1e-14);
  EXPECT_EQ((pb.omega + pb.omega.transpose()).norm(), 0.0);
}

// Closed-form circle projector and its derivative at arbitrary states.
TEST(BuildProjectors, MatchesCircleClosedForm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> speed(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double len = 0.5 + std::abs(speed(rng));
    const double th = angle(rng);
    const Eigen::Vector2d q(len * std::sin(th), -len * std::cos(th));
    const Eigen::Vector2d tangent(std::cos(th), std::sin(th));
    const Eigen::Vector2d qdot = speed(rng) * len * tangent;
    const MatrixXd a = 2.0 * q.transpose();
    const MatrixXd a_dot = 2.0 * qdot.transpose();
    const ProjectorBundle pb = build_projectors({a, a_dot});
    EXPECT_LT((pb.p - MatrixXd(testing::circle_projector(q, len))).norm(), 1e-13);
    EXPECT_LT((pb.p_dot - MatrixXd(testing::circle_projector_rate(q, qdot, len))).norm(),
              1e-12);
  }
}

TEST(BuildProjectors, UnconstrainedLimit) {
  const ProjectorBundle pb = build_projectors({MatrixXd::Zero(1, 3), MatrixXd::Zero(1, 3)});
  EXPECT_EQ(pb.rank, 0);
  EXPECT_EQ((pb.p - MatrixXd::Identity(3, 3)).norm(), 0.0);
  EXPECT_EQ(pb.lambda.norm(), 0.0);
  EXPECT_EQ(pb.p_dot.norm(), 0.0);
  const ProjectorBundle id = identity_projectors(3);
  EXPECT_EQ((id.p - pb.p).norm(), 0.0);
}

TEST(BuildProjectors, DimensionMismatchRejected) {
  EXPECT_THROW(build_projectors({MatrixXd::Zero(1, 3), MatrixXd::Zero(2, 3)}),
               InvalidInput);
}

TEST(BuildProjectors, RandomInvariants) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto inst = verification::random_instance(rng);
    const ProjectorBundle pb = build_projectors({inst.a, inst.a_dot});
    const Eigen::Index n = pb.dim();
    const MatrixXd pinv = pseudo_inverse(inst.a).matrix;
    EXPECT_LT((pb.p * pb.p - pb.p).norm(), 1e-10);
    EXPECT_LT((pb.p - pb.p.transpose()).norm(), 1e-10);
    EXPECT_LT((inst.a * pb.p).norm(), 1e-10 * (1.0 + inst.a.norm()));
    EXPECT_LT((pb.p * pinv).norm(), 1e-10 * (1.0 + pinv.norm()));
    EXPECT_LT((pb.p * pb.lambda).norm(), 1e-10 * (1.0 + pb.lambda.norm()));
    EXPECT_LT((pb.lambda.transpose() * pb.p).norm(), 1e-10 * (1.0 + pb.lambda.norm()));
    EXPECT_EQ((pb.omega + pb.omega.transpose()).norm(), 0.0);
    EXPECT_LT((pb.p + pb.q - MatrixXd::Identity(n, n)).norm(), 1e-15);
    EXPECT_NEAR(pb.p.trace(), static_cast<double>(n - pb.rank), 1e-10);
  }
}

ConstraintJacobian pendulum_family(double t) {
  // Point on the unit circle moving with unit angular rate through the bottom.
  const Eigen::Vector2d q(std::sin(t), -std::cos(t));
  const Eigen::Vector2d qdot(std::cos(t), std::sin(t));
  return {2.0 * q.transpose(), 2.0 * qdot.transpose()};
}

TEST(PdotFiniteDifference, PendulumResidualSmall) {
  EXPECT_LE(pdot_fd_residual(pendulum_family, 0.0, 1e-4), 1e-6);
}

TEST(PdotFiniteDifference, ConstantJacobianIsExact) {
  std::mt19937_64 rng(1);
  const MatrixXd a = verification::random_matrix(rng, 2, 5);
  const auto constant = [&](double) {
    return ConstraintJacobian{a, MatrixXd::Zero(2, 5)};
  };
  EXPECT_LT(pdot_fd_residual(constant, 0.3, 1e-3), 1e-15);
}

TEST(PdotFiniteDifference, SecondOrderDecay) {
  for (double h : {1e-2, 4e-3}) {
    const double r1 = pdot_fd_residual(pendulum_family, 0.2, h);
    const double r2 = pdot_fd_residual(pendulum_family, 0.2, h / 2);
    EXPECT_GT(r1 / r2, 3.5);
    EXPECT_LT(r1 / r2, 4.5);
  }
}

TEST(RankTolerance, EnvironmentOverride) {
  ASSERT_EQ(setenv("PROJDYN_RANK_TOL", "1e-6", 1), 0);
  EXPECT_DOUBLE_EQ(rank_tol_from_env(), 1e-6);
  ASSERT_EQ(setenv("PROJDYN_RANK_TOL", "garbage", 1), 0);
  EXPECT_DOUBLE_EQ(rank_tol_from_env(), kDefaultRankTol);
  ASSERT_EQ(unsetenv("PROJDYN_RANK_TOL"), 0);
  EXPECT_DOUBLE_EQ(rank_tol_from_env(), kDefaultRankTol);
}

TEST(RankTolerance, TruncatesSmallSingularValues) {
  MatrixXd a(2, 3);
  a << 1, 0, 0, 0, 1e-12, 0;
  EXPECT_EQ(numerical_rank(a), 1);
  EXPECT_EQ(numerical_rank(a, 1e-14), 2);
}

}  // namespace
}  // namespace projdyn
