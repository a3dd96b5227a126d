#include "projdyn/system_loader.hpp"

#include <gtest/gtest.h>

#include <random>

#include "projdyn/catalog.hpp"
#include "projdyn/errors.hpp"
#include "projdyn/projection.hpp"

namespace projdyn {
namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

TEST(Polynomial, ValueGradientHessian) {
  // p = 3 x^2 y - y^3 + 2
  const Polynomial p(2, {{3.0, {2, 1}}, {-1.0, {0, 3}}, {2.0, {0, 0}}});
  const VectorXd q = Vector2d(1.5, -0.5);
  EXPECT_DOUBLE_EQ(p.value(q), 3 * 2.25 * -0.5 + 0.125 + 2);
  const VectorXd g = p.gradient(q);
  EXPECT_DOUBLE_EQ(g(0), 6 * 1.5 * -0.5);
  EXPECT_DOUBLE_EQ(g(1), 3 * 2.25 - 3 * 0.25);
  const MatrixXd h = p.hessian(q);
  EXPECT_DOUBLE_EQ(h(0, 0), 6 * -0.5);
  EXPECT_DOUBLE_EQ(h(0, 1), 6 * 1.5);
  EXPECT_DOUBLE_EQ(h(1, 0), 6 * 1.5);
  EXPECT_DOUBLE_EQ(h(1, 1), -6 * -0.5);
}

TEST(Polynomial, GradientMatchesFiniteDifferences) {
  const Polynomial p(3, {{1.0, {1, 2, 0}}, {-2.0, {0, 1, 3}}, {0.5, {4, 0, 1}}});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const VectorXd q = VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < 3; ++j) {
      VectorXd dq = VectorXd::Zero(3);
      dq(j) = h;
      EXPECT_NEAR(p.gradient(q)(j), (p.value(q + dq) - p.value(q - dq)) / (2 * h), 1e-8);
      EXPECT_LT((p.hessian(q).col(j) - (p.gradient(q + dq) - p.gradient(q - dq)) / (2 * h))
                    .norm(),
                1e-8);
    }
  }
}

TEST(Polynomial, RejectsWrongPowerCount) {
  EXPECT_THROW(Polynomial(2, {{1.0, {1}}}), InvalidInput);
}

TEST(SystemLoader, UserPendulumMatchesCatalog) {
  const MechanicalSystem user =
      load_system_file(std::string(PROJDYN_SOURCE_DIR) + "/scenarios/user_pendulum_system.json");
  const MechanicalSystem cat = find_system("pendulum");
  EXPECT_EQ(user.name, "my-pendulum");
  EXPECT_EQ(user.n, 2);
  EXPECT_EQ(user.m, 1);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const GeneralizedState s = cat.sampler(rng, cat.all_active());
    const auto ju = user.constraint_jacobian(s.q, s.qdot, user.all_active());
    const auto jc = cat.constraint_jacobian(s.q, s.qdot, cat.all_active());
    EXPECT_LT((ju.a - jc.a).norm(), 1e-13);
    EXPECT_LT((ju.a_dot - jc.a_dot).norm(), 1e-13);
    EXPECT_LT((user.plant(s.q, s.qdot).gravity - cat.plant(s.q, s.qdot).gravity).norm(), 1e-15);
    EXPECT_NEAR(user.potential(s.q), cat.potential(s.q), 1e-12);
  }
  const SelfTestReport rep = self_test(user, 50);
  EXPECT_TRUE(rep.passed());
}

TEST(SystemLoader, InactiveConstraintAndInputMap) {
  const MechanicalSystem sys = parse_system_definition(R"({
    "n": 3,
    "mass": [[1,0,0],[0,2,0],[0,0,3]],
    "input_map": [[1,0],[0,1],[1,1]],
    "constraints": [
      { "terms": [ { "coef": 1, "powers": [1,0,0] } ] },
      { "terms": [ { "coef": 1, "powers": [0,1,0] } ], "active": false }
    ]
  })");
  EXPECT_EQ(sys.k, 2);
  ASSERT_EQ(sys.initial_active.size(), 2u);
  EXPECT_TRUE(sys.initial_active[0]);
  EXPECT_FALSE(sys.initial_active[1]);
  const VectorXd q = VectorXd::Zero(3);
  const auto j = sys.constraint_jacobian(q, q, sys.initial_active);
  EXPECT_EQ(build_projectors(j).rank, 1);
  EXPECT_EQ(sys.name, "user-system");
}

TEST(SystemLoader, RejectsMalformedDefinitions) {
  EXPECT_THROW(parse_system_definition("not json"), InvalidInput);
  EXPECT_THROW(parse_system_definition(R"({"mass": [[1]]})"), InvalidInput);
  EXPECT_THROW(parse_system_definition(R"({"n": 2, "mass": [[1,2],[0,1]]})"), InvalidInput);
  EXPECT_THROW(parse_system_definition(R"({"n": 2, "mass": [[1,0],[0,-1]]})"), InvalidInput);
  EXPECT_THROW(parse_system_definition(R"({"n": 2, "mass": [[1,0]]})"), InvalidInput);
  EXPECT_THROW(parse_system_definition(
                   R"({"n": 1, "mass": [[1]], "constraints": [{"terms": [{"coef": 1, "powers": [-1]}]}]})"),
               InvalidInput);
  EXPECT_THROW(parse_system_definition(
                   R"({"n": 1, "mass": [[1]], "constraints": [{"terms": [{"coef": 1, "powers": [1, 2]}]}]})"),
               InvalidInput);
  EXPECT_THROW(load_system_file("/nonexistent/system.json"), InvalidInput);
}

}  // namespace
}  // namespace projdyn
