#include "projdyn/projection.hpp"

#include <cstdlib>
#include <string>

#include "projdyn/errors.hpp"

namespace projdyn {
namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + " has non-finite entries");
  }
}

void require_positive_tol(double rank_tol) {
  if (!(rank_tol > 0.0)) {
    throw InvalidInput("rank_tol must be positive");
  }
}

}  // namespace

double rank_tol_from_env() {
  const char* raw = std::getenv("PROJDYN_RANK_TOL");
  if (raw == nullptr || *raw == '\0') return kDefaultRankTol;
  char* end = nullptr;
  const double value = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(value > 0.0)) return kDefaultRankTol;
  return value;
}

PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a, double rank_tol) {
  require_positive_tol(rank_tol);
  require_finite(a, "constraint matrix");

  PseudoInverse out;
  out.matrix = Eigen::MatrixXd::Zero(a.cols(), a.rows());
  if (a.size() == 0) return out;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  if (sigma_max == 0.0) return out;

  const double cutoff = rank_tol * sigma_max;
  int rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;

  const auto u = svd.matrixU().leftCols(rank);
  const auto v = svd.matrixV().leftCols(rank);
  const Eigen::VectorXd inv = sigma.head(rank).cwiseInverse();
  out.matrix = v * inv.asDiagonal() * u.transpose();
  out.rank = rank;
  return out;
}

int numerical_rank(const Eigen::MatrixXd& a, double rank_tol) {
  require_positive_tol(rank_tol);
  require_finite(a, "matrix");
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double cutoff = rank_tol * sigma(0);
  int rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;
  return rank;
}

ProjectorBundle build_projectors(const ConstraintJacobian& jacobian,
                                 double rank_tol) {
  const Eigen::MatrixXd& a = jacobian.a;
  const Eigen::MatrixXd& a_dot = jacobian.a_dot;
  if (a.rows() != a_dot.rows() || a.cols() != a_dot.cols()) {
    throw InvalidInput("A and A_dot must have identical dimensions");
  }
  require_finite(a_dot, "constraint matrix rate");

  const Eigen::Index n = a.cols();
  const PseudoInverse pinv = pseudo_inverse(a, rank_tol);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);

  ProjectorBundle out;
  out.rank = pinv.rank;
  out.rank_tol = rank_tol;

  const Eigen::MatrixXd range_projector = pinv.matrix * a;
  out.q = 0.5 * (range_projector + range_projector.transpose());
  out.p = identity - out.q;
  out.lambda = -pinv.matrix * a_dot;
  out.p_dot = out.lambda * out.p + out.p * out.lambda.transpose();
  out.omega = out.lambda - out.lambda.transpose();
  return out;
}

ProjectorBundle identity_projectors(Eigen::Index n, double rank_tol) {
  ProjectorBundle out;
  out.p = Eigen::MatrixXd::Identity(n, n);
  out.q = Eigen::MatrixXd::Zero(n, n);
  out.lambda = Eigen::MatrixXd::Zero(n, n);
  out.p_dot = Eigen::MatrixXd::Zero(n, n);
  out.omega = Eigen::MatrixXd::Zero(n, n);
  out.rank = 0;
  out.rank_tol = rank_tol;
  return out;
}

double pdot_fd_residual(
    const std::function<ConstraintJacobian(double)>& jacobian_at, double t,
    double h, double rank_tol) {
  if (!(h > 0.0)) throw InvalidInput("finite-difference step must be positive");
  const ProjectorBundle ahead = build_projectors(jacobian_at(t + h), rank_tol);
  const ProjectorBundle behind = build_projectors(jacobian_at(t - h), rank_tol);
  const ProjectorBundle here = build_projectors(jacobian_at(t), rank_tol);
  const Eigen::MatrixXd fd = (ahead.p - behind.p) / (2.0 * h);
  return (fd - here.p_dot).norm();
}

}  // namespace projdyn
