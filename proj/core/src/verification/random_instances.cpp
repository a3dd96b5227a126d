#include "projdyn/verification/random_instances.hpp"

#include <algorithm>

namespace projdyn::verification {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                              Eigen::Index cols, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = dist(rng);
  }
  return out;
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n,
                           double min_eig) {
  const Eigen::MatrixXd f = random_matrix(rng, n, n);
  return f * f.transpose() / static_cast<double>(n) * 2.0 +
         min_eig * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd random_rank_deficient(std::mt19937_64& rng, Eigen::Index rows,
                                      Eigen::Index cols, Eigen::Index rank) {
  return random_matrix(rng, rows, rank) * random_matrix(rng, rank, cols);
}

int random_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

RandomInstance random_instance(std::mt19937_64& rng, Eigen::Index max_n) {
  const auto n = static_cast<Eigen::Index>(random_int(rng, 2, static_cast<int>(max_n)));
  const auto m = static_cast<Eigen::Index>(random_int(rng, 1, static_cast<int>(n) - 1));
  RandomInstance out;
  out.mass = random_spd(rng, n);
  out.coriolis = random_matrix(rng, n, n);
  out.gravity = random_matrix(rng, n, 1, 5.0);
  if (m >= 2 && random_int(rng, 0, 3) == 0) {
    // A = L R with rank r < m. Differentiating the factors keeps A_dot q'
    // inside range(A) for q' in null(A), as for a real constraint family.
    const auto r = static_cast<Eigen::Index>(random_int(rng, 1, static_cast<int>(m) - 1));
    const Eigen::MatrixXd l = random_matrix(rng, m, r);
    const Eigen::MatrixXd rt = random_matrix(rng, r, n);
    out.a = l * rt;
    out.a_dot = random_matrix(rng, m, r) * rt + l * random_matrix(rng, r, n);
  } else {
    out.a = random_matrix(rng, m, n);
    out.a_dot = random_matrix(rng, m, n);
  }
  out.force = random_matrix(rng, n, 1, 2.0);
  return out;
}

}  // namespace projdyn::verification
