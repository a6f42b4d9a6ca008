#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gamblet/sparse.hpp"

namespace gamblet::testing {

inline CsrMatrix random_sparse(Index rows, Index cols, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<Triplet> t;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (keep(rng)) t.push_back({i, j, u(rng)});
    }
  }
  return CsrMatrix::from_triplets(rows, cols, std::move(t));
}

/// B B^T + n I, dense-backed SPD test matrix.
inline Eigen::MatrixXd random_spd(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd b(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) b(i, j) = u(rng);
  return b * b.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

inline Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline Eigen::Map<const Eigen::VectorXd> view(const Vector& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double s = b.norm();
  return s > 0.0 ? (a - b).norm() / s : (a - b).norm();
}

}  // namespace gamblet::testing
