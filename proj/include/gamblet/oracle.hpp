#pragma once

#include <Eigen/Dense>

// Dense brute-force references for tests and calibration. Everything here is
// Cholesky-based and independent of the CG/sparse code paths.

namespace gamblet::oracle {

using DenseMatrix = Eigen::MatrixXd;

inline constexpr Eigen::Index kMaxOracleSize = 4096;

struct DenseSolve {
  DenseMatrix x;
  double relative_residual = 0.0;  // ||B - A X||_F / ||B||_F
};

/// Cholesky solve of A X = B. Throws std::invalid_argument above
/// kMaxOracleSize and NumericalError on a non-positive pivot.
DenseSolve dense_solve(const DenseMatrix& a, const DenseMatrix& b);

/// Gamblets as constrained energy minimizers: rows of
/// Psi = (Phi K Phi^T)^{-1} Phi K with K = A^{-1}.
DenseMatrix dense_gamblets(const DenseMatrix& a, const DenseMatrix& phi);

/// Theta = Phi A^{-1} Phi^T.
DenseMatrix dense_theta(const DenseMatrix& a, const DenseMatrix& phi);

/// Eigenvalues in ascending order (self-adjoint solver).
Eigen::VectorXd dense_eigenvalues(const DenseMatrix& a);

}  // namespace gamblet::oracle
