#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "gamblet/sparse.hpp"

namespace gamblet {

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iter = 20000;
  /// Diagonal (Jacobi) preconditioning. The stopping test still uses the
  /// unpreconditioned residual.
  bool jacobi = false;
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  /// p^T A p <= 0 was hit: the operator is not positive definite.
  bool breakdown = false;
};

/// y = A x for a symmetric positive definite operator of dimension n.
struct LinearOperator {
  std::size_t size = 0;
  std::uint64_t flops_per_apply = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
  /// Needed only when CgOptions::jacobi is set.
  Vector diagonal;
};

LinearOperator as_operator(const CsrMatrix& a);
LinearOperator as_operator(const Eigen::MatrixXd& a);

/// Conjugate gradients. `x` holds the initial guess on entry and the
/// iterate on exit. Stops when ||b - Ax||_2 <= rel_tol ||b||_2 or after
/// max_iter iterations; neither outcome throws.
CgReport cg_solve(const LinearOperator& a, std::span<const double> b,
                  std::span<double> x, const CgOptions& opts = {},
                  OpCount* ops = nullptr);
CgReport cg_solve(const CsrMatrix& a, std::span<const double> b,
                  std::span<double> x, const CgOptions& opts = {},
                  OpCount* ops = nullptr);
CgReport cg_solve(const Eigen::MatrixXd& a, std::span<const double> b,
                  std::span<double> x, const CgOptions& opts = {},
                  OpCount* ops = nullptr);

/// Worst-case CG iteration count to reduce the energy-norm error by `eps`
/// on an operator with condition number `cond`.
double cg_iteration_bound(double cond, double eps);

struct EigExtremes {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  int power_iterations = 0;
  int inverse_iterations = 0;
  double cond() const { return lambda_max / lambda_min; }
};

/// Largest eigenvalue by power iteration, smallest by inverse iteration with
/// CG inner solves. Both stop once successive Rayleigh quotients agree to
/// relative `tol`. Throws NumericalError if an inner solve breaks down.
EigExtremes eig_extremes(const LinearOperator& a, double tol = 1e-6,
                         int max_iter = 5000);
EigExtremes eig_extremes(const CsrMatrix& a, double tol = 1e-6,
                         int max_iter = 5000);
EigExtremes eig_extremes(const Eigen::MatrixXd& a, double tol = 1e-6,
                         int max_iter = 5000);

}  // namespace gamblet
