#include "gamblet/oracle.hpp"

#include <stdexcept>
#include <string>

#include "gamblet/errors.hpp"

namespace gamblet::oracle {

namespace {

void guard(const DenseMatrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(who) + ": matrix not square");
  }
  if (a.rows() > kMaxOracleSize) {
    throw std::invalid_argument(std::string(who) + ": size " + std::to_string(a.rows()) +
                                " exceeds the oracle limit " + std::to_string(kMaxOracleSize));
  }
}

Eigen::LLT<DenseMatrix> factor(const DenseMatrix& a, const char* who) {
  Eigen::LLT<DenseMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(who, "Cholesky failed: matrix not positive definite");
  }
  return llt;
}

}  // namespace

DenseSolve dense_solve(const DenseMatrix& a, const DenseMatrix& b) {
  guard(a, "dense_solve");
  if (b.rows() != a.rows()) throw std::invalid_argument("dense_solve: dimension mismatch");
  DenseSolve out;
  out.x = factor(a, "dense_solve").solve(b);
  const double bn = b.norm();
  out.relative_residual = bn > 0.0 ? (b - a * out.x).norm() / bn : 0.0;
  return out;
}

DenseMatrix dense_gamblets(const DenseMatrix& a, const DenseMatrix& phi) {
  guard(a, "dense_gamblets");
  if (phi.cols() != a.rows()) throw std::invalid_argument("dense_gamblets: dimension mismatch");
  const DenseMatrix k_phi_t = factor(a, "dense_gamblets").solve(phi.transpose());
  const DenseMatrix theta = phi * k_phi_t;
  const auto theta_llt = factor(0.5 * (theta + theta.transpose()), "dense_gamblets (Theta)");
  return theta_llt.solve(k_phi_t.transpose());
}

DenseMatrix dense_theta(const DenseMatrix& a, const DenseMatrix& phi) {
  guard(a, "dense_theta");
  if (phi.cols() != a.rows()) throw std::invalid_argument("dense_theta: dimension mismatch");
  const DenseMatrix theta = phi * factor(a, "dense_theta").solve(phi.transpose());
  return 0.5 * (theta + theta.transpose());
}

Eigen::VectorXd dense_eigenvalues(const DenseMatrix& a) {
  guard(a, "dense_eigenvalues");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("dense_eigenvalues", "did not converge");
  return es.eigenvalues();
}

}  // namespace gamblet::oracle
