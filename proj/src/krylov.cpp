#include "gamblet/krylov.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gamblet/errors.hpp"

namespace gamblet {

LinearOperator as_operator(const CsrMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("as_operator: matrix not square");
  }
  Vector diag(static_cast<std::size_t>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) diag[i] = a.at(i, i);
  return {static_cast<std::size_t>(a.rows()),
          2 * static_cast<std::uint64_t>(a.nnz()),
          [&a](std::span<const double> x, std::span<double> y) { spmv(a, x, y); },
          std::move(diag)};
}

LinearOperator as_operator(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("as_operator: matrix not square");
  }
  const auto n = static_cast<std::size_t>(a.rows());
  const Eigen::VectorXd d = a.diagonal();
  return {n, 2 * static_cast<std::uint64_t>(n * n),
          [&a](std::span<const double> x, std::span<double> y) {
            Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
            Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
            yv.noalias() = a * xv;
          },
          Vector(d.data(), d.data() + n)};
}

CgReport cg_solve(const LinearOperator& a, std::span<const double> b,
                  std::span<double> x, const CgOptions& opts, OpCount* ops) {
  const std::size_t n = a.size;
  if (b.size() != n || x.size() != n) {
    throw std::invalid_argument("cg_solve: dimension mismatch");
  }
  if (!(opts.rel_tol > 0.0 && opts.rel_tol < 1.0)) {
    throw std::invalid_argument("cg_solve: rel_tol must lie in (0,1)");
  }
  CgReport report;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.converged = true;
    return report;
  }
  Vector inv_diag;
  if (opts.jacobi) {
    if (a.diagonal.size() != n) {
      throw std::invalid_argument("cg_solve: Jacobi preconditioning needs the diagonal");
    }
    inv_diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(a.diagonal[i] > 0.0)) {
        report.breakdown = true;
        return report;
      }
      inv_diag[i] = 1.0 / a.diagonal[i];
    }
  }
  auto precondition = [&](const Vector& r, Vector& z) {
    if (inv_diag.empty()) {
      z = r;
    } else {
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    }
  };
  Vector r(n), z(n), p(n), ap(n);
  a.apply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double rr = dot(r, r);
  precondition(r, z);
  double rz = dot(r, z);
  p = z;
  std::uint64_t flops = a.flops_per_apply + 6 * n;
  const double target = opts.rel_tol * bnorm;
  while (std::sqrt(rr) > target && report.iterations < opts.max_iter) {
    a.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      report.breakdown = true;
      break;
    }
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    rr = dot(r, r);
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_next;
    ++report.iterations;
    flops += a.flops_per_apply + (inv_diag.empty() ? 12 : 13) * n;
  }
  report.relative_residual = std::sqrt(rr) / bnorm;
  report.converged = !report.breakdown && std::sqrt(rr) <= target;
  if (ops) ops->add(flops);
  return report;
}

CgReport cg_solve(const CsrMatrix& a, std::span<const double> b,
                  std::span<double> x, const CgOptions& opts, OpCount* ops) {
  return cg_solve(as_operator(a), b, x, opts, ops);
}

CgReport cg_solve(const Eigen::MatrixXd& a, std::span<const double> b,
                  std::span<double> x, const CgOptions& opts, OpCount* ops) {
  return cg_solve(as_operator(a), b, x, opts, ops);
}

double cg_iteration_bound(double cond, double eps) {
  return 0.5 * std::sqrt(cond) * std::log(2.0 / eps);
}

namespace {

Vector start_vector(std::size_t n) {
  std::mt19937_64 rng(20170817);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  const double s = 1.0 / norm2(v);
  for (double& x : v) x *= s;
  return v;
}

}  // namespace

EigExtremes eig_extremes(const LinearOperator& a, double tol, int max_iter) {
  const std::size_t n = a.size;
  if (n == 0) throw std::invalid_argument("eig_extremes: empty operator");
  EigExtremes out;
  Vector v = start_vector(n);
  Vector w(n);

  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    a.apply(v, w);
    const double rq = dot(v, w);
    const double wn = norm2(w);
    out.power_iterations = it + 1;
    if (wn == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    if (it > 0 && std::abs(rq - lambda) <= tol * std::abs(rq)) {
      lambda = rq;
      break;
    }
    lambda = rq;
  }
  out.lambda_max = lambda;

  v = start_vector(n);
  double mu = 0.0;
  CgOptions inner{1e-12, 100000};
  for (int it = 0; it < max_iter; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    const CgReport rep = cg_solve(a, v, w, inner);
    if (rep.breakdown) {
      throw NumericalError("eig_extremes",
                           "inner CG breakdown: operator not positive definite");
    }
    // Rayleigh quotient of the new iterate: v^T w / w^T w with w = A^{-1} v.
    const double vw = dot(v, w);
    const double ww = dot(w, w);
    const double rq = vw / ww;
    const double wn = std::sqrt(ww);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    out.inverse_iterations = it + 1;
    if (it > 0 && std::abs(rq - mu) <= tol * std::abs(rq)) {
      mu = rq;
      break;
    }
    mu = rq;
  }
  out.lambda_min = mu;
  return out;
}

EigExtremes eig_extremes(const CsrMatrix& a, double tol, int max_iter) {
  return eig_extremes(as_operator(a), tol, max_iter);
}

EigExtremes eig_extremes(const Eigen::MatrixXd& a, double tol, int max_iter) {
  return eig_extremes(as_operator(a), tol, max_iter);
}

}  // namespace gamblet
