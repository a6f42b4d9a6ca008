#include "gamblet/exact.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gamblet/errors.hpp"

namespace gamblet {

namespace {

std::string level_stage(int k) { return "level " + std::to_string(k); }

// Symmetrizes x in place and returns the relative asymmetry removed.
double symmetrize(Eigen::MatrixXd& x, double limit, const std::string& stage,
                  const char* what) {
  const double scale = x.cwiseAbs().maxCoeff();
  const double defect = scale > 0.0 ? (x - x.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  if (defect > limit) {
    throw NumericalError(stage, std::string(what) + " asymmetry " + std::to_string(defect) +
                                    " exceeds repair limit");
  }
  x = 0.5 * (x + x.transpose()).eval();
  return defect;
}

Vector to_vector(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

struct SubbandSolve {
  Vector w;
  Vector increment;
  CgReport report;
};

SubbandSolve subband_solve(const GambletLevel& level, std::span<const double> load,
                           const ExactOptions& opts) {
  SubbandSolve out;
  const Vector rhs = spmv(level.w, load);
  out.w.assign(rhs.size(), 0.0);
  out.report = cg_solve(level.subband_stiffness, rhs, out.w, {opts.tol_subband, 100000});
  if (out.report.breakdown) {
    throw NumericalError(level_stage(level.k), "CG breakdown on B^(k): not positive definite");
  }
  const Vector coeffs = spmv_transpose(level.w, out.w);
  out.increment = to_vector(level.psi.transpose() * as_eigen(coeffs));
  return out;
}

}  // namespace

Eigen::MatrixXd sparse_times_dense(const CsrMatrix& s, const Eigen::MatrixXd& d) {
  if (s.cols() != d.rows()) throw std::invalid_argument("sparse_times_dense: dimension mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s.rows(), d.cols());
  for (Index i = 0; i < s.rows(); ++i) {
    const auto cols = s.row_indices(i);
    const auto vals = s.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) out.row(i) += vals[p] * d.row(cols[p]);
  }
  return out;
}

Eigen::MatrixXd dense_times_sparse_transpose(const Eigen::MatrixXd& d, const CsrMatrix& s) {
  if (d.cols() != s.cols()) {
    throw std::invalid_argument("dense_times_sparse_transpose: dimension mismatch");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d.rows(), s.rows());
  for (Index j = 0; j < s.rows(); ++j) {
    const auto cols = s.row_indices(j);
    const auto vals = s.row_values(j);
    for (std::size_t p = 0; p < cols.size(); ++p) out.col(j) += vals[p] * d.col(cols[p]);
  }
  return out;
}

Eigen::MatrixXd dense_times_sparse(const Eigen::MatrixXd& d, const CsrMatrix& s) {
  if (d.cols() != s.rows()) throw std::invalid_argument("dense_times_sparse: dimension mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d.rows(), s.cols());
  for (Index l = 0; l < s.rows(); ++l) {
    const auto cols = s.row_indices(l);
    const auto vals = s.row_values(l);
    for (std::size_t p = 0; p < cols.size(); ++p) out.col(cols[p]) += vals[p] * d.col(l);
  }
  return out;
}

Vector MultiresSolution::partial_sum(int k) const {
  if (k < 1 || k > q) throw std::invalid_argument("partial_sum: level out of range");
  Vector s = increments[1];
  for (int j = 2; j <= k; ++j) axpy(1.0, increments[j], s);
  return s;
}

GambletLevel init_level_q(const CsrMatrix& mass, const CsrMatrix& stiffness,
                          std::span<const double> rhs, const ExactOptions& opts) {
  const Index n = mass.rows();
  if (mass.cols() != n || stiffness.rows() != n || stiffness.cols() != n ||
      rhs.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("init_level_q: inconsistent sizes");
  }
  GambletLevel level;
  int q = 0;
  while ((Index{1} << (2 * q)) < n) ++q;
  level.k = q;
  if (opts.nodal_init) {
    level.psi = Eigen::MatrixXd::Identity(n, n);
  } else {
    level.psi.resize(n, n);
    Vector e(static_cast<std::size_t>(n), 0.0), x(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      std::fill(x.begin(), x.end(), 0.0);
      const CgReport rep = cg_solve(mass, e, x, {opts.tol_mass, 10000});
      if (!rep.converged) {
        throw NumericalError(level_stage(q), "mass inverse column " + std::to_string(j) +
                                                 " did not converge");
      }
      level.psi.row(j) = as_eigen(x).transpose();
      e[j] = 0.0;
    }
  }
  const Eigen::MatrixXd a_psi_t = sparse_times_dense(stiffness, level.psi.transpose());
  level.stiffness.noalias() = level.psi * a_psi_t;
  level.symmetry_repair =
      symmetrize(level.stiffness, opts.symmetry_repair_limit, level_stage(q), "A^(q)");
  level.load = to_vector(level.psi * as_eigen(rhs));
  return level;
}

LevelStep level_step(GambletLevel& level, const IndexTree& tree, const ExactOptions& opts) {
  const int k = level.k;
  if (k < 2) throw std::invalid_argument("level_step: need k >= 2");
  const std::string stage = level_stage(k);
  level.w = build_w(tree, k, opts.variant).w;
  const Aggregation agg = build_pi(tree, k - 1);

  const Eigen::MatrixXd wa = sparse_times_dense(level.w, level.stiffness);
  level.subband_stiffness = dense_times_sparse_transpose(wa, level.w);
  const double b_repair = symmetrize(level.subband_stiffness, opts.symmetry_repair_limit, stage, "B^(k)");

  const Eigen::MatrixXd wa_pibar = dense_times_sparse_transpose(wa, agg.pi_bar);
  const Eigen::LLT<Eigen::MatrixXd> chol(level.subband_stiffness);
  if (chol.info() != Eigen::Success) {
    throw NumericalError(stage, "B^(k) is not positive definite");
  }
  level.d = -chol.solve(wa_pibar);
  level.restriction = agg.pi_bar.to_dense() + dense_times_sparse(level.d.transpose(), level.w);

  LevelStep out;
  GambletLevel& next = out.coarser;
  next.k = k - 1;
  const Eigen::MatrixXd ra = level.restriction * level.stiffness;
  next.stiffness.noalias() = ra * level.restriction.transpose();
  const double a_repair = symmetrize(next.stiffness, opts.symmetry_repair_limit, stage, "A^(k-1)");
  level.symmetry_repair = std::max(level.symmetry_repair, std::max(a_repair, b_repair));
  if (Eigen::LLT<Eigen::MatrixXd>(next.stiffness).info() != Eigen::Success) {
    throw NumericalError(stage, "A^(k-1) lost positive definiteness");
  }
  next.psi.noalias() = level.restriction * level.psi;
  next.load = to_vector(level.restriction * as_eigen(level.load));

  SubbandSolve sub = subband_solve(level, level.load, opts);
  out.subband = std::move(sub.w);
  out.increment = std::move(sub.increment);
  out.report = sub.report;
  return out;
}

CoarseSolve solve_coarsest(const GambletLevel& level1, const ExactOptions& opts) {
  CoarseSolve out;
  out.coefficients.assign(level1.load.size(), 0.0);
  out.report = cg_solve(level1.stiffness, level1.load, out.coefficients, {opts.tol_subband, 100000});
  if (out.report.breakdown) {
    throw NumericalError(level_stage(1), "CG breakdown on A^(1)");
  }
  out.u1 = to_vector(level1.psi.transpose() * as_eigen(out.coefficients));
  return out;
}

ExactResult exact_solve(const CsrMatrix& mass, const CsrMatrix& stiffness,
                        std::span<const double> rhs, const IndexTree& tree,
                        const ExactOptions& opts) {
  const int q = tree.depth();
  if (mass.rows() != tree.size(q)) {
    throw std::invalid_argument("exact_solve: hierarchy does not match the system size");
  }
  ExactResult res;
  res.levels.resize(static_cast<std::size_t>(q) + 1);
  MultiresSolution& sol = res.solution;
  sol.q = q;
  sol.subband.resize(static_cast<std::size_t>(q) + 1);
  sol.increments.resize(static_cast<std::size_t>(q) + 1);
  sol.subband_reports.resize(static_cast<std::size_t>(q) + 1);

  res.levels[q] = init_level_q(mass, stiffness, rhs, opts);
  for (int k = q; k >= 2; --k) {
    LevelStep step = level_step(res.levels[k], tree, opts);
    sol.subband[k] = std::move(step.subband);
    sol.increments[k] = std::move(step.increment);
    sol.subband_reports[k] = step.report;
    res.levels[k - 1] = std::move(step.coarser);
  }
  CoarseSolve coarse = solve_coarsest(res.levels[1], opts);
  sol.coarse = std::move(coarse.coefficients);
  sol.increments[1] = std::move(coarse.u1);
  sol.coarse_report = coarse.report;
  sol.u = sol.partial_sum(q);
  return res;
}

MultiresSolution exact_resolve(const std::vector<GambletLevel>& levels,
                               std::span<const double> rhs, const ExactOptions& opts) {
  const int q = static_cast<int>(levels.size()) - 1;
  if (q < 1) throw std::invalid_argument("exact_resolve: no levels");
  MultiresSolution sol;
  sol.q = q;
  sol.subband.resize(static_cast<std::size_t>(q) + 1);
  sol.increments.resize(static_cast<std::size_t>(q) + 1);
  sol.subband_reports.resize(static_cast<std::size_t>(q) + 1);
  Vector g = to_vector(levels[q].psi * as_eigen(rhs));
  for (int k = q; k >= 2; --k) {
    SubbandSolve sub = subband_solve(levels[k], g, opts);
    sol.subband[k] = std::move(sub.w);
    sol.increments[k] = std::move(sub.increment);
    sol.subband_reports[k] = sub.report;
    g = to_vector(levels[k].restriction * as_eigen(g));
  }
  GambletLevel coarse_level;
  coarse_level.k = 1;
  coarse_level.stiffness = levels[1].stiffness;
  coarse_level.psi = levels[1].psi;
  coarse_level.load = std::move(g);
  CoarseSolve coarse = solve_coarsest(coarse_level, opts);
  sol.coarse = std::move(coarse.coefficients);
  sol.increments[1] = std::move(coarse.u1);
  sol.coarse_report = coarse.report;
  sol.u = sol.partial_sum(q);
  return sol;
}

Eigen::MatrixXd subband_basis(const GambletLevel& level) {
  if (level.k < 2 || level.w.rows() == 0) {
    throw std::invalid_argument("subband_basis: level has no W^(k)");
  }
  return sparse_times_dense(level.w, level.psi);
}

}  // namespace gamblet
