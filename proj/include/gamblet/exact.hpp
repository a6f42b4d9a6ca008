#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gamblet/hierarchy.hpp"
#include "gamblet/krylov.hpp"
#include "gamblet/sparse.hpp"

namespace gamblet {

struct ExactOptions {
  WVariant variant = WVariant::chain;
  double tol_mass = 1e-10;     // CG tolerance for the columns of M^{-1}
  double tol_subband = 1e-10;  // CG tolerance for B^(k) w = W g and A^(1) U = g
  /// Start from psi^(q) = phi (nodal basis) instead of M^{-1} rows.
  bool nodal_init = false;
  /// Relative asymmetry tolerated before symmetrizing A^(k-1) / B^(k).
  double symmetry_repair_limit = 1e-12;
};

/// One level of the exact decomposition. Level k stores the transition to
/// level k-1 (W, B, D, R) when k >= 2.
struct GambletLevel {
  int k = 0;
  Eigen::MatrixXd psi;        // |I^(k)| x N, row i = coefficients of psi_i^(k)
  Eigen::MatrixXd stiffness;  // A^(k)
  Vector load;                // g^(k)

  CsrMatrix w;                        // W^(k)
  Eigen::MatrixXd subband_stiffness;  // B^(k)
  Eigen::MatrixXd d;                  // D^(k,k-1), |J^(k)| x |I^(k-1)|
  Eigen::MatrixXd restriction;        // R^(k-1,k)
  double symmetry_repair = 0.0;       // relative, for A^(k-1) and B^(k)
};

/// Multiresolution decomposition u = u^(1) + sum_k (u^(k) - u^(k-1)).
struct MultiresSolution {
  int q = 0;
  Vector coarse;                    // U^(1)
  std::vector<Vector> subband;      // [k] = w^(k), k = 2..q
  std::vector<Vector> increments;   // [1] = u^(1), [k] = u^(k) - u^(k-1)
  Vector u;
  CgReport coarse_report;
  std::vector<CgReport> subband_reports;  // [k]

  /// u^(k) = u^(1) + ... + (u^(k) - u^(k-1)).
  Vector partial_sum(int k) const;
};

/// Level q: psi^(q) = rows of M^{-1} (by CG), A^(q) = psi A psi^T,
/// g^(q) = psi^(q) b.
GambletLevel init_level_q(const CsrMatrix& mass, const CsrMatrix& stiffness,
                          std::span<const double> rhs, const ExactOptions& opts = {});

struct LevelStep {
  GambletLevel coarser;
  Vector subband;     // w^(k)
  Vector increment;   // u^(k) - u^(k-1) on the fine grid
  CgReport report;
};

/// One pass of the downward loop. Fills W/B/D/R of `level` and returns
/// level k-1 together with the subband solve.
LevelStep level_step(GambletLevel& level, const IndexTree& tree,
                     const ExactOptions& opts = {});

struct CoarseSolve {
  Vector coefficients;  // U^(1)
  Vector u1;            // u^(1) on the fine grid
  CgReport report;
};

CoarseSolve solve_coarsest(const GambletLevel& level1, const ExactOptions& opts = {});

struct ExactResult {
  std::vector<GambletLevel> levels;  // [k], k = 1..q; [0] unused
  MultiresSolution solution;
};

/// Algorithm 1 from level q down to level 1 followed by the reconstruction.
ExactResult exact_solve(const CsrMatrix& mass, const CsrMatrix& stiffness,
                        std::span<const double> rhs, const IndexTree& tree,
                        const ExactOptions& opts = {});

/// Reuses the stored levels for a new right-hand side.
MultiresSolution exact_resolve(const std::vector<GambletLevel>& levels,
                               std::span<const double> rhs,
                               const ExactOptions& opts = {});

/// chi^(k) = W^(k) psi^(k), |J^(k)| x N.
Eigen::MatrixXd subband_basis(const GambletLevel& level);

// Dense/sparse mixed products used by both pipelines' reference paths.
Eigen::MatrixXd sparse_times_dense(const CsrMatrix& s, const Eigen::MatrixXd& d);
/// d * s^T
Eigen::MatrixXd dense_times_sparse_transpose(const Eigen::MatrixXd& d, const CsrMatrix& s);
/// d * s
Eigen::MatrixXd dense_times_sparse(const Eigen::MatrixXd& d, const CsrMatrix& s);

}  // namespace gamblet
