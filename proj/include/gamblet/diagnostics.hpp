#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gamblet/exact.hpp"
#include "gamblet/fast.hpp"
#include "gamblet/grid_fem.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/io.hpp"

namespace gamblet {

/// Pipeline-independent access to a computed hierarchy: mapping subband and
/// coarse coefficients to the fine grid, plus the energy norms used to
/// normalize coefficients. Holds references into the result it was built
/// from.
struct MultiresView {
  int q = 0;
  /// Psi^(k)^T W^(k)^T w on the fine grid.
  std::function<Vector(int, std::span<const double>)> subband_to_fine;
  /// Psi^(1)^T U on the fine grid.
  std::function<Vector(std::span<const double>)> coarse_to_fine;
  std::vector<Vector> subband_norms;  // [k]: ||chi_j^(k)||_a = sqrt(B_jj)
  Vector coarse_norms;                // ||psi_i^(1)||_a = sqrt(A^(1)_ii)
};

MultiresView make_view(const ExactResult& r);
MultiresView make_view(const FastResult& r);

/// Level-k aggregate touching the domain center (upper-right of the four).
Index central_index(const IndexTree& tree, int k);

struct DecayProfile {
  int k = 0;
  Index index = 0;
  double cx = 0.0, cy = 0.0;
  std::vector<double> radii;
  std::vector<double> fractions;  // energy share of cells with center at distance >= r
  double slope = 0.0;             // least-squares d ln(fraction) / dr
  double intercept = 0.0;

  /// Linear interpolation of the profile at radius r.
  double fraction_at(double r) const;
};

/// Radii default to multiples of H_k / 2 up to the domain diagonal. The fit
/// uses the points with r > 0 and fraction above 1e-13.
DecayProfile decay_profile(const Grid& grid, const CoefficientField& a, const IndexTree& tree,
                           int k, Index i, std::span<const double> psi_row,
                           std::vector<double> radii = {});

struct ConditioningRow {
  int k = 0;
  std::string matrix;  // "A" (k = 1), "B" (k >= 2) or "WWt"
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double cond = 0.0;
};

std::vector<ConditioningRow> conditioning_table(const ExactResult& r, double tol = 1e-8);
std::vector<ConditioningRow> conditioning_table(const FastResult& r, double tol = 1e-8);

struct CoefficientSpectrum {
  std::vector<Vector> per_level;  // [k], |normalized coefficient| sorted descending
  Vector global;                  // all levels, sorted descending
};

CoefficientSpectrum coefficient_spectrum(const MultiresSolution& sol, const MultiresView& view);

struct Compression {
  double keep_fraction = 1.0;
  std::size_t kept = 0;
  std::size_t total = 0;
  double relative_error = 0.0;  // ||u - u_c||_A / ||u||_A
  Vector u;
};

/// Keeps the ceil(keep_fraction * total) largest normalized coefficients
/// (ties broken by level, then index), rebuilds u and measures the error.
Compression compress(const MultiresSolution& sol, const MultiresView& view,
                     const CsrMatrix& stiffness, double keep_fraction);

struct ConvergenceRow {
  int k = 0;
  double error = 0.0;           // ||u_ref - u^(k)||_A
  double relative_error = 0.0;  // error / ||u_ref||_A
  double bound = 0.0;           // 2 / (pi sqrt(lambda_min(a))) 2^-k ||g||_L2
  double ratio = 0.0;           // error / bound
};

std::vector<ConvergenceRow> convergence_table(const MultiresSolution& sol,
                                              const CsrMatrix& stiffness,
                                              std::span<const double> u_ref,
                                              double lambda_min_a, double g_l2);

/// Cross-level energy inner products of the increments u^(k) - u^(k-1).
struct OrthogonalityCheck {
  double max_relative_cross = 0.0;  // max |<d_k, d_l>_A| / (||d_k||_A ||d_l||_A), k != l
  double increment_energy_sum = 0.0;
  double solution_energy = 0.0;     // ||u||_A^2
};

OrthogonalityCheck increment_orthogonality(const MultiresSolution& sol, const CsrMatrix& stiffness);

Table to_table(const DecayProfile& p);
Table to_table(const std::vector<ConditioningRow>& rows);
Table to_table(const CoefficientSpectrum& s);
Table to_table(const std::vector<Compression>& rows);
Table to_table(const std::vector<ConvergenceRow>& rows);

}  // namespace gamblet
