#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gamblet/exact.hpp"
#include "gamblet/grid_fem.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/krylov.hpp"
#include "gamblet/sparse.hpp"

namespace gamblet {

/// Calibrated against the exact pipeline at q=5 (see tools/calibrate).
inline constexpr double kDefaultCRho = 0.45;
/// Observed ratio (relative A-norm error of the localized solution) / epsilon
/// stays below this factor with the default C_rho; see tools/calibrate.
inline constexpr double kCalibratedKappa = 10.0;

/// Per-level localization radii in units of H_k. rho[k] for k = 1..q.
struct LocalizationSchedule {
  double epsilon = 1e-4;
  double c_rho = kDefaultCRho;
  bool uniform = false;
  std::vector<int> rho;  // [0] unused

  int depth() const { return static_cast<int>(rho.size()) - 1; }
};

/// Smallest radius whose patch covers all of level k.
int covering_radius(int k);

/// rho_k = ceil(C (((1 + 1/ln 2) k ln 2) + ln(1/eps))), clipped to
/// [1, covering_radius(k)]. Throws std::invalid_argument unless
/// 0 < eps < 1, C > 0 and q >= 1.
LocalizationSchedule make_schedule(int q, double epsilon, double c_rho = kDefaultCRho);
/// The same radius on every level (clipped per level).
LocalizationSchedule uniform_schedule(int q, int rho, double epsilon);

/// Relative residual targets for the inner CG solves, shaped after the
/// accuracy conditions of the localized algorithm (H = 1/2, d = 2) and scaled
/// by a common multiplier.
struct InnerTolerances {
  double mass = 1e-10;          // local mass-inverse patches
  std::vector<double> patch;    // [k]: localized B^(i,rho) solves at level k
  double subband = 1e-10;       // global B^(k),loc w = W g
  double coarse = 1e-10;        // A^(1),loc U = g
};

InnerTolerances make_tolerances(int q, double epsilon, double multiplier = 1.0);

struct FastOptions {
  WVariant variant = WVariant::chain;
  double epsilon = 1e-4;
  double c_rho = kDefaultCRho;
  /// When non-empty (size q+1), used instead of the formula.
  std::vector<int> radii;
  double tol_multiplier = 1.0;
  /// g^(q) = nodal values of g instead of Psi^(q),loc b.
  bool load_shortcut = true;
  /// Entries of A^(k-1),loc below drop_tol * max|A^(k-1),loc| are removed.
  double drop_tol = 1e-14;
  /// Also store Psi^(k),loc on the fine grid for every level.
  bool materialize_bases = false;
  /// Jacobi-preconditioned CG for the localized subband patches.
  bool jacobi = true;
  int threads = 1;
};

struct LineStats {
  std::uint64_t flops = 0;
  double seconds = 0.0;
};

struct LevelFootprint {
  int k = 0;
  int rho = 0;
  std::int64_t nnz_stiffness = 0;
  std::int64_t nnz_subband = 0;
  std::int64_t nnz_d = 0;
  std::int64_t nnz_restriction = 0;
  std::int64_t nnz_psi = 0;  // 0 unless stored
};

/// Operation counts keyed by algorithm line ("line3", "line11", ...).
struct ComplexityReport {
  std::map<std::string, LineStats> lines;
  /// CG iterations -> number of solves, per line.
  std::map<std::string, std::map<int, int>> cg_histograms;
  std::vector<LevelFootprint> levels;
  double wall_seconds = 0.0;
  int threads = 1;

  std::uint64_t total_flops() const;
  void record_cg(const std::string& line, const CgReport& r);
  void merge(const ComplexityReport& other);
};

/// Level k of the localized pipeline. Level k >= 2 also stores the transition
/// to level k-1. Psi^(k),loc is implicit: Psi^(k) = R^(k,k+1) ... R^(q-1,q) Psi^(q).
struct LocalGambletLevel {
  int k = 0;
  int rho = 0;
  CsrMatrix stiffness;  // A^(k),loc
  Vector load;          // g^(k),loc
  CsrMatrix psi;        // fine-grid rows; always set at level q

  CsrMatrix w;                 // W^(k)
  CsrMatrix subband_stiffness; // B^(k),loc
  CsrMatrix d;                 // D^(k-1,k),loc, |I^(k-1)| x |J^(k)|
  CsrMatrix restriction;       // R^(k-1,k),loc
};

struct FastResult {
  LocalizationSchedule schedule;
  InnerTolerances tolerances;
  std::vector<LocalGambletLevel> levels;  // [k], k = 1..q
  MultiresSolution solution;
  ComplexityReport report;
};

/// Rows of M^{-1} computed on the patches i^rho (level-q neighborhoods).
/// Throws NumericalError naming the node if a patch solve fails.
CsrMatrix local_mass_inverse(const CsrMatrix& mass, const IndexTree& tree, int rho,
                             double tol, int threads = 1,
                             ComplexityReport* report = nullptr);

/// One pass of the localized downward loop: fills W, B, D, R of `level`
/// and returns level k-1 (without the subband solve).
LocalGambletLevel local_level_step(LocalGambletLevel& level, const IndexTree& tree,
                                   const LocalizationSchedule& schedule,
                                   const InnerTolerances& tol, const FastOptions& opts,
                                   ComplexityReport* report = nullptr);

FastResult fast_solve(const CsrMatrix& mass, const CsrMatrix& stiffness,
                      const LoadVector& load, const IndexTree& tree,
                      const FastOptions& opts = {});

/// Subsequent solve with stored levels: only the load projections, the
/// subband and coarse solves and the reconstruction are recomputed.
MultiresSolution fast_resolve(const FastResult& setup, const LoadVector& load,
                              const FastOptions& opts = {},
                              ComplexityReport* report = nullptr);

/// x = Psi^(k),loc^T c on the fine grid via the restriction chain.
Vector apply_psi_transpose(const std::vector<LocalGambletLevel>& levels, int k,
                           std::span<const double> coefficients, OpCount* ops = nullptr);
/// Psi^(k),loc as fine-grid rows.
CsrMatrix materialize_psi(const std::vector<LocalGambletLevel>& levels, int k);

nlohmann::json to_json(const LocalizationSchedule& s);
nlohmann::json to_json(const InnerTolerances& t);
nlohmann::json to_json(const ComplexityReport& r);

}  // namespace gamblet
