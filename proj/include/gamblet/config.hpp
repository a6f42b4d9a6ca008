#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "gamblet/fast.hpp"
#include "gamblet/hierarchy.hpp"

namespace gamblet {

/// Raised for malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CoefficientKind { example1, constant, checkerboard, csv };
enum class LoadKind { example1, constant, csv };
enum class PipelineKind { exact, fast };

/// Fully defaulted run description. Parsed from an INI-style file:
///
///   [problem]  q, coefficient, coefficient_value, contrast, seed,
///              coefficient_file, load, load_value, load_file
///   [solver]   pipeline, w_variant, tol_mass, tol_subband, nodal_init,
///              epsilon, c_rho, radii, tol_multiplier, load_shortcut,
///              drop_tol, jacobi, threads, compare_exact
///   [output]   dir, matrix_market
///   [bases]    level, indices, chi_indices
///   [report]   decay_levels, keep_fractions
struct RunConfig {
  int q = 4;
  CoefficientKind coefficient = CoefficientKind::example1;
  double coefficient_value = 1.0;
  double contrast = 100.0;
  std::uint64_t seed = 1;
  std::string coefficient_file;
  LoadKind load = LoadKind::example1;
  double load_value = 1.0;
  std::string load_file;

  PipelineKind pipeline = PipelineKind::exact;
  WVariant variant = WVariant::chain;
  double tol_mass = 1e-10;
  double tol_subband = 1e-10;
  bool nodal_init = false;
  double epsilon = 1e-4;
  double c_rho = kDefaultCRho;
  std::vector<int> radii;  // level 1..q; empty = formula
  double tol_multiplier = 1.0;
  bool load_shortcut = true;
  double drop_tol = 1e-14;
  bool jacobi = true;
  int threads = 1;
  /// Fast pipeline only: also run the exact pipeline (q <= kMaxExactDepth)
  /// and report the A-norm difference.
  bool compare_exact = true;

  std::string out_dir = "gamblet_out";
  bool matrix_market = false;

  int bases_level = 0;               // 0 = q / 2 rounded up
  std::vector<std::int64_t> bases_indices;  // empty = central aggregate
  std::vector<std::int64_t> chi_indices;    // empty = the three subbands of the central parent

  std::vector<int> decay_levels;     // empty = {2, 3, 4} clipped to q
  std::vector<double> keep_fractions{1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
};

/// Largest depth accepted by the dense exact pipeline.
inline constexpr int kMaxExactDepth = 6;

/// Throws ConfigError with the offending key on any problem. Relative file
/// paths are resolved against the config file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir = {});
/// Checks ranges and cross-key consistency.
void validate(const RunConfig& cfg);

/// Every key with its resolved value, sections and keys in a fixed order.
std::string canonical_text(const RunConfig& cfg);
/// FNV-1a 64 of canonical_text with the keys that cannot change numbers
/// (output directory, thread count) left out; 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::string to_string(CoefficientKind k);
std::string to_string(LoadKind k);
std::string to_string(PipelineKind k);

}  // namespace gamblet
