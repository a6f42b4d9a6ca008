#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "gamblet/config.hpp"
#include "gamblet/diagnostics.hpp"
#include "gamblet/exact.hpp"
#include "gamblet/fast.hpp"
#include "gamblet/grid_fem.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/io.hpp"

namespace gamblet {

/// Discretized problem built from a RunConfig.
struct Problem {
  Grid grid;
  IndexTree tree;
  CoefficientField coefficient;
  CsrMatrix mass;
  CsrMatrix stiffness;
  LoadVector load;
};

/// Throws ConfigError for unreadable or mis-sized coefficient/load files.
Problem build_problem(const RunConfig& cfg, bool zero_load = false);

ExactOptions exact_options(const RunConfig& cfg);
FastOptions fast_options(const RunConfig& cfg, int threads);

/// Result of either pipeline behind one interface.
struct Transform {
  PipelineKind kind = PipelineKind::exact;
  std::optional<ExactResult> exact;
  std::optional<FastResult> fast;
  double seconds = 0.0;

  int q() const;
  const MultiresSolution& solution() const;
  const CsrMatrix& w(int k) const;
  /// Psi^(k)^T c on the fine grid.
  Vector psi_transpose(int k, std::span<const double> c) const;
  /// psi_i^(k) on the fine grid.
  Vector psi_row(int k, Index i) const;
  /// chi_j^(k) = sum_l W_jl psi_l^(k) on the fine grid.
  Vector chi_row(int k, Index j) const;
  MultiresView view() const;
  std::vector<ConditioningRow> conditioning(double tol) const;
};

Transform run_transform(const Problem& p, const RunConfig& cfg, int threads);

/// Fine-grid reference u = A^{-1} b by Jacobi-preconditioned CG.
struct Reference {
  Vector u;
  CgReport report;
};
Reference reference_solution(const Problem& p, double rel_tol = 1e-12);

ArtifactMeta make_meta(const RunConfig& cfg, const std::string& producer);

/// Per-directory record of the config hash and the files each command
/// wrote. A directory never mixes artifacts of two configurations.
void check_manifest(const std::filesystem::path& out, const ArtifactMeta& meta);
void record_manifest(const std::filesystem::path& out, const ArtifactMeta& meta,
                     const std::vector<std::string>& files);

/// Each command writes into `out` (created when missing) and returns its
/// summary JSON. Exceptions: ConfigError (bad input), NumericalError.
nlohmann::json cmd_solve(const RunConfig& cfg, const std::filesystem::path& out, int threads);
nlohmann::json cmd_transform(const RunConfig& cfg, const std::filesystem::path& out, int threads);
nlohmann::json cmd_bases(const RunConfig& cfg, const std::filesystem::path& out, int threads);
nlohmann::json cmd_report(const RunConfig& cfg, const std::filesystem::path& out, int threads);

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitUsage = 2, kExitNumerical = 3 };

struct CommandArgs {
  std::string command;  // solve | transform | bases | report
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides [output] dir
  std::optional<int> threads;                // overrides [solver] threads
};

/// Loads the config, applies overrides, runs the command and maps failures
/// to exit codes. Diagnostics go to `err`.
int run_command(const CommandArgs& args, std::ostream& err);

}  // namespace gamblet
