#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gamblet/grid_fem.hpp"
#include "gamblet/sparse.hpp"

namespace gamblet {

/// Provenance attached to every artifact.
struct ArtifactMeta {
  std::string config_hash;
  std::string producer;  // e.g. "solve", "report"
  /// Canonical configuration text, echoed line by line into every artifact.
  std::string config_text;
};

/// Column table written as CSV with a leading "# key=value" comment block.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table_csv(const std::filesystem::path& path, const Table& t, const ArtifactMeta& meta);
Table read_table_csv(const std::filesystem::path& path);

/// Nodal field as an n x n CSV grid; row 0 is y = h (bottom row).
void write_grid_csv(const std::filesystem::path& path, const Grid& grid,
                    std::span<const double> nodal, const ArtifactMeta& meta);
/// Reads a whitespace/comma separated list of numbers, ignoring '#' lines.
std::vector<double> read_values(const std::filesystem::path& path);

/// 8-bit binary PGM of a nodal field, linearly mapped from [min, max];
/// the top image row is the largest y.
void write_pgm(const std::filesystem::path& path, const Grid& grid,
               std::span<const double> nodal, const ArtifactMeta& meta);
/// Cell field (e.g. the coefficient) as an (n+1) x (n+1) PGM, log10-scaled
/// when `log_scale` is set.
void write_cell_pgm(const std::filesystem::path& path, const Grid& grid,
                    std::span<const double> cells, bool log_scale, const ArtifactMeta& meta);
/// Cell field as an (n+1) x (n+1) CSV, one line per cell row (bottom first).
void write_cell_csv(const std::filesystem::path& path, const Grid& grid,
                    std::span<const double> cells, const ArtifactMeta& meta);

void write_json(const std::filesystem::path& path, nlohmann::json j, const ArtifactMeta& meta);

/// Matrix Market with a "% config_hash=" comment line.
void write_matrix_market_meta(const std::filesystem::path& path, const CsrMatrix& a,
                              bool symmetric, const ArtifactMeta& meta);

/// File name with the config hash appended before the extension.
std::string tagged(const std::string& stem, const std::string& ext, const ArtifactMeta& meta);

}  // namespace gamblet
