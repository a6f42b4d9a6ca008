#include "gamblet/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>

#include "gamblet/matrix_market.hpp"

namespace gamblet {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_meta_comment(std::ostream& out, const ArtifactMeta& meta, const char* prefix) {
  out << prefix << "config_hash=" << meta.config_hash << '\n';
  out << prefix << "producer=" << meta.producer << '\n';
  std::istringstream lines(meta.config_text);
  for (std::string line; std::getline(lines, line);) out << prefix << "config: " << line << '\n';
}

void write_raster(std::ostream& out, Index side, const std::vector<double>& rows_top_first,
                  const ArtifactMeta& meta, double lo, double hi, const char* scale) {
  out << "P5\n";
  write_meta_comment(out, meta, "# ");
  out << "# range " << std::setprecision(17) << lo << " " << hi << " " << scale << '\n';
  out << side << ' ' << side << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (double v : rows_top_first) {
    const double t = std::clamp((v - lo) / span, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
}

}  // namespace

std::string tagged(const std::string& stem, const std::string& ext, const ArtifactMeta& meta) {
  return stem + "_" + meta.config_hash + ext;
}

void write_table_csv(const std::filesystem::path& path, const Table& t, const ArtifactMeta& meta) {
  auto out = open_out(path);
  write_meta_comment(out, meta, "# ");
  out << "# table=" << t.name << '\n';
  out << boost::join(t.columns, ",") << '\n';
  out << std::setprecision(17);
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) {
      throw std::invalid_argument("write_table_csv: row width does not match the header");
    }
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
}

Table read_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Table t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (boost::starts_with(line, "# table=")) t.name = line.substr(8);
      continue;
    }
    std::vector<std::string> parts;
    boost::split(parts, line, boost::is_any_of(","));
    if (!header) {
      t.columns = parts;
      header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& p : parts) row.push_back(std::stod(p));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_grid_csv(const std::filesystem::path& path, const Grid& grid,
                    std::span<const double> nodal, const ArtifactMeta& meta) {
  if (nodal.size() != static_cast<std::size_t>(grid.num_nodes())) {
    throw std::invalid_argument("write_grid_csv: field size does not match the grid");
  }
  auto out = open_out(path);
  write_meta_comment(out, meta, "# ");
  out << "# grid n=" << grid.n << " h=" << std::setprecision(17) << grid.h << '\n';
  for (Index y = 0; y < grid.n; ++y) {
    for (Index x = 0; x < grid.n; ++x) out << (x ? "," : "") << nodal[grid.node(x, y)];
    out << '\n';
  }
}

std::vector<double> read_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    boost::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> parts;
    boost::split(parts, line, boost::is_any_of(", \t"), boost::token_compress_on);
    for (const auto& p : parts) {
      if (p.empty()) continue;
      std::size_t used = 0;
      const double x = std::stod(p, &used);
      if (used != p.size()) throw std::runtime_error("malformed number '" + p + "' in " + path.string());
      v.push_back(x);
    }
  }
  return v;
}

void write_pgm(const std::filesystem::path& path, const Grid& grid,
               std::span<const double> nodal, const ArtifactMeta& meta) {
  if (nodal.size() != static_cast<std::size_t>(grid.num_nodes())) {
    throw std::invalid_argument("write_pgm: field size does not match the grid");
  }
  std::vector<double> rows;
  rows.reserve(nodal.size());
  for (Index y = grid.n - 1; y >= 0; --y) {
    for (Index x = 0; x < grid.n; ++x) rows.push_back(nodal[grid.node(x, y)]);
  }
  const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end());
  auto out = open_out(path, true);
  write_raster(out, grid.n, rows, meta, *lo, *hi, "linear");
}

void write_cell_pgm(const std::filesystem::path& path, const Grid& grid,
                    std::span<const double> cells, bool log_scale, const ArtifactMeta& meta) {
  const Index m = grid.cells_per_dim();
  if (cells.size() != static_cast<std::size_t>(m * m)) {
    throw std::invalid_argument("write_cell_pgm: field size does not match the grid");
  }
  std::vector<double> rows;
  rows.reserve(cells.size());
  for (Index cy = m - 1; cy >= 0; --cy) {
    for (Index cx = 0; cx < m; ++cx) {
      const double v = cells[cx + m * cy];
      if (log_scale && !(v > 0.0)) {
        throw std::invalid_argument("write_cell_pgm: log scale needs positive values");
      }
      rows.push_back(log_scale ? std::log10(v) : v);
    }
  }
  const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end());
  auto out = open_out(path, true);
  write_raster(out, m, rows, meta, *lo, *hi, log_scale ? "log10" : "linear");
}

void write_cell_csv(const std::filesystem::path& path, const Grid& grid,
                    std::span<const double> cells, const ArtifactMeta& meta) {
  const Index m = grid.cells_per_dim();
  if (cells.size() != static_cast<std::size_t>(m * m)) {
    throw std::invalid_argument("write_cell_csv: field size does not match the grid");
  }
  auto out = open_out(path);
  write_meta_comment(out, meta, "# ");
  out << std::setprecision(17);
  for (Index cy = 0; cy < m; ++cy) {
    for (Index cx = 0; cx < m; ++cx) out << (cx ? "," : "") << cells[cx + m * cy];
    out << '\n';
  }
}

void write_json(const std::filesystem::path& path, nlohmann::json j, const ArtifactMeta& meta) {
  j["config_hash"] = meta.config_hash;
  j["producer"] = meta.producer;
  j["config"] = meta.config_text;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_matrix_market_meta(const std::filesystem::path& path, const CsrMatrix& a,
                              bool symmetric, const ArtifactMeta& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_matrix_market(path, a, symmetric ? MarketSymmetry::symmetric : MarketSymmetry::general,
                      "config_hash=" + meta.config_hash + "\nproducer=" + meta.producer +
                          (meta.config_text.empty() ? "" : "\nconfig:\n" + meta.config_text));
}

}  // namespace gamblet
