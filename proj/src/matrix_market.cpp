#include "gamblet/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gamblet {

void write_matrix_market(std::ostream& out, const CsrMatrix& a,
                         MarketSymmetry symmetry, const std::string& comment) {
  const bool sym = symmetry == MarketSymmetry::symmetric;
  if (sym && a.rows() != a.cols()) {
    throw std::invalid_argument("write_matrix_market: symmetric mode needs a square matrix");
  }
  std::int64_t count = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j : a.row_indices(i)) {
      if (!sym || j <= i) ++count;
    }
  }
  out << "%%MatrixMarket matrix coordinate real "
      << (sym ? "symmetric" : "general") << '\n';
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << '%' << line << '\n';
  }
  out << a.rows() << ' ' << a.cols() << ' ' << count << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_indices(i);
    const auto vals = a.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (sym && cols[p] > i) continue;
      out << i + 1 << ' ' << cols[p] + 1 << ' ' << vals[p] << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a,
                         MarketSymmetry symmetry, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_matrix_market(out, a, symmetry, comment);
}

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("matrix market: empty input");
  }
  std::string lower = line;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::istringstream banner(lower);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
    throw std::runtime_error("matrix market: only coordinate matrices are supported");
  }
  if (field != "real" && field != "double" && field != "integer") {
    throw std::runtime_error("matrix market: unsupported field '" + field + "'");
  }
  const bool sym = symmetry == "symmetric";
  if (!sym && symmetry != "general") {
    throw std::runtime_error("matrix market: unsupported symmetry '" + symmetry + "'");
  }
  do {
    if (!std::getline(in, line)) throw std::runtime_error("matrix market: missing size line");
  } while (line.empty() || line[0] == '%');
  std::istringstream size_line(line);
  long long rows = 0, cols = 0, entries = 0;
  if (!(size_line >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0) {
    throw std::runtime_error("matrix market: malformed size line");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(sym ? 2 * entries : entries));
  for (long long e = 0; e < entries; ++e) {
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw std::runtime_error("matrix market: truncated entries");
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw std::runtime_error("matrix market: entry out of range");
    }
    triplets.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    if (sym && i != j) {
      triplets.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), v});
    }
  }
  return CsrMatrix::from_triplets(static_cast<Index>(rows), static_cast<Index>(cols),
                                  std::move(triplets));
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_matrix_market(in);
}

}  // namespace gamblet
