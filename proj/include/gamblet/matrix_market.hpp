#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gamblet/sparse.hpp"

namespace gamblet {

enum class MarketSymmetry { general, symmetric };

/// Writes `%%MatrixMarket matrix coordinate real <symmetry>`. In symmetric
/// mode only the lower triangle is written; the matrix must be symmetric.
/// Each line of `comment` becomes a '%' line after the banner.
void write_matrix_market(std::ostream& out, const CsrMatrix& a,
                         MarketSymmetry symmetry = MarketSymmetry::general,
                         const std::string& comment = {});
void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& a,
                         MarketSymmetry symmetry = MarketSymmetry::general,
                         const std::string& comment = {});

/// Reads coordinate real general or symmetric files. Throws
/// std::runtime_error on malformed input.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::filesystem::path& path);

}  // namespace gamblet
