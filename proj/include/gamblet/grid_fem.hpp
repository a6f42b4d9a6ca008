#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gamblet/sparse.hpp"

namespace gamblet {

/// Uniform square grid on the unit square with n = 2^q interior nodes per
/// dimension and (n+1)^2 cells. Nodes are numbered x + n*y with x, y in
/// [0, n); node (x, y) sits at ((x+1)h, (y+1)h). Cells are numbered
/// cx + (n+1)*cy and cell (cx, cy) covers [cx h, (cx+1) h] x [cy h, (cy+1) h].
struct Grid {
  int q = 0;
  Index n = 0;
  double h = 0.0;

  Index num_nodes() const { return n * n; }
  Index cells_per_dim() const { return n + 1; }
  Index num_cells() const { return (n + 1) * (n + 1); }
  Index node(Index x, Index y) const { return x + n * y; }
  double node_x(Index node_id) const { return static_cast<double>(node_id % n + 1) * h; }
  double node_y(Index node_id) const { return static_cast<double>(node_id / n + 1) * h; }
};

inline constexpr int kMaxGridDepth = 12;

/// Throws std::invalid_argument unless 1 <= q <= max_q.
Grid build_grid(int q, int max_q = kMaxGridDepth);

/// Piecewise-constant scalar conductivity, one value per fine cell.
struct CoefficientField {
  Index cells_per_dim = 0;
  std::vector<double> values;

  double lambda_min() const;
  double lambda_max() const;
  double contrast() const { return lambda_max() / lambda_min(); }
};

/// Product-of-trigonometric-factors medium with six octaves, evaluated at
/// each cell's lower-left corner.
CoefficientField coefficient_example1(const Grid& grid);
CoefficientField coefficient_constant(const Grid& grid, double value);
/// Independent log-uniform cell values in [1, contrast] from a seeded
/// mt19937_64 stream; bit-identical for identical arguments.
CoefficientField coefficient_checkerboard(const Grid& grid, double contrast,
                                          std::uint64_t seed);
/// Validates dimensions and positivity of a user-supplied field.
CoefficientField coefficient_from_values(const Grid& grid, std::vector<double> values);

/// Q1 mass matrix M_ij = \int phi_i phi_j over interior nodes.
CsrMatrix assemble_mass(const Grid& grid);
/// Q1 stiffness matrix A_ij = \int grad phi_i . a grad phi_j with the
/// Dirichlet boundary nodes eliminated.
CsrMatrix assemble_stiffness(const Grid& grid, const CoefficientField& a);

struct LoadVector {
  Vector nodal;  // g_i, the nodal expansion of g
  Vector rhs;    // b = M g
};

LoadVector assemble_load(const Grid& grid, const CsrMatrix& mass,
                         std::span<const double> nodal);
/// g_i = cos(3 x + y) + sin(3 y) + sin(7 x - 5 y) at the interior nodes.
Vector load_example1(const Grid& grid);

/// sqrt(x^T A x). Throws NumericalError when the quadratic form is
/// negative beyond roundoff.
double energy_norm(const CsrMatrix& a, std::span<const double> x);
double energy_inner(const CsrMatrix& a, std::span<const double> x,
                    std::span<const double> y);

/// Per-cell energy a_c v_c^T K v_c of a fine-grid function given by nodal
/// coefficients; sums to x^T A x.
Vector cell_energies(const Grid& grid, const CoefficientField& a,
                     std::span<const double> nodal);

/// Squared L2 norm \int (sum y_i phi_i)^2 = y^T M y.
double l2_norm_squared(const CsrMatrix& mass, std::span<const double> nodal);

}  // namespace gamblet
