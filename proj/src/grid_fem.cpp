#include "gamblet/grid_fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "gamblet/errors.hpp"

namespace gamblet {

namespace {

// Local corner order: (0,0), (1,0), (0,1), (1,1).
constexpr std::array<std::array<double, 4>, 4> kLaplaceElement{{
    {2.0 / 3.0, -1.0 / 6.0, -1.0 / 6.0, -1.0 / 3.0},
    {-1.0 / 6.0, 2.0 / 3.0, -1.0 / 3.0, -1.0 / 6.0},
    {-1.0 / 6.0, -1.0 / 3.0, 2.0 / 3.0, -1.0 / 6.0},
    {-1.0 / 3.0, -1.0 / 6.0, -1.0 / 6.0, 2.0 / 3.0},
}};

// Multiplied by h^2 / 36.
constexpr std::array<std::array<double, 4>, 4> kMassElement{{
    {4.0, 2.0, 2.0, 1.0},
    {2.0, 4.0, 1.0, 2.0},
    {2.0, 1.0, 4.0, 2.0},
    {1.0, 2.0, 2.0, 4.0},
}};

// Interior node id of grid point (X, Y), X, Y in [0, n+1], or -1 on the boundary.
Index corner_node(const Grid& g, Index gx, Index gy) {
  if (gx < 1 || gx > g.n || gy < 1 || gy > g.n) return -1;
  return g.node(gx - 1, gy - 1);
}

std::array<Index, 4> cell_corners(const Grid& g, Index cx, Index cy) {
  return {corner_node(g, cx, cy), corner_node(g, cx + 1, cy),
          corner_node(g, cx, cy + 1), corner_node(g, cx + 1, cy + 1)};
}

template <class ElementScale>
CsrMatrix assemble(const Grid& g,
                   const std::array<std::array<double, 4>, 4>& element,
                   ElementScale scale) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(g.num_cells()) * 16);
  for (Index cy = 0; cy <= g.n; ++cy) {
    for (Index cx = 0; cx <= g.n; ++cx) {
      const auto corners = cell_corners(g, cx, cy);
      const double s = scale(cx, cy);
      for (int r = 0; r < 4; ++r) {
        if (corners[r] < 0) continue;
        for (int c = 0; c < 4; ++c) {
          if (corners[c] < 0) continue;
          triplets.push_back({corners[r], corners[c], s * element[r][c]});
        }
      }
    }
  }
  return CsrMatrix::from_triplets(g.num_nodes(), g.num_nodes(), std::move(triplets));
}

}  // namespace

Grid build_grid(int q, int max_q) {
  if (q < 1 || q > max_q) {
    throw std::invalid_argument("build_grid: depth q=" + std::to_string(q) +
                                " outside [1, " + std::to_string(max_q) + "]");
  }
  Grid g;
  g.q = q;
  g.n = Index{1} << q;
  g.h = 1.0 / static_cast<double>(g.n + 1);
  return g;
}

double CoefficientField::lambda_min() const {
  return *std::min_element(values.begin(), values.end());
}

double CoefficientField::lambda_max() const {
  return *std::max_element(values.begin(), values.end());
}

CoefficientField coefficient_example1(const Grid& grid) {
  CoefficientField a;
  a.cells_per_dim = grid.cells_per_dim();
  a.values.resize(static_cast<std::size_t>(grid.num_cells()));
  const double denom = static_cast<double>((Index{1} << grid.q) + 1);
  for (Index j = 0; j <= grid.n; ++j) {
    for (Index i = 0; i <= grid.n; ++i) {
      const double xi = static_cast<double>(i) / denom;
      const double xj = static_cast<double>(j) / denom;
      double v = 1.0;
      for (int k = 1; k <= 6; ++k) {
        const double freq = std::ldexp(std::numbers::pi, k);
        v *= (1.0 + 0.5 * std::cos(freq * (xi + xj))) *
             (1.0 + 0.5 * std::sin(freq * (xj - 3.0 * xi)));
      }
      a.values[static_cast<std::size_t>(i + a.cells_per_dim * j)] = v;
    }
  }
  return a;
}

CoefficientField coefficient_constant(const Grid& grid, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("coefficient_constant: value must be positive");
  }
  return {grid.cells_per_dim(),
          std::vector<double>(static_cast<std::size_t>(grid.num_cells()), value)};
}

CoefficientField coefficient_checkerboard(const Grid& grid, double contrast,
                                          std::uint64_t seed) {
  if (!(contrast >= 1.0) || !std::isfinite(contrast)) {
    throw std::invalid_argument("coefficient_checkerboard: contrast must be >= 1");
  }
  std::mt19937_64 rng(seed);
  const double log_c = std::log(contrast);
  CoefficientField a{grid.cells_per_dim(), {}};
  a.values.resize(static_cast<std::size_t>(grid.num_cells()));
  for (double& v : a.values) {
    // 53 random bits -> [0, 1); avoids implementation-defined distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = std::exp(u * log_c);
  }
  return a;
}

CoefficientField coefficient_from_values(const Grid& grid, std::vector<double> values) {
  if (values.size() != static_cast<std::size_t>(grid.num_cells())) {
    throw std::invalid_argument("coefficient field: expected " +
                                std::to_string(grid.num_cells()) + " cell values, got " +
                                std::to_string(values.size()));
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("coefficient field: values must be positive and finite");
    }
  }
  return {grid.cells_per_dim(), std::move(values)};
}

CsrMatrix assemble_mass(const Grid& grid) {
  const double s = grid.h * grid.h / 36.0;
  return assemble(grid, kMassElement, [s](Index, Index) { return s; });
}

CsrMatrix assemble_stiffness(const Grid& grid, const CoefficientField& a) {
  if (a.cells_per_dim != grid.cells_per_dim() ||
      a.values.size() != static_cast<std::size_t>(grid.num_cells())) {
    throw std::invalid_argument("assemble_stiffness: coefficient field does not match grid");
  }
  const Index m = a.cells_per_dim;
  return assemble(grid, kLaplaceElement, [&](Index cx, Index cy) {
    return a.values[static_cast<std::size_t>(cx + m * cy)];
  });
}

LoadVector assemble_load(const Grid& grid, const CsrMatrix& mass,
                         std::span<const double> nodal) {
  if (nodal.size() != static_cast<std::size_t>(grid.num_nodes()) ||
      mass.rows() != grid.num_nodes()) {
    throw std::invalid_argument("assemble_load: expected one value per interior node");
  }
  LoadVector load;
  load.nodal.assign(nodal.begin(), nodal.end());
  load.rhs = spmv(mass, nodal);
  return load;
}

Vector load_example1(const Grid& grid) {
  Vector g(static_cast<std::size_t>(grid.num_nodes()));
  for (Index i = 0; i < grid.num_nodes(); ++i) {
    const double x = grid.node_x(i);
    const double y = grid.node_y(i);
    g[i] = std::cos(3.0 * x + y) + std::sin(3.0 * y) + std::sin(7.0 * x - 5.0 * y);
  }
  return g;
}

double energy_inner(const CsrMatrix& a, std::span<const double> x,
                    std::span<const double> y) {
  if (x.size() != static_cast<std::size_t>(a.cols()) ||
      y.size() != static_cast<std::size_t>(a.rows())) {
    throw std::invalid_argument("energy_inner: dimension mismatch");
  }
  return dot(y, spmv(a, x));
}

double energy_norm(const CsrMatrix& a, std::span<const double> x) {
  const double e = energy_inner(a, x, x);
  if (e < 0.0) {
    const double scale = max_abs(a) * dot(x, x) * static_cast<double>(a.rows());
    if (e < -1e-13 * scale) {
      throw NumericalError("energy_norm", "negative quadratic form; operator not SPD");
    }
    return 0.0;
  }
  return std::sqrt(e);
}

Vector cell_energies(const Grid& grid, const CoefficientField& a,
                     std::span<const double> nodal) {
  if (nodal.size() != static_cast<std::size_t>(grid.num_nodes())) {
    throw std::invalid_argument("cell_energies: expected one value per interior node");
  }
  Vector e(static_cast<std::size_t>(grid.num_cells()), 0.0);
  const Index m = grid.cells_per_dim();
  for (Index cy = 0; cy <= grid.n; ++cy) {
    for (Index cx = 0; cx <= grid.n; ++cx) {
      const auto corners = cell_corners(grid, cx, cy);
      std::array<double, 4> v{};
      for (int r = 0; r < 4; ++r) v[r] = corners[r] < 0 ? 0.0 : nodal[corners[r]];
      double s = 0.0;
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) s += v[r] * kLaplaceElement[r][c] * v[c];
      }
      e[static_cast<std::size_t>(cx + m * cy)] = a.values[static_cast<std::size_t>(cx + m * cy)] * s;
    }
  }
  return e;
}

double l2_norm_squared(const CsrMatrix& mass, std::span<const double> nodal) {
  return dot(nodal, spmv(mass, nodal));
}

}  // namespace gamblet
