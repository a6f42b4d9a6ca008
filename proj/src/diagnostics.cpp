#include "gamblet/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace gamblet {

namespace {

Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Vector to_vector(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

Vector sqrt_diagonal(const Eigen::MatrixXd& m) {
  Vector d(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) d[i] = std::sqrt(std::max(0.0, m(i, i)));
  return d;
}

Vector sqrt_diagonal(const CsrMatrix& m) {
  Vector d(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) d[i] = std::sqrt(std::max(0.0, m.at(i, i)));
  return d;
}

ConditioningRow make_row(int k, std::string name, const EigExtremes& e) {
  return {k, std::move(name), e.lambda_min, e.lambda_max, e.cond()};
}

}  // namespace

MultiresView make_view(const ExactResult& r) {
  MultiresView v;
  v.q = static_cast<int>(r.levels.size()) - 1;
  const auto* levels = &r.levels;
  v.subband_to_fine = [levels](int k, std::span<const double> w) {
    const GambletLevel& lv = (*levels)[k];
    const Vector coeffs = spmv_transpose(lv.w, w);
    return to_vector(lv.psi.transpose() * as_eigen(coeffs));
  };
  v.coarse_to_fine = [levels](std::span<const double> c) {
    return to_vector((*levels)[1].psi.transpose() * as_eigen(c));
  };
  v.subband_norms.resize(static_cast<std::size_t>(v.q) + 1);
  for (int k = 2; k <= v.q; ++k) v.subband_norms[k] = sqrt_diagonal(r.levels[k].subband_stiffness);
  v.coarse_norms = sqrt_diagonal(r.levels[1].stiffness);
  return v;
}

MultiresView make_view(const FastResult& r) {
  MultiresView v;
  v.q = static_cast<int>(r.levels.size()) - 1;
  const auto* levels = &r.levels;
  v.subband_to_fine = [levels](int k, std::span<const double> w) {
    return apply_psi_transpose(*levels, k, spmv_transpose((*levels)[k].w, w));
  };
  v.coarse_to_fine = [levels](std::span<const double> c) {
    return apply_psi_transpose(*levels, 1, c);
  };
  v.subband_norms.resize(static_cast<std::size_t>(v.q) + 1);
  for (int k = 2; k <= v.q; ++k) v.subband_norms[k] = sqrt_diagonal(r.levels[k].subband_stiffness);
  v.coarse_norms = sqrt_diagonal(r.levels[1].stiffness);
  return v;
}

Index central_index(const IndexTree& tree, int k) {
  const Index half = tree.side(k) / 2;
  return half + tree.side(k) * half;
}

double DecayProfile::fraction_at(double r) const {
  if (radii.empty()) return 0.0;
  if (r <= radii.front()) return fractions.front();
  for (std::size_t j = 1; j < radii.size(); ++j) {
    if (r <= radii[j]) {
      const double t = (r - radii[j - 1]) / (radii[j] - radii[j - 1]);
      return fractions[j - 1] + t * (fractions[j] - fractions[j - 1]);
    }
  }
  return fractions.back();
}

DecayProfile decay_profile(const Grid& grid, const CoefficientField& a, const IndexTree& tree,
                           int k, Index i, std::span<const double> psi_row,
                           std::vector<double> radii) {
  if (k < 1 || k > tree.depth() || i < 0 || i >= tree.size(k)) {
    throw std::invalid_argument("decay_profile: aggregate out of range");
  }
  DecayProfile p;
  p.k = k;
  p.index = i;
  std::tie(p.cx, p.cy) = tree.center(k, i, grid.h);
  if (radii.empty()) {
    const double step = 0.5 * tree.resolution(k);
    for (double r = 0.0; r <= std::sqrt(2.0) + step; r += step) radii.push_back(r);
  }
  p.radii = std::move(radii);

  const Vector energy = cell_energies(grid, a, psi_row);
  const double total = std::accumulate(energy.begin(), energy.end(), 0.0);
  // Cells sorted by distance of their centers, then a running tail sum.
  const Index m = grid.cells_per_dim();
  std::vector<std::pair<double, double>> cells;
  cells.reserve(energy.size());
  for (Index cy = 0; cy < m; ++cy) {
    for (Index cx = 0; cx < m; ++cx) {
      const double dx = (cx + 0.5) * grid.h - p.cx;
      const double dy = (cy + 0.5) * grid.h - p.cy;
      cells.emplace_back(std::hypot(dx, dy), energy[cx + m * cy]);
    }
  }
  std::sort(cells.begin(), cells.end());
  Vector tail(cells.size() + 1, 0.0);
  for (std::size_t c = cells.size(); c-- > 0;) tail[c] = tail[c + 1] + cells[c].second;

  for (double r : p.radii) {
    const auto first = std::lower_bound(cells.begin(), cells.end(), std::make_pair(r, -1e300));
    const double outside = tail[static_cast<std::size_t>(first - cells.begin())];
    p.fractions.push_back(total > 0.0 ? std::max(0.0, outside) / total : 0.0);
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t j = 0; j < p.radii.size(); ++j) {
    if (p.radii[j] <= 0.0) continue;
    if (!(p.fractions[j] > 1e-13)) break;
    const double y = std::log(p.fractions[j]);
    sx += p.radii[j];
    sy += y;
    sxx += p.radii[j] * p.radii[j];
    sxy += p.radii[j] * y;
    ++n;
  }
  if (n >= 2) {
    const double den = n * sxx - sx * sx;
    p.slope = (n * sxy - sx * sy) / den;
    p.intercept = (sy - p.slope * sx) / n;
  }
  return p;
}

std::vector<ConditioningRow> conditioning_table(const ExactResult& r, double tol) {
  std::vector<ConditioningRow> rows;
  const int q = static_cast<int>(r.levels.size()) - 1;
  rows.push_back(make_row(1, "A", eig_extremes(r.levels[1].stiffness, tol)));
  for (int k = 2; k <= q; ++k) {
    rows.push_back(make_row(k, "B", eig_extremes(r.levels[k].subband_stiffness, tol)));
  }
  for (int k = 2; k <= q; ++k) {
    const CsrMatrix& w = r.levels[k].w;
    rows.push_back(make_row(k, "WWt", eig_extremes(matmul(w, transpose(w)), tol)));
  }
  return rows;
}

std::vector<ConditioningRow> conditioning_table(const FastResult& r, double tol) {
  std::vector<ConditioningRow> rows;
  const int q = static_cast<int>(r.levels.size()) - 1;
  rows.push_back(make_row(1, "A", eig_extremes(r.levels[1].stiffness, tol)));
  for (int k = 2; k <= q; ++k) {
    rows.push_back(make_row(k, "B", eig_extremes(r.levels[k].subband_stiffness, tol)));
  }
  for (int k = 2; k <= q; ++k) {
    const CsrMatrix& w = r.levels[k].w;
    rows.push_back(make_row(k, "WWt", eig_extremes(matmul(w, transpose(w)), tol)));
  }
  return rows;
}

namespace {

struct Coef {
  double magnitude;
  int level;
  Index index;
};

std::vector<Coef> normalized_coefficients(const MultiresSolution& sol, const MultiresView& view) {
  std::vector<Coef> all;
  for (std::size_t i = 0; i < sol.coarse.size(); ++i) {
    all.push_back({std::abs(sol.coarse[i]) * view.coarse_norms[i], 1, static_cast<Index>(i)});
  }
  for (int k = 2; k <= sol.q; ++k) {
    const Vector& w = sol.subband[k];
    for (std::size_t j = 0; j < w.size(); ++j) {
      all.push_back({std::abs(w[j]) * view.subband_norms[k][j], k, static_cast<Index>(j)});
    }
  }
  return all;
}

}  // namespace

CoefficientSpectrum coefficient_spectrum(const MultiresSolution& sol, const MultiresView& view) {
  CoefficientSpectrum s;
  s.per_level.resize(static_cast<std::size_t>(sol.q) + 1);
  for (const Coef& c : normalized_coefficients(sol, view)) {
    s.per_level[c.level].push_back(c.magnitude);
    s.global.push_back(c.magnitude);
  }
  for (auto& v : s.per_level) std::sort(v.begin(), v.end(), std::greater<>());
  std::sort(s.global.begin(), s.global.end(), std::greater<>());
  return s;
}

Compression compress(const MultiresSolution& sol, const MultiresView& view,
                     const CsrMatrix& stiffness, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("compress: keep_fraction must lie in (0, 1]");
  }
  std::vector<Coef> all = normalized_coefficients(sol, view);
  std::sort(all.begin(), all.end(), [](const Coef& a, const Coef& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    if (a.level != b.level) return a.level < b.level;
    return a.index < b.index;
  });
  Compression out;
  out.keep_fraction = keep_fraction;
  out.total = all.size();
  out.kept = std::min(out.total, static_cast<std::size_t>(
                                     std::ceil(keep_fraction * static_cast<double>(out.total) - 1e-9)));

  Vector coarse(sol.coarse.size(), 0.0);
  std::vector<Vector> subband(static_cast<std::size_t>(sol.q) + 1);
  for (int k = 2; k <= sol.q; ++k) subband[k].assign(sol.subband[k].size(), 0.0);
  for (std::size_t t = 0; t < out.kept; ++t) {
    const Coef& c = all[t];
    if (c.level == 1) coarse[c.index] = sol.coarse[c.index];
    else subband[c.level][c.index] = sol.subband[c.level][c.index];
  }
  out.u = view.coarse_to_fine(coarse);
  for (int k = 2; k <= sol.q; ++k) axpy(1.0, view.subband_to_fine(k, subband[k]), out.u);

  Vector diff = sol.u;
  axpy(-1.0, out.u, diff);
  const double un = energy_norm(stiffness, sol.u);
  out.relative_error = un > 0.0 ? energy_norm(stiffness, diff) / un : energy_norm(stiffness, diff);
  return out;
}

std::vector<ConvergenceRow> convergence_table(const MultiresSolution& sol,
                                              const CsrMatrix& stiffness,
                                              std::span<const double> u_ref,
                                              double lambda_min_a, double g_l2) {
  if (!(lambda_min_a > 0.0)) throw std::invalid_argument("convergence_table: lambda_min must be > 0");
  std::vector<ConvergenceRow> rows;
  const double ref_norm = energy_norm(stiffness, u_ref);
  for (int k = 1; k <= sol.q; ++k) {
    Vector diff(u_ref.begin(), u_ref.end());
    axpy(-1.0, sol.partial_sum(k), diff);
    ConvergenceRow row;
    row.k = k;
    row.error = energy_norm(stiffness, diff);
    row.relative_error = ref_norm > 0.0 ? row.error / ref_norm : row.error;
    row.bound = 2.0 / (std::numbers::pi * std::sqrt(lambda_min_a)) * std::ldexp(1.0, -k) * g_l2;
    row.ratio = row.bound > 0.0 ? row.error / row.bound : 0.0;
    rows.push_back(row);
  }
  return rows;
}

OrthogonalityCheck increment_orthogonality(const MultiresSolution& sol,
                                           const CsrMatrix& stiffness) {
  OrthogonalityCheck c;
  std::vector<Vector> a_inc(sol.increments.size());
  std::vector<double> norms(sol.increments.size(), 0.0);
  for (int k = 1; k <= sol.q; ++k) {
    a_inc[k] = spmv(stiffness, sol.increments[k]);
    const double e = dot(sol.increments[k], a_inc[k]);
    norms[k] = std::sqrt(std::max(0.0, e));
    c.increment_energy_sum += e;
  }
  for (int k = 1; k <= sol.q; ++k) {
    for (int l = k + 1; l <= sol.q; ++l) {
      const double den = norms[k] * norms[l];
      if (den > 0.0) {
        c.max_relative_cross =
            std::max(c.max_relative_cross, std::abs(dot(sol.increments[l], a_inc[k])) / den);
      }
    }
  }
  c.solution_energy = energy_norm(stiffness, sol.u);
  c.solution_energy *= c.solution_energy;
  return c;
}

Table to_table(const DecayProfile& p) {
  Table t{"decay_k" + std::to_string(p.k), {"r", "fraction_outside"}, {}};
  for (std::size_t j = 0; j < p.radii.size(); ++j) t.rows.push_back({p.radii[j], p.fractions[j]});
  return t;
}

Table to_table(const std::vector<ConditioningRow>& rows) {
  Table t{"conditioning", {"k", "matrix_code", "lambda_min", "lambda_max", "cond"}, {}};
  for (const auto& r : rows) {
    // matrix_code: 0 = A^(1), 1 = B^(k), 2 = W W^T
    const double code = r.matrix == "A" ? 0.0 : (r.matrix == "B" ? 1.0 : 2.0);
    t.rows.push_back({static_cast<double>(r.k), code, r.lambda_min, r.lambda_max, r.cond});
  }
  return t;
}

Table to_table(const CoefficientSpectrum& s) {
  Table t{"spectrum", {"rank", "level", "magnitude"}, {}};
  for (std::size_t k = 1; k < s.per_level.size(); ++k) {
    for (std::size_t j = 0; j < s.per_level[k].size(); ++j) {
      t.rows.push_back({static_cast<double>(j), static_cast<double>(k), s.per_level[k][j]});
    }
  }
  for (std::size_t j = 0; j < s.global.size(); ++j) {
    t.rows.push_back({static_cast<double>(j), 0.0, s.global[j]});
  }
  return t;
}

Table to_table(const std::vector<Compression>& rows) {
  Table t{"compression", {"keep_fraction", "kept", "total", "relative_error"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.keep_fraction, static_cast<double>(r.kept), static_cast<double>(r.total),
                      r.relative_error});
  }
  return t;
}

Table to_table(const std::vector<ConvergenceRow>& rows) {
  Table t{"convergence", {"k", "error", "relative_error", "bound", "ratio"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<double>(r.k), r.error, r.relative_error, r.bound, r.ratio});
  }
  return t;
}

}  // namespace gamblet
