#include "gamblet/fast.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gamblet/errors.hpp"
#include "gamblet/parallel.hpp"

namespace gamblet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double clamp_tol(double t) { return std::clamp(t, 1e-14, 1e-2); }

// Adds flops/time to a line and resets the counter.
void charge(ComplexityReport* report, const std::string& line, OpCount& ops,
            Clock::time_point t0) {
  if (report != nullptr) {
    auto& s = report->lines[line];
    s.flops += ops.flops;
    s.seconds += seconds_since(t0);
  }
  ops.flops = 0;
}

// Per-worker accumulators for the patch loops.
struct WorkerStats {
  OpCount ops;
  std::map<int, int> histogram;
};

void merge_workers(ComplexityReport* report, const std::string& line,
                   const std::vector<WorkerStats>& stats, Clock::time_point t0) {
  if (report == nullptr) return;
  auto& s = report->lines[line];
  for (const auto& w : stats) {
    s.flops += w.ops.flops;
    for (const auto& [it, n] : w.histogram) report->cg_histograms[line][it] += n;
  }
  s.seconds += seconds_since(t0);
}

CsrMatrix rows_to_csr(Index rows, Index cols, std::vector<std::vector<Index>>& idx,
                      std::vector<Vector>& val) {
  std::vector<std::int64_t> off(static_cast<std::size_t>(rows) + 1, 0);
  for (Index i = 0; i < rows; ++i) off[i + 1] = off[i] + static_cast<std::int64_t>(idx[i].size());
  std::vector<Index> all_idx;
  Vector all_val;
  all_idx.reserve(static_cast<std::size_t>(off[rows]));
  all_val.reserve(static_cast<std::size_t>(off[rows]));
  for (Index i = 0; i < rows; ++i) {
    all_idx.insert(all_idx.end(), idx[i].begin(), idx[i].end());
    all_val.insert(all_val.end(), val[i].begin(), val[i].end());
    std::vector<Index>().swap(idx[i]);
    Vector().swap(val[i]);
  }
  return {rows, cols, std::move(off), std::move(all_idx), std::move(all_val)};
}

void require_converged(const CgReport& r, const std::string& stage, const std::string& what) {
  if (r.breakdown) throw NumericalError(stage, what + ": CG breakdown (operator not SPD)");
  if (!r.converged) {
    throw NumericalError(stage, what + ": CG did not converge (relative residual " +
                                    std::to_string(r.relative_residual) + ")");
  }
}

}  // namespace

int covering_radius(int k) {
  if (k < 1) throw std::invalid_argument("covering_radius: k must be >= 1");
  if (k >= 30) return 1 << 29;
  return std::max(1, (1 << k) - 2);
}

LocalizationSchedule make_schedule(int q, double epsilon, double c_rho) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("make_schedule: epsilon must lie in (0, 1)");
  }
  if (!(c_rho > 0.0)) throw std::invalid_argument("make_schedule: C_rho must be > 0");
  if (q < 1) throw std::invalid_argument("make_schedule: q must be >= 1");
  LocalizationSchedule s;
  s.epsilon = epsilon;
  s.c_rho = c_rho;
  s.rho.assign(static_cast<std::size_t>(q) + 1, 0);
  const double ln_inv_h = std::numbers::ln2;
  for (int k = 1; k <= q; ++k) {
    const double raw =
        c_rho * ((1.0 + 1.0 / ln_inv_h) * k * ln_inv_h + std::log(1.0 / epsilon));
    const double capped = std::min(std::ceil(raw), static_cast<double>(covering_radius(k)));
    s.rho[k] = std::max(1, static_cast<int>(capped));
  }
  return s;
}

LocalizationSchedule uniform_schedule(int q, int rho, double epsilon) {
  if (rho < 1) throw std::invalid_argument("uniform_schedule: rho must be >= 1");
  if (q < 1) throw std::invalid_argument("uniform_schedule: q must be >= 1");
  LocalizationSchedule s;
  s.epsilon = epsilon;
  s.c_rho = 0.0;
  s.uniform = true;
  s.rho.assign(static_cast<std::size_t>(q) + 1, 0);
  for (int k = 1; k <= q; ++k) s.rho[k] = std::min(rho, covering_radius(k));
  return s;
}

InnerTolerances make_tolerances(int q, double epsilon, double multiplier) {
  if (!(multiplier > 0.0)) throw std::invalid_argument("tolerance multiplier must be > 0");
  InnerTolerances t;
  const double qq = static_cast<double>(q) * q;
  // H^(7d/2+3) = 2^-10 for d = 2.
  t.mass = clamp_tol(multiplier * std::ldexp(epsilon, -10) / qq);
  t.patch.assign(static_cast<std::size_t>(q) + 1, 0.0);
  for (int k = 2; k <= q; ++k) {
    const double km1 = k - 1.0;
    // H^(-k+7d/2+4) = 2^(k-11).
    t.patch[k] = clamp_tol(multiplier * std::ldexp(epsilon, k - 11) / (km1 * km1));
  }
  t.subband = clamp_tol(multiplier * epsilon / (2.0 * q));
  t.coarse = t.subband;
  return t;
}

std::uint64_t ComplexityReport::total_flops() const {
  std::uint64_t total = 0;
  for (const auto& [name, s] : lines) total += s.flops;
  return total;
}

void ComplexityReport::record_cg(const std::string& line, const CgReport& r) {
  cg_histograms[line][r.iterations] += 1;
}

void ComplexityReport::merge(const ComplexityReport& other) {
  for (const auto& [name, s] : other.lines) {
    lines[name].flops += s.flops;
    lines[name].seconds += s.seconds;
  }
  for (const auto& [name, h] : other.cg_histograms) {
    for (const auto& [it, n] : h) cg_histograms[name][it] += n;
  }
}

CsrMatrix local_mass_inverse(const CsrMatrix& mass, const IndexTree& tree, int rho,
                             double tol, int threads, ComplexityReport* report) {
  const int q = tree.depth();
  const Index n = tree.size(q);
  if (mass.rows() != n || mass.cols() != n) {
    throw std::invalid_argument("local_mass_inverse: mass matrix does not match the tree");
  }
  if (rho < 1) throw std::invalid_argument("local_mass_inverse: rho must be >= 1");
  const auto t0 = Clock::now();
  const int workers = resolve_threads(threads);
  std::vector<PrincipalExtractor> extractors;
  extractors.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) extractors.emplace_back(mass);
  std::vector<WorkerStats> stats(static_cast<std::size_t>(workers));
  std::vector<std::vector<Index>> idx(static_cast<std::size_t>(n));
  std::vector<Vector> val(static_cast<std::size_t>(n));
  const CgOptions opts{.rel_tol = tol};

  parallel_for(n, threads, [&](Index i, int worker) {
    const std::vector<Index> patch = neighborhood(tree, q, i, rho);
    const PrincipalSubmatrix sub = extractors[worker](patch);
    Vector rhs(patch.size(), 0.0);
    const auto pos = std::lower_bound(patch.begin(), patch.end(), i) - patch.begin();
    rhs[pos] = 1.0;
    Vector y(patch.size(), 0.0);
    const CgReport r = cg_solve(sub.matrix, rhs, y, opts, &stats[worker].ops);
    require_converged(r, "local mass inverse", "patch of node " + std::to_string(i));
    stats[worker].histogram[r.iterations] += 1;
    idx[i] = patch;
    val[i] = std::move(y);
  });
  merge_workers(report, "line3", stats, t0);
  return rows_to_csr(n, n, idx, val);
}

LocalGambletLevel local_level_step(LocalGambletLevel& level, const IndexTree& tree,
                                   const LocalizationSchedule& schedule,
                                   const InnerTolerances& tol, const FastOptions& opts,
                                   ComplexityReport* report) {
  const int k = level.k;
  if (k < 2 || k > tree.depth()) throw std::invalid_argument("local_level_step: bad level");
  const std::string stage = "fast level " + std::to_string(k);
  OpCount ops;

  auto t0 = Clock::now();
  level.w = build_w(tree, k, opts.variant).w;
  level.subband_stiffness = triple_product(level.w, level.stiffness, &ops);
  charge(report, "line7", ops, t0);

  // Columns of W A pi_bar^(k,k-1), one row per coarse index.
  t0 = Clock::now();
  const Aggregation agg = build_pi(tree, k - 1);
  const CsrMatrix ct = matmul(matmul(agg.pi_bar, level.stiffness, &ops), transpose(level.w), &ops);
  charge(report, "line11", ops, t0);

  t0 = Clock::now();
  const Index coarse_n = tree.size(k - 1);
  const int rho = schedule.rho[k - 1];
  const int workers = resolve_threads(opts.threads);
  std::vector<PrincipalExtractor> extractors;
  extractors.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) extractors.emplace_back(level.subband_stiffness);
  std::vector<WorkerStats> stats(static_cast<std::size_t>(workers));
  std::vector<std::vector<Index>> idx(static_cast<std::size_t>(coarse_n));
  std::vector<Vector> val(static_cast<std::size_t>(coarse_n));
  const CgOptions cg_opts{.rel_tol = tol.patch[k], .jacobi = opts.jacobi};

  parallel_for(coarse_n, opts.threads, [&](Index i, int worker) {
    const std::vector<Index> chi = chi_neighborhood(tree, k, i, rho);
    const PrincipalSubmatrix sub = extractors[worker](chi);
    Vector rhs(chi.size(), 0.0);
    const auto cols = ct.row_indices(i);
    const auto vals = ct.row_values(i);
    std::size_t l = 0;
    for (std::size_t p = 0; p < cols.size(); ++p) {
      while (l < chi.size() && chi[l] < cols[p]) ++l;
      if (l == chi.size()) break;
      if (chi[l] == cols[p]) rhs[l] = -vals[p];
    }
    Vector y(chi.size(), 0.0);
    const CgReport r = cg_solve(sub.matrix, rhs, y, cg_opts, &stats[worker].ops);
    require_converged(r, stage, "patch of coarse index " + std::to_string(i));
    stats[worker].histogram[r.iterations] += 1;
    idx[i] = chi;
    val[i] = std::move(y);
  });
  merge_workers(report, "line11", stats, t0);
  level.d = rows_to_csr(coarse_n, level.w.rows(), idx, val);

  t0 = Clock::now();
  level.restriction = add(agg.pi_bar, matmul(level.d, level.w, &ops));
  charge(report, "line12", ops, t0);

  LocalGambletLevel next;
  next.k = k - 1;
  next.rho = schedule.rho[k - 1];

  t0 = Clock::now();
  const CsrMatrix a_next = triple_product(level.restriction, level.stiffness, &ops);
  next.stiffness = drop_small(a_next, opts.drop_tol * max_abs(a_next));
  charge(report, "line13", ops, t0);
  for (Index i = 0; i < next.stiffness.rows(); ++i) {
    if (!(next.stiffness.at(i, i) > 0.0)) {
      throw NumericalError(stage, "A^(" + std::to_string(k - 1) +
                                      "),loc lost positive definiteness at index " +
                                      std::to_string(i));
    }
  }

  if (opts.materialize_bases && level.psi.rows() > 0) {
    t0 = Clock::now();
    next.psi = matmul(level.restriction, level.psi, &ops);
    charge(report, "line14", ops, t0);
  }

  t0 = Clock::now();
  if (!level.load.empty()) {
    next.load = spmv(level.restriction, level.load, &ops);
  }
  charge(report, "line15", ops, t0);
  return next;
}

Vector apply_psi_transpose(const std::vector<LocalGambletLevel>& levels, int k,
                           std::span<const double> coefficients, OpCount* ops) {
  const int q = static_cast<int>(levels.size()) - 1;
  if (k < 1 || k > q) throw std::invalid_argument("apply_psi_transpose: bad level");
  Vector v(coefficients.begin(), coefficients.end());
  for (int j = k; j < q; ++j) v = spmv_transpose(levels[j + 1].restriction, v, ops);
  return spmv_transpose(levels[q].psi, v, ops);
}

CsrMatrix materialize_psi(const std::vector<LocalGambletLevel>& levels, int k) {
  const int q = static_cast<int>(levels.size()) - 1;
  if (k < 1 || k > q) throw std::invalid_argument("materialize_psi: bad level");
  if (levels[k].psi.rows() > 0) return levels[k].psi;
  CsrMatrix p = levels[q].psi;
  for (int j = q; j > k; --j) p = matmul(levels[j].restriction, p);
  return p;
}

namespace {

// Lines 4, 15 (load chain), 8, 10, 16, 17, 18 for a given load.
MultiresSolution solve_phase(const std::vector<LocalGambletLevel>& levels,
                             std::vector<Vector> loads, const InnerTolerances& tol,
                             ComplexityReport* report) {
  const int q = static_cast<int>(levels.size()) - 1;
  MultiresSolution sol;
  sol.q = q;
  sol.subband.resize(static_cast<std::size_t>(q) + 1);
  sol.increments.resize(static_cast<std::size_t>(q) + 1);
  sol.subband_reports.resize(static_cast<std::size_t>(q) + 1);
  OpCount ops;

  for (int k = q; k >= 2; --k) {
    const LocalGambletLevel& lv = levels[k];
    auto t0 = Clock::now();
    const Vector wg = spmv(lv.w, loads[k], &ops);
    Vector w(wg.size(), 0.0);
    const CgReport r = cg_solve(lv.subband_stiffness, wg, w, {.rel_tol = tol.subband}, &ops);
    require_converged(r, "fast level " + std::to_string(k), "subband solve");
    if (report != nullptr) report->record_cg("line8", r);
    charge(report, "line8", ops, t0);

    t0 = Clock::now();
    sol.increments[k] = apply_psi_transpose(levels, k, spmv_transpose(lv.w, w, &ops), &ops);
    charge(report, "line10", ops, t0);
    sol.subband[k] = std::move(w);
    sol.subband_reports[k] = r;
  }

  auto t0 = Clock::now();
  Vector c(loads[1].size(), 0.0);
  sol.coarse_report = cg_solve(levels[1].stiffness, loads[1], c, {.rel_tol = tol.coarse}, &ops);
  require_converged(sol.coarse_report, "fast level 1", "coarse solve");
  if (report != nullptr) report->record_cg("line16", sol.coarse_report);
  charge(report, "line16", ops, t0);

  t0 = Clock::now();
  sol.increments[1] = apply_psi_transpose(levels, 1, c, &ops);
  sol.coarse = std::move(c);
  charge(report, "line17", ops, t0);

  t0 = Clock::now();
  sol.u = sol.increments[1];
  for (int k = 2; k <= q; ++k) axpy(1.0, sol.increments[k], sol.u);
  ops.add(static_cast<std::uint64_t>(q - 1) * sol.u.size());
  charge(report, "line18", ops, t0);
  return sol;
}

Vector fine_load(const CsrMatrix& psi_q, const LoadVector& load, bool shortcut,
                 ComplexityReport* report) {
  const auto t0 = Clock::now();
  OpCount ops;
  Vector g;
  if (shortcut && !load.nodal.empty()) {
    g = load.nodal;
  } else {
    g = spmv(psi_q, load.rhs, &ops);
  }
  charge(report, "line4", ops, t0);
  return g;
}

}  // namespace

FastResult fast_solve(const CsrMatrix& mass, const CsrMatrix& stiffness,
                      const LoadVector& load, const IndexTree& tree,
                      const FastOptions& opts) {
  const auto wall0 = Clock::now();
  const int q = tree.depth();
  if (q < 2) throw std::invalid_argument("fast_solve: need q >= 2");
  if (stiffness.rows() != tree.size(q) || load.rhs.size() != static_cast<std::size_t>(tree.size(q))) {
    throw std::invalid_argument("fast_solve: system does not match the tree");
  }
  FastResult res;
  if (!opts.radii.empty()) {
    if (opts.radii.size() != static_cast<std::size_t>(q) + 1) {
      throw std::invalid_argument("fast_solve: radii must have q+1 entries");
    }
    res.schedule.epsilon = opts.epsilon;
    res.schedule.c_rho = 0.0;
    res.schedule.uniform = std::all_of(opts.radii.begin() + 1, opts.radii.end(),
                                       [&](int r) { return r == opts.radii[1]; });
    res.schedule.rho = opts.radii;
    for (int k = 1; k <= q; ++k) {
      if (res.schedule.rho[k] < 1) throw std::invalid_argument("fast_solve: radii must be >= 1");
    }
  } else {
    res.schedule = make_schedule(q, opts.epsilon, opts.c_rho);
  }
  res.tolerances = make_tolerances(q, opts.epsilon, opts.tol_multiplier);
  res.report.threads = resolve_threads(opts.threads);
  ComplexityReport* rep = &res.report;

  res.levels.resize(static_cast<std::size_t>(q) + 1);
  LocalGambletLevel& top = res.levels[q];
  top.k = q;
  top.rho = res.schedule.rho[q];
  top.psi = local_mass_inverse(mass, tree, top.rho, res.tolerances.mass, opts.threads, rep);
  top.load = fine_load(top.psi, load, opts.load_shortcut, rep);

  {
    const auto t0 = Clock::now();
    OpCount ops;
    const CsrMatrix a = triple_product(top.psi, stiffness, &ops);
    top.stiffness = drop_small(a, opts.drop_tol * max_abs(a));
    charge(rep, "line5", ops, t0);
  }

  for (int k = q; k >= 2; --k) {
    res.levels[k - 1] = local_level_step(res.levels[k], tree, res.schedule, res.tolerances, opts, rep);
  }

  std::vector<Vector> loads(static_cast<std::size_t>(q) + 1);
  for (int k = 1; k <= q; ++k) loads[k] = res.levels[k].load;
  res.solution = solve_phase(res.levels, std::move(loads), res.tolerances, rep);

  for (int k = 1; k <= q; ++k) {
    const auto& lv = res.levels[k];
    res.report.levels.push_back({k, lv.rho, lv.stiffness.nnz(), lv.subband_stiffness.nnz(),
                                 lv.d.nnz(), lv.restriction.nnz(), lv.psi.nnz()});
  }
  res.report.wall_seconds = seconds_since(wall0);
  return res;
}

MultiresSolution fast_resolve(const FastResult& setup, const LoadVector& load,
                              const FastOptions& opts, ComplexityReport* report) {
  const int q = static_cast<int>(setup.levels.size()) - 1;
  if (q < 2 || load.rhs.size() != static_cast<std::size_t>(setup.levels[q].psi.rows())) {
    throw std::invalid_argument("fast_resolve: load does not match the stored levels");
  }
  std::vector<Vector> loads(static_cast<std::size_t>(q) + 1);
  loads[q] = fine_load(setup.levels[q].psi, load, opts.load_shortcut, report);
  const auto t0 = Clock::now();
  OpCount ops;
  for (int k = q; k >= 2; --k) loads[k - 1] = spmv(setup.levels[k].restriction, loads[k], &ops);
  charge(report, "line15", ops, t0);
  return solve_phase(setup.levels, std::move(loads), setup.tolerances, report);
}

nlohmann::json to_json(const LocalizationSchedule& s) {
  nlohmann::json j;
  j["epsilon"] = s.epsilon;
  j["c_rho"] = s.c_rho;
  j["uniform"] = s.uniform;
  nlohmann::json rho = nlohmann::json::object();
  for (int k = 1; k <= s.depth(); ++k) rho[std::to_string(k)] = s.rho[k];
  j["rho"] = std::move(rho);
  return j;
}

nlohmann::json to_json(const InnerTolerances& t) {
  nlohmann::json j;
  j["mass"] = t.mass;
  nlohmann::json patch = nlohmann::json::object();
  for (std::size_t k = 2; k < t.patch.size(); ++k) patch[std::to_string(k)] = t.patch[k];
  j["patch"] = std::move(patch);
  j["subband"] = t.subband;
  j["coarse"] = t.coarse;
  j["norm"] = "relative 2-norm residual";
  return j;
}

nlohmann::json to_json(const ComplexityReport& r) {
  nlohmann::json j;
  nlohmann::json lines = nlohmann::json::object();
  for (const auto& [name, s] : r.lines) lines[name] = {{"flops", s.flops}, {"seconds", s.seconds}};
  j["lines"] = std::move(lines);
  j["total_flops"] = r.total_flops();
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [name, h] : r.cg_histograms) {
    nlohmann::json hj = nlohmann::json::object();
    for (const auto& [it, n] : h) hj[std::to_string(it)] = n;
    hist[name] = std::move(hj);
  }
  j["cg_iterations"] = std::move(hist);
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& f : r.levels) {
    lv.push_back({{"k", f.k},
                  {"rho", f.rho},
                  {"nnz_stiffness", f.nnz_stiffness},
                  {"nnz_subband", f.nnz_subband},
                  {"nnz_d", f.nnz_d},
                  {"nnz_restriction", f.nnz_restriction},
                  {"nnz_psi", f.nnz_psi}});
  }
  j["levels"] = std::move(lv);
  j["wall_seconds"] = r.wall_seconds;
  j["threads"] = r.threads;
  return j;
}

}  // namespace gamblet
