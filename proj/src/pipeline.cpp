#include "gamblet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "gamblet/errors.hpp"
#include "gamblet/matrix_market.hpp"
#include "gamblet/parallel.hpp"

namespace gamblet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vector unit(Index size, Index i) {
  Vector e(static_cast<std::size_t>(size), 0.0);
  e[i] = 1.0;
  return e;
}

json to_json(const CgReport& r) {
  return {{"iterations", r.iterations},
          {"relative_residual", r.relative_residual},
          {"converged", r.converged}};
}

std::vector<double> read_sized(const std::string& key, const std::string& file, std::size_t size) {
  std::vector<double> v;
  try {
    v = read_values(file);
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
  if (v.size() != size) {
    throw ConfigError("config key '" + key + "': " + file + " holds " + std::to_string(v.size()) +
                      " values, expected " + std::to_string(size));
  }
  return v;
}

// Collects the files one command writes, relative to the output directory.
class Writer {
 public:
  Writer(fs::path out, ArtifactMeta meta) : out_(std::move(out)), meta_(std::move(meta)) {}

  const ArtifactMeta& meta() const { return meta_; }
  const std::vector<std::string>& files() const { return files_; }

  fs::path path(const std::string& name) {
    files_.push_back(name);
    return out_ / name;
  }
  void grid_csv(const std::string& name, const Grid& g, std::span<const double> v) {
    write_grid_csv(path(name), g, v, meta_);
  }
  void pgm(const std::string& name, const Grid& g, std::span<const double> v) {
    write_pgm(path(name), g, v, meta_);
  }
  void table(const std::string& name, const Table& t) { write_table_csv(path(name), t, meta_); }
  void json_file(const std::string& name, const json& j) { write_json(path(name), j, meta_); }
  void market(const std::string& name, const CsrMatrix& a, bool symmetric) {
    write_matrix_market_meta(path(name), a, symmetric, meta_);
  }
  void text(const std::string& name, const std::string& body) {
    std::ofstream f(path(name));
    if (!f) throw std::runtime_error("cannot write " + (out_ / name).string());
    f << body;
  }

 private:
  fs::path out_;
  ArtifactMeta meta_;
  std::vector<std::string> files_;
};

void write_problem_files(Writer& w, const Problem& p, const RunConfig& cfg) {
  w.text("config.ini", "# config_hash=" + w.meta().config_hash + "\n" + canonical_text(cfg));
  write_cell_csv(w.path("coefficient.csv"), p.grid, p.coefficient.values, w.meta());
  write_cell_pgm(w.path("coefficient.pgm"), p.grid, p.coefficient.values, true, w.meta());
  w.json_file("tree.json", json::parse(tree_summary_json(p.tree, p.grid)));
}

void write_level_dumps(Writer& w, const Transform& t, bool include_psi) {
  const int q = t.q();
  for (int k = 1; k <= q; ++k) {
    const std::string s = std::to_string(k);
    if (t.exact) {
      const GambletLevel& lv = t.exact->levels[k];
      w.market("A_k" + s + ".mtx", CsrMatrix::from_dense(lv.stiffness), true);
      if (include_psi) w.market("Psi_k" + s + ".mtx", CsrMatrix::from_dense(lv.psi), false);
      if (k >= 2) {
        w.market("B_k" + s + ".mtx", CsrMatrix::from_dense(lv.subband_stiffness), true);
        w.market("R_k" + s + ".mtx", CsrMatrix::from_dense(lv.restriction), false);
        w.market("W_k" + s + ".mtx", lv.w, false);
      }
    } else {
      const LocalGambletLevel& lv = t.fast->levels[k];
      w.market("A_k" + s + ".mtx", lv.stiffness, true);
      if (include_psi) w.market("Psi_k" + s + ".mtx", materialize_psi(t.fast->levels, k), false);
      if (k >= 2) {
        w.market("B_k" + s + ".mtx", lv.subband_stiffness, true);
        w.market("R_k" + s + ".mtx", lv.restriction, false);
        w.market("W_k" + s + ".mtx", lv.w, false);
      }
    }
  }
}

json level_summary(const Transform& t) {
  json levels = json::array();
  for (int k = 1; k <= t.q(); ++k) {
    json l{{"k", k}};
    if (t.exact) {
      const GambletLevel& lv = t.exact->levels[k];
      l["size"] = lv.stiffness.rows();
      if (k >= 2) {
        l["subband_size"] = lv.subband_stiffness.rows();
        l["symmetry_repair"] = lv.symmetry_repair;
      }
    } else {
      const LocalGambletLevel& lv = t.fast->levels[k];
      l["size"] = lv.stiffness.rows();
      l["rho"] = lv.rho;
      l["nnz_stiffness"] = lv.stiffness.nnz();
      if (k >= 2) {
        l["subband_size"] = lv.subband_stiffness.rows();
        l["nnz_subband"] = lv.subband_stiffness.nnz();
        l["nnz_restriction"] = lv.restriction.nnz();
      }
    }
    levels.push_back(l);
  }
  return levels;
}

json pipeline_summary(const Transform& t) {
  json j{{"pipeline", to_string(t.kind)}, {"levels", level_summary(t)}};
  if (t.fast) {
    j["schedule"] = to_json(t.fast->schedule);
    j["tolerances"] = to_json(t.fast->tolerances);
    j["total_flops"] = t.fast->report.total_flops();
  }
  return j;
}

int bases_level(const RunConfig& cfg) { return cfg.bases_level > 0 ? cfg.bases_level : (cfg.q + 1) / 2; }

}  // namespace

Problem build_problem(const RunConfig& cfg, bool zero_load) {
  validate(cfg);
  Problem p;
  p.grid = build_grid(cfg.q);
  p.tree = build_hierarchy(p.grid);
  try {
    switch (cfg.coefficient) {
      case CoefficientKind::example1: p.coefficient = coefficient_example1(p.grid); break;
      case CoefficientKind::constant:
        p.coefficient = coefficient_constant(p.grid, cfg.coefficient_value);
        break;
      case CoefficientKind::checkerboard:
        p.coefficient = coefficient_checkerboard(p.grid, cfg.contrast, cfg.seed);
        break;
      case CoefficientKind::csv:
        p.coefficient = coefficient_from_values(
            p.grid, read_sized("problem.coefficient_file", cfg.coefficient_file,
                               static_cast<std::size_t>(p.grid.num_cells())));
        break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("coefficient: ") + e.what());
  }
  p.mass = assemble_mass(p.grid);
  p.stiffness = assemble_stiffness(p.grid, p.coefficient);

  const auto nodes = static_cast<std::size_t>(p.grid.num_nodes());
  Vector g;
  if (zero_load) {
    g.assign(nodes, 0.0);
  } else {
    switch (cfg.load) {
      case LoadKind::example1: g = load_example1(p.grid); break;
      case LoadKind::constant: g.assign(nodes, cfg.load_value); break;
      case LoadKind::csv: g = read_sized("problem.load_file", cfg.load_file, nodes); break;
    }
  }
  p.load = assemble_load(p.grid, p.mass, g);
  return p;
}

ExactOptions exact_options(const RunConfig& cfg) {
  ExactOptions o;
  o.variant = cfg.variant;
  o.tol_mass = cfg.tol_mass;
  o.tol_subband = cfg.tol_subband;
  o.nodal_init = cfg.nodal_init;
  return o;
}

FastOptions fast_options(const RunConfig& cfg, int threads) {
  FastOptions o;
  o.variant = cfg.variant;
  o.epsilon = cfg.epsilon;
  o.c_rho = cfg.c_rho;
  if (!cfg.radii.empty()) {
    o.radii.assign(1, 0);
    o.radii.insert(o.radii.end(), cfg.radii.begin(), cfg.radii.end());
  }
  o.tol_multiplier = cfg.tol_multiplier;
  o.load_shortcut = cfg.load_shortcut;
  o.drop_tol = cfg.drop_tol;
  o.jacobi = cfg.jacobi;
  o.threads = threads;
  return o;
}

int Transform::q() const {
  return static_cast<int>(exact ? exact->levels.size() : fast->levels.size()) - 1;
}

const MultiresSolution& Transform::solution() const {
  return exact ? exact->solution : fast->solution;
}

const CsrMatrix& Transform::w(int k) const { return exact ? exact->levels[k].w : fast->levels[k].w; }

Vector Transform::psi_transpose(int k, std::span<const double> c) const {
  if (fast) return apply_psi_transpose(fast->levels, k, c);
  const Eigen::Map<const Eigen::VectorXd> cv(c.data(), static_cast<Eigen::Index>(c.size()));
  const Eigen::VectorXd x = exact->levels[k].psi.transpose() * cv;
  return Vector(x.data(), x.data() + x.size());
}

Vector Transform::psi_row(int k, Index i) const {
  const Index size = exact ? exact->levels[k].psi.rows() : fast->levels[k].stiffness.rows();
  return psi_transpose(k, unit(size, i));
}

Vector Transform::chi_row(int k, Index j) const {
  const CsrMatrix& wk = w(k);
  return psi_transpose(k, spmv_transpose(wk, unit(wk.rows(), j)));
}

MultiresView Transform::view() const { return exact ? make_view(*exact) : make_view(*fast); }

std::vector<ConditioningRow> Transform::conditioning(double tol) const {
  return exact ? conditioning_table(*exact, tol) : conditioning_table(*fast, tol);
}

Transform run_transform(const Problem& p, const RunConfig& cfg, int threads) {
  Transform t;
  t.kind = cfg.pipeline;
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.pipeline == PipelineKind::exact) {
    t.exact = exact_solve(p.mass, p.stiffness, p.load.rhs, p.tree, exact_options(cfg));
  } else {
    t.fast = fast_solve(p.mass, p.stiffness, p.load, p.tree, fast_options(cfg, threads));
  }
  t.seconds = seconds_since(t0);
  return t;
}

Reference reference_solution(const Problem& p, double rel_tol) {
  Reference r;
  r.u.assign(p.load.rhs.size(), 0.0);
  CgOptions o;
  o.rel_tol = rel_tol;
  o.max_iter = 200000;
  o.jacobi = true;
  r.report = cg_solve(p.stiffness, p.load.rhs, r.u, o);
  if (r.report.breakdown) throw NumericalError("reference", "CG breakdown on the fine stiffness");
  if (!r.report.converged) {
    throw NumericalError("reference", "fine-grid CG did not reach the requested tolerance");
  }
  return r;
}

ArtifactMeta make_meta(const RunConfig& cfg, const std::string& producer) {
  return {config_hash(cfg), producer, canonical_text(cfg)};
}

void check_manifest(const fs::path& out, const ArtifactMeta& meta) {
  const fs::path m = out / "manifest.json";
  if (!fs::exists(m)) return;
  json j;
  try {
    std::ifstream in(m);
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("unreadable " + m.string() + ": " + e.what());
  }
  const std::string other = j.value("config_hash", "");
  if (other != meta.config_hash) {
    throw ConfigError("output directory " + out.string() + " holds artifacts of config hash " +
                      other + "; refusing to mix them with config hash " + meta.config_hash);
  }
}

void record_manifest(const fs::path& out, const ArtifactMeta& meta,
                     const std::vector<std::string>& files) {
  const fs::path m = out / "manifest.json";
  json j = json::object();
  if (fs::exists(m)) {
    std::ifstream in(m);
    j = json::parse(in);
  }
  j["config_hash"] = meta.config_hash;
  j["config"] = meta.config_text;
  j["commands"][meta.producer] = files;
  std::ofstream f(m);
  f << j.dump(2) << '\n';
}

namespace {

struct Session {
  Writer writer;
  fs::path out;

  Session(const RunConfig& cfg, const fs::path& dir, const std::string& producer)
      : writer(dir, make_meta(cfg, producer)), out(dir) {
    fs::create_directories(out);
    check_manifest(out, writer.meta());
  }
  void finish() { record_manifest(out, writer.meta(), writer.files()); }
};

}  // namespace

json cmd_solve(const RunConfig& cfg, const fs::path& out, int threads) {
  Session s(cfg, out, "solve");
  const Problem p = build_problem(cfg);
  const Transform t = run_transform(p, cfg, threads);
  const MultiresSolution& sol = t.solution();
  const Reference ref = reference_solution(p);

  Writer& w = s.writer;
  write_problem_files(w, p, cfg);
  w.grid_csv("load.csv", p.grid, p.load.nodal);
  w.grid_csv("u.csv", p.grid, sol.u);
  w.pgm("u.pgm", p.grid, sol.u);
  for (int k = 1; k <= sol.q; ++k) {
    w.grid_csv("increment_k" + std::to_string(k) + ".csv", p.grid, sol.increments[k]);
  }
  if (cfg.matrix_market) write_level_dumps(w, t, true);

  json summary = pipeline_summary(t);
  summary["q"] = cfg.q;
  summary["unknowns"] = p.grid.num_nodes();
  summary["contrast"] = p.coefficient.contrast();
  summary["seconds"] = t.seconds;
  summary["reference"] = to_json(ref.report);

  Vector diff = ref.u;
  axpy(-1.0, sol.u, diff);
  const double ref_norm = energy_norm(p.stiffness, ref.u);
  const double err = energy_norm(p.stiffness, diff);
  summary["error_vs_reference"] = {{"a_norm", err},
                                   {"relative", ref_norm > 0.0 ? err / ref_norm : err}};

  json cg = {{"coarse", to_json(sol.coarse_report)}, {"subband", json::object()}};
  for (int k = 2; k <= sol.q; ++k) cg["subband"][std::to_string(k)] = to_json(sol.subband_reports[k]);
  summary["cg"] = cg;

  const OrthogonalityCheck orth = increment_orthogonality(sol, p.stiffness);
  summary["increments"] = {{"max_relative_cross", orth.max_relative_cross},
                           {"energy_sum", orth.increment_energy_sum},
                           {"solution_energy", orth.solution_energy}};

  if (t.fast) {
    w.json_file("complexity.json", to_json(t.fast->report));
    if (cfg.compare_exact && cfg.q <= kMaxExactDepth) {
      const ExactResult ex = exact_solve(p.mass, p.stiffness, p.load.rhs, p.tree, exact_options(cfg));
      Vector d = ex.solution.u;
      axpy(-1.0, sol.u, d);
      const double en = energy_norm(p.stiffness, ex.solution.u);
      const double dn = energy_norm(p.stiffness, d);
      const double rel = en > 0.0 ? dn / en : dn;
      summary["fast_vs_exact"] = {{"a_norm_difference", dn},
                                  {"relative", rel},
                                  {"epsilon", cfg.epsilon},
                                  {"kappa", kCalibratedKappa},
                                  {"within_calibrated_epsilon", rel <= kCalibratedKappa * cfg.epsilon}};
    } else {
      summary["fast_vs_exact"] = "skipped";
    }
  }
  w.json_file("summary.json", summary);
  s.finish();
  return summary;
}

json cmd_transform(const RunConfig& cfg, const fs::path& out, int threads) {
  Session s(cfg, out, "transform");
  const Problem p = build_problem(cfg, true);
  const Transform t = run_transform(p, cfg, threads);
  Writer& w = s.writer;
  write_problem_files(w, p, cfg);
  write_level_dumps(w, t, cfg.matrix_market);
  json summary = pipeline_summary(t);
  summary["q"] = cfg.q;
  summary["seconds"] = t.seconds;
  if (t.fast) w.json_file("complexity.json", to_json(t.fast->report));
  w.json_file("transform.json", summary);
  s.finish();
  return summary;
}

json cmd_bases(const RunConfig& cfg, const fs::path& out, int threads) {
  validate(cfg);
  const int k = bases_level(cfg);
  const IndexTree tree(cfg.q);
  std::vector<Index> psi_ids(cfg.bases_indices.begin(), cfg.bases_indices.end());
  if (psi_ids.empty()) psi_ids.push_back(central_index(tree, k));
  std::vector<Index> chi_ids(cfg.chi_indices.begin(), cfg.chi_indices.end());
  if (chi_ids.empty() && k >= 2) {
    const Index parent = central_index(tree, k - 1);
    for (Index t = 0; t < 3; ++t) chi_ids.push_back(3 * parent + t);
  }
  for (Index i : psi_ids) {
    if (i < 0 || i >= tree.size(k)) {
      throw ConfigError("config key 'bases.indices': index " + std::to_string(i) +
                        " outside [0, " + std::to_string(tree.size(k)) + ") at level " +
                        std::to_string(k));
    }
  }
  for (Index j : chi_ids) {
    if (k < 2 || j < 0 || j >= tree.subband_size(k)) {
      throw ConfigError("config key 'bases.chi_indices': index " + std::to_string(j) +
                        " has no subband basis function at level " + std::to_string(k));
    }
  }

  Session s(cfg, out, "bases");
  const Problem p = build_problem(cfg, true);
  const Transform t = run_transform(p, cfg, threads);
  Writer& w = s.writer;
  json listing{{"level", k}, {"pipeline", to_string(cfg.pipeline)}, {"psi", json::array()},
               {"chi", json::array()}};
  auto emit = [&](const std::string& kind, Index i, const Vector& v) {
    const std::string stem = kind + "_k" + std::to_string(k) + "_i" + std::to_string(i);
    w.grid_csv(stem + ".csv", p.grid, v);
    w.pgm(stem + ".pgm", p.grid, v);
    listing[kind].push_back({{"index", i}, {"energy", energy_norm(p.stiffness, v)},
                             {"csv", stem + ".csv"}, {"pgm", stem + ".pgm"}});
  };
  for (Index i : psi_ids) emit("psi", i, t.psi_row(k, i));
  for (Index j : chi_ids) emit("chi", j, t.chi_row(k, j));
  w.json_file("bases.json", listing);
  s.finish();
  return listing;
}

json cmd_report(const RunConfig& cfg, const fs::path& out, int threads) {
  Session s(cfg, out, "report");
  Writer& w = s.writer;
  const ArtifactMeta& meta = w.meta();
  const Problem p = build_problem(cfg);
  const Transform t = run_transform(p, cfg, threads);
  const MultiresSolution& sol = t.solution();
  const MultiresView view = t.view();
  const Reference ref = reference_solution(p);
  json report{{"q", cfg.q}, {"pipeline", to_string(cfg.pipeline)},
              {"contrast", p.coefficient.contrast()}};

  // Decay of the central gamblets.
  std::vector<int> decay_levels = cfg.decay_levels;
  if (decay_levels.empty()) {
    for (int k : {2, 3, 4}) {
      if (k <= cfg.q) decay_levels.push_back(k);
    }
  }
  json decay = json::array();
  for (int k : decay_levels) {
    const Index i = central_index(p.tree, k);
    const Vector psi = t.psi_row(k, i);
    const DecayProfile prof = decay_profile(p.grid, p.coefficient, p.tree, k, i, psi);
    const std::string ks = std::to_string(k);
    w.table(tagged("decay_k" + ks, ".csv", meta), to_table(prof));
    w.pgm(tagged("decay_psi_k" + ks, ".pgm", meta), p.grid, psi);
    decay.push_back({{"k", k},
                     {"index", i},
                     {"slope", prof.slope},
                     {"intercept", prof.intercept},
                     {"fraction_at_4H", prof.fraction_at(4.0 * p.tree.resolution(k))}});
  }
  report["decay"] = decay;

  const auto cond = t.conditioning(1e-8);
  w.table(tagged("conditioning", ".csv", meta), to_table(cond));
  json cj = json::array();
  for (const auto& r : cond) {
    cj.push_back({{"k", r.k}, {"matrix", r.matrix}, {"lambda_min", r.lambda_min},
                  {"lambda_max", r.lambda_max}, {"cond", r.cond}});
  }
  report["conditioning"] = cj;

  const CoefficientSpectrum spec = coefficient_spectrum(sol, view);
  w.table(tagged("spectrum", ".csv", meta), to_table(spec));

  std::vector<double> keep = cfg.keep_fractions;
  std::sort(keep.begin(), keep.end(), std::greater<>());
  std::vector<Compression> comp;
  for (double f : keep) comp.push_back(compress(sol, view, p.stiffness, f));
  w.table(tagged("compression", ".csv", meta), to_table(comp));
  if (!comp.empty()) w.pgm(tagged("compressed_u", ".pgm", meta), p.grid, comp.back().u);
  json compj = json::array();
  for (const auto& c : comp) {
    compj.push_back({{"keep_fraction", c.keep_fraction}, {"kept", c.kept},
                     {"relative_error", c.relative_error}});
  }
  report["compression"] = compj;

  const double g_l2 = std::sqrt(l2_norm_squared(p.mass, p.load.nodal));
  const auto conv = convergence_table(sol, p.stiffness, ref.u, p.coefficient.lambda_min(), g_l2);
  w.table(tagged("convergence", ".csv", meta), to_table(conv));
  json convj = json::array();
  for (const auto& r : conv) {
    convj.push_back({{"k", r.k}, {"error", r.error}, {"relative_error", r.relative_error},
                     {"bound", r.bound}, {"ratio", r.ratio}});
  }
  report["convergence"] = convj;

  const OrthogonalityCheck orth = increment_orthogonality(sol, p.stiffness);
  report["increments"] = {{"max_relative_cross", orth.max_relative_cross},
                          {"energy_sum", orth.increment_energy_sum},
                          {"solution_energy", orth.solution_energy}};
  w.json_file(tagged("report", ".json", meta), report);
  s.finish();
  return report;
}

int run_command(const CommandArgs& args, std::ostream& err) {
  static const std::set<std::string> commands{"solve", "transform", "bases", "report"};
  if (!commands.count(args.command)) {
    err << "error: unknown command '" << args.command << "'\n";
    return kExitUsage;
  }
  std::string stage = "setup";
  try {
    RunConfig cfg = load_config(args.config);
    if (args.out) cfg.out_dir = args.out->string();
    if (args.threads) cfg.threads = *args.threads;
    validate(cfg);
    const int threads = resolve_threads(cfg.threads);
    const fs::path out = cfg.out_dir;
    stage = args.command;
    if (args.command == "solve") cmd_solve(cfg, out, threads);
    else if (args.command == "transform") cmd_transform(cfg, out, threads);
    else if (args.command == "bases") cmd_bases(cfg, out, threads);
    else cmd_report(cfg, out, threads);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure in stage '" << e.stage() << "' (" << stage << "): " << e.what()
        << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error (" << stage << "): " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace gamblet
