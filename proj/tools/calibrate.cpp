// Sweeps the localization constant C_rho (or uniform radii) on one problem and
// prints the relative A-norm error of the localized solution against the
// exact pipeline, together with the flop count and wall time. The default
// C_rho in fast.hpp was chosen from this table.
#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "gamblet/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"C_rho calibration sweep"};
  int q = 5;
  double epsilon = 1e-4;
  std::vector<double> c_values{0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.75, 1.0};
  std::vector<int> uniform;
  std::string variant = "chain";
  int threads = 1;
  app.add_option("--q", q)->check(CLI::Range(2, 6));
  app.add_option("--epsilon", epsilon);
  app.add_option("--c-rho", c_values);
  app.add_option("--uniform", uniform, "uniform radii to sweep instead of C_rho");
  app.add_option("--w", variant);
  app.add_option("--threads", threads);
  CLI11_PARSE(app, argc, argv);

  using namespace gamblet;
  try {
    RunConfig cfg;
    cfg.q = q;
    cfg.epsilon = epsilon;
    cfg.variant = parse_w_variant(variant);
    const Problem p = build_problem(cfg);
    const ExactResult ex = exact_solve(p.mass, p.stiffness, p.load.rhs, p.tree, exact_options(cfg));
    const double norm = energy_norm(p.stiffness, ex.solution.u);

    auto run = [&](const FastOptions& o, const std::string& label) {
      const auto t0 = std::chrono::steady_clock::now();
      const FastResult f = fast_solve(p.mass, p.stiffness, p.load, p.tree, o);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      Vector d = ex.solution.u;
      axpy(-1.0, f.solution.u, d);
      std::printf("%-14s rel_err=%.3e  err/eps=%.2f  flops=%.3e  seconds=%.1f\n", label.c_str(),
                  energy_norm(p.stiffness, d) / norm, energy_norm(p.stiffness, d) / norm / epsilon,
                  static_cast<double>(f.report.total_flops()), secs);
      std::fflush(stdout);
    };

    if (!uniform.empty()) {
      for (int r : uniform) {
        FastOptions o = fast_options(cfg, threads);
        o.radii.assign(static_cast<std::size_t>(q) + 1, r);
        run(o, "rho=" + std::to_string(r));
      }
    } else {
      for (double c : c_values) {
        cfg.c_rho = c;
        run(fast_options(cfg, threads), "C_rho=" + std::to_string(c).substr(0, 5));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "calibrate: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
