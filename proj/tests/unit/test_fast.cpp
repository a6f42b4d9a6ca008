#include <gtest/gtest.h>

#include <cmath>

#include "gamblet/exact.hpp"
#include "gamblet/fast.hpp"
#include "gamblet/grid_fem.hpp"
#include "gamblet/hierarchy.hpp"
#include "test_util.hpp"

using namespace gamblet;

namespace {

struct Fixture {
  Grid grid;
  IndexTree tree;
  CoefficientField coef;
  CsrMatrix mass, stiffness;
  LoadVector load;
};

Fixture make_fixture(int q, bool rough) {
  Fixture s;
  s.grid = build_grid(q);
  s.tree = build_hierarchy(s.grid);
  s.coef = rough ? coefficient_example1(s.grid) : coefficient_constant(s.grid, 1.0);
  s.mass = assemble_mass(s.grid);
  s.stiffness = assemble_stiffness(s.grid, s.coef);
  s.load = assemble_load(s.grid, s.mass, load_example1(s.grid));
  return s;
}

double relative_error(const CsrMatrix& a, const Vector& ref, const Vector& x) {
  Vector d = ref;
  axpy(-1.0, x, d);
  return energy_norm(a, d) / energy_norm(a, ref);
}

FastOptions covering(int q) {
  FastOptions o;
  o.radii.assign(static_cast<std::size_t>(q) + 1, 0);
  for (int k = 1; k <= q; ++k) o.radii[k] = covering_radius(k);
  o.epsilon = 1e-9;
  o.load_shortcut = false;
  return o;
}

}  // namespace

TEST(Schedule, FollowsFormulaAndClips) {
  const LocalizationSchedule s = make_schedule(7, 1e-3, 0.45);
  ASSERT_EQ(s.depth(), 7);
  for (int k = 1; k <= 7; ++k) {
    const double raw =
        std::ceil(0.45 * ((1.0 + 1.0 / std::log(2.0)) * k * std::log(2.0) + std::log(1e3)));
    EXPECT_EQ(s.rho[k], std::max(1, std::min(static_cast<int>(raw), covering_radius(k))));
  }
  // Level 1 and 2 are clipped to their covering radius.
  EXPECT_EQ(s.rho[1], 1);
  EXPECT_EQ(s.rho[2], 2);
}

TEST(Schedule, RadiusGrowsWithAccuracy) {
  const LocalizationSchedule loose = make_schedule(10, 1e-2);
  const LocalizationSchedule tight = make_schedule(10, 1e-8);
  for (int k = 1; k <= 10; ++k) EXPECT_LE(loose.rho[k], tight.rho[k]);
  EXPECT_LT(loose.rho[10], tight.rho[10]);
}

TEST(Schedule, RejectsBadArguments) {
  EXPECT_THROW(make_schedule(4, 0.0), std::invalid_argument);
  EXPECT_THROW(make_schedule(4, 1.0), std::invalid_argument);
  EXPECT_THROW(make_schedule(4, 1e-3, -1.0), std::invalid_argument);
  EXPECT_THROW(make_schedule(0, 1e-3), std::invalid_argument);
  EXPECT_THROW(uniform_schedule(4, 0, 1e-3), std::invalid_argument);
}

TEST(Schedule, UniformIsClippedPerLevel) {
  const LocalizationSchedule s = uniform_schedule(5, 5, 1e-3);
  EXPECT_EQ(s.rho[1], 1);
  EXPECT_EQ(s.rho[2], 2);
  EXPECT_EQ(s.rho[3], 5);
  EXPECT_EQ(s.rho[5], 5);
}

TEST(Tolerances, ShrinkWithEpsilonAndStayClamped) {
  const InnerTolerances a = make_tolerances(6, 1e-3, 1.0);
  const InnerTolerances b = make_tolerances(6, 1e-6, 1.0);
  EXPECT_LT(b.subband, a.subband);
  EXPECT_LE(b.mass, a.mass);
  for (int k = 2; k <= 6; ++k) {
    EXPECT_GE(b.patch[k], 1e-14);
    EXPECT_LE(a.patch[k], 1e-2);
  }
}

TEST(LocalMassInverse, CoveringPatchReproducesInverse) {
  const Grid g = build_grid(3);
  const IndexTree tree = build_hierarchy(g);
  const CsrMatrix m = assemble_mass(g);
  const CsrMatrix inv = local_mass_inverse(m, tree, covering_radius(3), 1e-13);
  const Eigen::MatrixXd prod = inv.to_dense() * m.to_dense();
  EXPECT_LE((prod - Eigen::MatrixXd::Identity(prod.rows(), prod.cols())).cwiseAbs().maxCoeff(),
            1e-9);
}

TEST(LocalMassInverse, SmallPatchIsSparse) {
  const Grid g = build_grid(5);
  const IndexTree tree = build_hierarchy(g);
  const CsrMatrix inv = local_mass_inverse(assemble_mass(g), tree, 2, 1e-10);
  // Each row lives on at most (2 * (floor(rho) + 1) + 1)^2 nodes.
  EXPECT_LE(inv.nnz(), g.num_nodes() * 49);
  EXPECT_LT(inv.nnz(), g.num_nodes() * g.num_nodes() / 4);
}

class FastCovering : public ::testing::TestWithParam<std::tuple<bool, WVariant>> {};

TEST_P(FastCovering, MatchesExactPipeline) {
  const auto [rough, variant] = GetParam();
  const Fixture s = make_fixture(4, rough);
  ExactOptions eo;
  eo.variant = variant;
  eo.tol_mass = 1e-13;
  eo.tol_subband = 1e-13;
  const ExactResult ex = exact_solve(s.mass, s.stiffness, s.load.rhs, s.tree, eo);
  FastOptions fo = covering(4);
  fo.variant = variant;
  const FastResult fr = fast_solve(s.mass, s.stiffness, s.load, s.tree, fo);
  EXPECT_LE(relative_error(s.stiffness, ex.solution.u, fr.solution.u), 1e-6);
  for (int k = 1; k <= 4; ++k) {
    const Eigen::MatrixXd a_loc = fr.levels[k].stiffness.to_dense();
    EXPECT_LE(gamblet::testing::rel_frobenius(a_loc, ex.levels[k].stiffness), 1e-6) << "k=" << k;
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, FastCovering,
                         ::testing::Combine(::testing::Bool(),
                                            ::testing::Values(WVariant::chain,
                                                              WVariant::orthonormal)));

TEST(Fast, ErrorShrinksWithRadius) {
  const Fixture s = make_fixture(4, true);
  const ExactResult ex = exact_solve(s.mass, s.stiffness, s.load.rhs, s.tree);
  double previous = 1.0;
  for (int rho : {1, 2, 3}) {
    FastOptions o;
    o.radii.assign(5, rho);
    o.epsilon = 1e-8;
    const FastResult fr = fast_solve(s.mass, s.stiffness, s.load, s.tree, o);
    const double err = relative_error(s.stiffness, ex.solution.u, fr.solution.u);
    EXPECT_LT(err, previous) << "rho=" << rho;
    previous = err;
  }
}

TEST(Fast, PsiTransposeMatchesMaterializedRows) {
  const Fixture s = make_fixture(4, true);
  FastOptions o;
  o.materialize_bases = true;
  const FastResult fr = fast_solve(s.mass, s.stiffness, s.load, s.tree, o);
  std::mt19937_64 rng(5);
  for (int k = 1; k <= 4; ++k) {
    const CsrMatrix psi = materialize_psi(fr.levels, k);
    const Vector c = gamblet::testing::random_vector(static_cast<std::size_t>(psi.rows()), rng);
    const Vector direct = spmv_transpose(psi, c);
    const Vector chained = apply_psi_transpose(fr.levels, k, c);
    ASSERT_EQ(direct.size(), chained.size());
    for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_NEAR(direct[i], chained[i], 1e-10);
  }
}

TEST(Fast, ResolveReusesLevels) {
  const Fixture s = make_fixture(4, true);
  const FastResult fr = fast_solve(s.mass, s.stiffness, s.load, s.tree);
  const MultiresSolution again = fast_resolve(fr, s.load);
  for (std::size_t i = 0; i < again.u.size(); ++i) EXPECT_NEAR(again.u[i], fr.solution.u[i], 1e-12);

  Vector g2(s.load.nodal.size());
  for (std::size_t i = 0; i < g2.size(); ++i) g2[i] = std::cos(0.1 * static_cast<double>(i));
  const LoadVector l2 = assemble_load(s.grid, s.mass, g2);
  const MultiresSolution other = fast_resolve(fr, l2);
  const FastResult fresh = fast_solve(s.mass, s.stiffness, l2, s.tree);
  EXPECT_LE(relative_error(s.stiffness, fresh.solution.u, other.u), 1e-8);
}

TEST(Fast, ZeroLoadGivesZeroSolution) {
  Fixture s = make_fixture(3, true);
  s.load = assemble_load(s.grid, s.mass, Vector(s.load.nodal.size(), 0.0));
  const FastResult fr = fast_solve(s.mass, s.stiffness, s.load, s.tree);
  for (double v : fr.solution.u) EXPECT_EQ(v, 0.0);
}

TEST(Fast, ComplexityReportCountsLines) {
  const Fixture s = make_fixture(4, true);
  const FastResult fr = fast_solve(s.mass, s.stiffness, s.load, s.tree);
  for (const char* line : {"line3", "line5", "line7", "line8", "line11", "line13"}) {
    ASSERT_TRUE(fr.report.lines.count(line)) << line;
    EXPECT_GT(fr.report.lines.at(line).flops, 0u) << line;
  }
  EXPECT_EQ(fr.report.total_flops(), [&] {
    std::uint64_t t = 0;
    for (const auto& [name, st] : fr.report.lines) t += st.flops;
    return t;
  }());
  const nlohmann::json j = to_json(fr.report);
  EXPECT_TRUE(j.contains("lines"));
  EXPECT_FALSE(fr.report.cg_histograms.at("line11").empty());
}

TEST(Fast, FlopCountIsDeterministicAcrossThreads) {
  const Fixture s = make_fixture(4, true);
  FastOptions one, many;
  many.threads = 4;
  const FastResult a = fast_solve(s.mass, s.stiffness, s.load, s.tree, one);
  const FastResult b = fast_solve(s.mass, s.stiffness, s.load, s.tree, many);
  EXPECT_EQ(a.report.total_flops(), b.report.total_flops());
  for (std::size_t i = 0; i < a.solution.u.size(); ++i) EXPECT_EQ(a.solution.u[i], b.solution.u[i]);
}
