#include <cmath>

#include <gtest/gtest.h>

#include "gamblet/errors.hpp"
#include "gamblet/grid_fem.hpp"
#include "gamblet/krylov.hpp"
#include "gamblet/oracle.hpp"
#include "test_util.hpp"

using namespace gamblet;
using gamblet::testing::random_spd;
using gamblet::testing::random_vector;
using gamblet::testing::view;

TEST(Cg, SolvesSpdToTolerance) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd a = random_spd(30, rng);
  const Vector b = random_vector(30, rng);
  Vector x(30, 0.0);
  const CgReport rep = cg_solve(a, b, x, {.rel_tol = 1e-12});
  EXPECT_TRUE(rep.converged);
  EXPECT_FALSE(rep.breakdown);
  const Eigen::VectorXd ref = oracle::dense_solve(a, view(b)).x;
  EXPECT_LE((view(x) - ref).norm() / ref.norm(), 1e-10);
}

TEST(Cg, ZeroRhsGivesZero) {
  Vector x(4, 3.0);
  const CgReport rep = cg_solve(CsrMatrix::identity(4), Vector(4, 0.0), x);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 0);
  for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(Cg, IdentityConvergesInOneStep) {
  Vector x(5, 0.0);
  const Vector b{1, 2, 3, 4, 5};
  const CgReport rep = cg_solve(CsrMatrix::identity(5), b, x);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(x, b);
}

TEST(Cg, IndefiniteFlagsBreakdown) {
  const auto a = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
  Vector x(2, 0.0);
  const Vector b{0.0, 1.0};
  const CgReport rep = cg_solve(a, b, x);
  EXPECT_TRUE(rep.breakdown);
  EXPECT_FALSE(rep.converged);
}

TEST(Cg, MaxIterReportsNotConverged) {
  const CsrMatrix a = assemble_stiffness(build_grid(4), coefficient_constant(build_grid(4), 1.0));
  Vector x(static_cast<std::size_t>(a.rows()), 0.0);
  const Vector b(static_cast<std::size_t>(a.rows()), 1.0);
  const CgReport rep = cg_solve(a, b, x, {.rel_tol = 1e-14, .max_iter = 3});
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.iterations, 3);
}

TEST(Cg, RejectsBadTolerance) {
  Vector x(1, 0.0);
  EXPECT_THROW(cg_solve(CsrMatrix::identity(1), Vector{1.0}, x, {.rel_tol = 0.0}),
               std::invalid_argument);
}

TEST(Cg, CountsFlops) {
  OpCount ops;
  Vector x(5, 0.0);
  cg_solve(CsrMatrix::identity(5), Vector(5, 1.0), x, {}, &ops);
  EXPECT_GT(ops.flops, 0u);
}

TEST(Cg, IterationBound) {
  EXPECT_NEAR(cg_iteration_bound(100.0, 1e-6), 0.5 * 10.0 * std::log(2e6), 1e-12);
}

TEST(EigExtremes, DiagonalMatrix) {
  std::vector<Triplet> t;
  for (Index i = 0; i < 20; ++i) t.push_back({i, i, 1.0 + i});
  const EigExtremes e = eig_extremes(CsrMatrix::from_triplets(20, 20, t), 1e-10);
  EXPECT_NEAR(e.lambda_max, 20.0, 1e-6);
  EXPECT_NEAR(e.lambda_min, 1.0, 1e-8);
  EXPECT_NEAR(e.cond(), 20.0, 1e-5);
}

TEST(EigExtremes, MatchesDenseOnLaplacian) {
  const Grid g = build_grid(3);
  const CsrMatrix a = assemble_stiffness(g, coefficient_example1(g));
  const Eigen::VectorXd ev = oracle::dense_eigenvalues(a.to_dense());
  const EigExtremes e = eig_extremes(a, 1e-10);
  EXPECT_NEAR(e.lambda_max / ev(ev.size() - 1), 1.0, 1e-4);
  EXPECT_NEAR(e.lambda_min / ev(0), 1.0, 1e-6);
}
