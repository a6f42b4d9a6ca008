#include <gtest/gtest.h>

#include "gamblet/exact.hpp"
#include "gamblet/grid_fem.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/oracle.hpp"
#include "test_util.hpp"

using namespace gamblet;
using gamblet::testing::view;

namespace {

struct Problem {
  Grid grid;
  IndexTree tree;
  CoefficientField coef;
  CsrMatrix mass, stiffness;
  LoadVector load;
};

Problem make_problem(int q, bool rough) {
  Problem p;
  p.grid = build_grid(q);
  p.tree = build_hierarchy(p.grid);
  p.coef = rough ? coefficient_example1(p.grid) : coefficient_constant(p.grid, 1.0);
  p.mass = assemble_mass(p.grid);
  p.stiffness = assemble_stiffness(p.grid, p.coef);
  p.load = assemble_load(p.grid, p.mass, load_example1(p.grid));
  return p;
}

double max_row_energy_error(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& ref,
                            const Eigen::MatrixXd& a) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    const Eigen::VectorXd d = (psi.row(i) - ref.row(i)).transpose();
    const Eigen::VectorXd r = ref.row(i).transpose();
    worst = std::max(worst, std::sqrt(d.dot(a * d) / r.dot(a * r)));
  }
  return worst;
}

}  // namespace

class ExactVsOracle : public ::testing::TestWithParam<std::tuple<int, bool, WVariant>> {};

TEST_P(ExactVsOracle, GambletsMatchDenseMinimizers) {
  const auto [q, rough, variant] = GetParam();
  const Problem p = make_problem(q, rough);
  ExactOptions opts;
  opts.variant = variant;
  opts.tol_mass = 1e-13;
  opts.tol_subband = 1e-13;
  const ExactResult res = exact_solve(p.mass, p.stiffness, p.load.rhs, p.tree, opts);
  const Eigen::MatrixXd a = p.stiffness.to_dense();
  for (int k = 1; k <= q; ++k) {
    const Eigen::MatrixXd phi = measurement_matrix(p.tree, p.mass, k).to_dense();
    const Eigen::MatrixXd ref = oracle::dense_gamblets(a, phi);
    EXPECT_LE(max_row_energy_error(res.levels[k].psi, ref, a), 1e-8) << "k=" << k;
    const Eigen::MatrixXd prod = res.levels[k].stiffness * oracle::dense_theta(a, phi);
    EXPECT_LE((prod - Eigen::MatrixXd::Identity(prod.rows(), prod.cols())).cwiseAbs().maxCoeff(),
              1e-8)
        << "k=" << k;
  }
  // The multiresolution sum solves the fine problem.
  const Eigen::VectorXd u_ref = oracle::dense_solve(a, view(p.load.rhs)).x;
  const Eigen::VectorXd diff = view(res.solution.u) - u_ref;
  EXPECT_LE(std::sqrt(diff.dot(a * diff) / u_ref.dot(a * u_ref)), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Small, ExactVsOracle,
                         ::testing::Combine(::testing::Values(2, 3), ::testing::Bool(),
                                            ::testing::Values(WVariant::chain,
                                                              WVariant::orthonormal)));

TEST(Exact, LevelIdentities) {
  const Problem p = make_problem(4, true);
  const ExactResult res = exact_solve(p.mass, p.stiffness, p.load.rhs, p.tree);
  for (int k = 2; k <= 4; ++k) {
    const GambletLevel& lv = res.levels[k];
    const Eigen::MatrixXd pi = build_pi(p.tree, k - 1).pi.to_dense();
    const Eigen::MatrixXd rpi = lv.restriction * pi.transpose();
    EXPECT_LE((rpi - Eigen::MatrixXd::Identity(rpi.rows(), rpi.cols())).norm(), 1e-10);
    const Eigen::MatrixXd raw = lv.restriction * lv.stiffness * lv.w.to_dense().transpose();
    EXPECT_LE(raw.norm() / lv.stiffness.norm(), 1e-10);
    const Eigen::MatrixXd coarse = lv.restriction * lv.stiffness * lv.restriction.transpose();
    EXPECT_LE((coarse - res.levels[k - 1].stiffness).norm() / coarse.norm(), 1e-10);
  }
}

TEST(Exact, IncrementsAreEnergyOrthogonal) {
  const Problem p = make_problem(4, true);
  const ExactResult res = exact_solve(p.mass, p.stiffness, p.load.rhs, p.tree);
  const auto& inc = res.solution.increments;
  for (int i = 1; i <= 4; ++i) {
    for (int j = i + 1; j <= 4; ++j) {
      const double c = energy_inner(p.stiffness, inc[i], inc[j]);
      const double s = energy_norm(p.stiffness, inc[i]) * energy_norm(p.stiffness, inc[j]);
      EXPECT_LE(std::abs(c), 1e-8 * s) << i << "," << j;
    }
  }
  // partial_sum(q) reproduces u.
  const Vector uq = res.solution.partial_sum(4);
  for (std::size_t i = 0; i < uq.size(); ++i) EXPECT_NEAR(uq[i], res.solution.u[i], 1e-12);
}

TEST(Exact, ResolveMatchesFreshSolve) {
  const Problem p = make_problem(3, true);
  const ExactResult res = exact_solve(p.mass, p.stiffness, p.load.rhs, p.tree);
  Vector b2(p.load.rhs.size());
  for (std::size_t i = 0; i < b2.size(); ++i) b2[i] = std::sin(0.3 * static_cast<double>(i));
  const MultiresSolution again = exact_resolve(res.levels, b2);
  const ExactResult fresh = exact_solve(p.mass, p.stiffness, b2, p.tree);
  for (std::size_t i = 0; i < b2.size(); ++i) EXPECT_NEAR(again.u[i], fresh.solution.u[i], 1e-10);
}

TEST(Exact, NodalInitStillSolves) {
  const Problem p = make_problem(3, true);
  ExactOptions opts;
  opts.nodal_init = true;
  const ExactResult res = exact_solve(p.mass, p.stiffness, p.load.rhs, p.tree, opts);
  const Eigen::MatrixXd a = p.stiffness.to_dense();
  const Eigen::VectorXd u_ref = oracle::dense_solve(a, view(p.load.rhs)).x;
  EXPECT_LE((view(res.solution.u) - u_ref).norm() / u_ref.norm(), 1e-8);
}
