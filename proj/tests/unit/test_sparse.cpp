#include <sstream>

#include <gtest/gtest.h>

#include "gamblet/grid_fem.hpp"
#include "gamblet/matrix_market.hpp"
#include "gamblet/sparse.hpp"
#include "test_util.hpp"

using namespace gamblet;
using gamblet::testing::random_sparse;
using gamblet::testing::rel_frobenius;
using gamblet::testing::view;

TEST(Sparse, RejectsUnsortedColumns) {
  EXPECT_THROW(CsrMatrix(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(CsrMatrix(1, 3, {0, 2}, {1, 1}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(CsrMatrix(2, 3, {0, 2}, {0, 1}, {1.0, 1.0}), std::invalid_argument);
}

TEST(Sparse, FromTripletsSumsDuplicates) {
  const auto a = CsrMatrix::from_triplets(2, 2, {{1, 1, 2.0}, {0, 1, 1.0}, {1, 1, 3.0}});
  EXPECT_EQ(a.nnz(), 2);
  EXPECT_DOUBLE_EQ(a.at(1, 1), 5.0);
  EXPECT_DOUBLE_EQ(a.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(a.at(0, 0), 0.0);
}

TEST(Sparse, SpmvIdentity) {
  const Vector x{1.0, -2.0, 3.5};
  EXPECT_EQ(spmv(CsrMatrix::identity(3), x), x);
}

TEST(Sparse, SpmvMassColumn) {
  const Grid g = build_grid(3);
  const CsrMatrix m = assemble_mass(g);
  const Index i = g.node(3, 4);
  Vector e(static_cast<std::size_t>(g.num_nodes()), 0.0);
  e[i] = 1.0;
  const Vector col = spmv(m, e);
  for (Index r = 0; r < g.num_nodes(); ++r) EXPECT_DOUBLE_EQ(col[r], m.at(r, i));
}

TEST(Sparse, SpmvDimensionMismatch) {
  EXPECT_THROW(spmv(CsrMatrix::identity(3), Vector(2, 1.0)), std::invalid_argument);
}

TEST(Sparse, SpmvMatchesDense) {
  std::mt19937_64 rng(1);
  const CsrMatrix a = random_sparse(5, 5, 0.6, rng);
  const Vector x = gamblet::testing::random_vector(5, rng);
  const Eigen::VectorXd ref = a.to_dense() * view(x);
  const Vector y = spmv(a, x);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(y[i], ref(i), 1e-14);
  const Eigen::VectorXd ref_t = a.to_dense().transpose() * view(x);
  const Vector yt = spmv_transpose(a, x);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(yt[i], ref_t(i), 1e-14);
}

TEST(Sparse, TripleProductTrivialCases) {
  const CsrMatrix a = CsrMatrix::identity(6);
  const CsrMatrix id_product = triple_product(CsrMatrix::identity(6), a);
  EXPECT_EQ(rel_frobenius(id_product.to_dense(), a.to_dense()), 0.0);

  std::vector<Triplet> ones;
  for (Index j = 0; j < 6; ++j) ones.push_back({0, j, 1.0});
  const CsrMatrix r = CsrMatrix::from_triplets(1, 6, ones);
  const CsrMatrix x = triple_product(r, a);
  ASSERT_EQ(x.rows(), 1);
  EXPECT_DOUBLE_EQ(x.at(0, 0), 6.0);
}

TEST(Sparse, TripleProductMatchesDense) {
  std::mt19937_64 rng(7);
  const CsrMatrix r = random_sparse(8, 8, 0.4, rng);
  const CsrMatrix b = random_sparse(8, 8, 0.4, rng);
  const CsrMatrix a = add(b, transpose(b));
  const Eigen::MatrixXd ref = r.to_dense() * a.to_dense() * r.to_dense().transpose();
  EXPECT_LE(rel_frobenius(triple_product(r, a).to_dense(), ref), 1e-13);
}

// Sparse products agree with dense products on random shapes up to 64x64.
TEST(Sparse, ProductsAgreeWithDenseProperty) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> dens(0.02, 0.5);
  for (int trial = 0; trial < 40; ++trial) {
    const Index m = dim(rng), k = dim(rng), n = dim(rng);
    const CsrMatrix a = random_sparse(m, k, dens(rng), rng);
    const CsrMatrix b = random_sparse(k, n, dens(rng), rng);
    const Eigen::MatrixXd ref = a.to_dense() * b.to_dense();
    OpCount ops;
    const Eigen::MatrixXd got = matmul(a, b, &ops).to_dense();
    EXPECT_LE((got - ref).norm(), 1e-13 * std::max(1.0, ref.norm())) << "trial " << trial;
    const CsrMatrix c = random_sparse(m, k, dens(rng), rng);
    EXPECT_LE((add(a, c, 2.0, -1.0).to_dense() - (2.0 * a.to_dense() - c.to_dense())).norm(),
              1e-13 * std::max(1.0, a.to_dense().norm()));
    EXPECT_EQ(transpose(transpose(a)).to_dense(), a.to_dense());
  }
}

TEST(Sparse, ExtractPrincipal) {
  const Grid g = build_grid(2);
  const CsrMatrix m = assemble_mass(g);
  std::vector<Index> all(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) all[i] = i;
  EXPECT_EQ(extract_principal(m, all).matrix.to_dense(), m.to_dense());

  const std::vector<Index> single{5};
  const auto one = extract_principal(m, single);
  ASSERT_EQ(one.matrix.rows(), 1);
  EXPECT_DOUBLE_EQ(one.matrix.at(0, 0), m.at(5, 5));

  const std::vector<Index> subset{0, 1, 4, 5, 10};
  const auto sub = extract_principal(m, subset);
  EXPECT_EQ(sub.global, subset);
  EXPECT_EQ(symmetry_defect(sub.matrix), 0.0);
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(sub.matrix.to_dense()).info(), Eigen::Success);

  const std::vector<Index> bad{3, 1};
  EXPECT_THROW(extract_principal(m, bad), std::invalid_argument);
  const std::vector<Index> out_of_range{0, 16};
  EXPECT_THROW(extract_principal(m, out_of_range), std::invalid_argument);
}

TEST(Sparse, DropSmall) {
  const auto a = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1e-20}, {1, 1, -2.0}});
  const CsrMatrix d = drop_small(a, 1e-14);
  EXPECT_EQ(d.nnz(), 2);
  EXPECT_DOUBLE_EQ(d.at(1, 1), -2.0);
}

TEST(MatrixMarket, RoundTripGeneralAndSymmetric) {
  std::mt19937_64 rng(3);
  const CsrMatrix a = random_sparse(7, 5, 0.4, rng);
  std::stringstream s;
  write_matrix_market(s, a);
  EXPECT_EQ(read_matrix_market(s).to_dense(), a.to_dense());

  const CsrMatrix m = assemble_mass(build_grid(2));
  std::stringstream t;
  write_matrix_market(t, m, MarketSymmetry::symmetric);
  EXPECT_NE(t.str().find("symmetric"), std::string::npos);
  EXPECT_EQ(read_matrix_market(t).to_dense(), m.to_dense());
}

TEST(MatrixMarket, RejectsMalformed) {
  std::stringstream bad("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
  EXPECT_THROW(read_matrix_market(bad), std::runtime_error);
  std::stringstream truncated("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n");
  EXPECT_THROW(read_matrix_market(truncated), std::runtime_error);
}
