#include <algorithm>

#include <gtest/gtest.h>
#include <json.hpp>

#include "gamblet/hierarchy.hpp"

using namespace gamblet;

TEST(IndexTree, ParentChildren) {
  const IndexTree t(4);
  EXPECT_EQ(t.size(3), 64);
  EXPECT_EQ(t.subband_size(3), 48);
  EXPECT_DOUBLE_EQ(t.resolution(3), 0.125);
  for (int k = 1; k < 4; ++k) {
    for (Index i = 0; i < t.size(k); ++i) {
      for (Index c : t.children(k, i)) EXPECT_EQ(t.parent(k + 1, c), i);
    }
  }
  const auto ch = t.children(1, 3);  // aggregate (1,1) at level 1
  EXPECT_EQ(ch[0], 2 + 4 * 2);
  EXPECT_EQ(ch[1], 3 + 4 * 2);
  EXPECT_EQ(ch[2], 2 + 4 * 3);
  EXPECT_EQ(ch[3], 3 + 4 * 3);
}

TEST(IndexTree, AggregateOfNodeAndCenter) {
  const Grid g = build_grid(3);
  const IndexTree t = build_hierarchy(g);
  EXPECT_EQ(t.aggregate_of_node(1, g.node(5, 2)), 1);
  EXPECT_EQ(t.aggregate_of_node(3, g.node(5, 2)), g.node(5, 2));
  const auto [cx, cy] = t.center(1, 0, g.h);
  EXPECT_NEAR(cx, 2.5 * g.h, 1e-15);
  EXPECT_NEAR(cy, 2.5 * g.h, 1e-15);
}

TEST(Pi, RowsAndNormalization) {
  const IndexTree t(3);
  const Aggregation p = build_pi(t, 2);
  EXPECT_EQ(p.pi.rows(), 16);
  EXPECT_EQ(p.pi.cols(), 64);
  for (Index i = 0; i < 16; ++i) {
    EXPECT_EQ(p.pi.row_nnz(i), 4);
    double s = 0.0;
    for (double v : p.pi_bar.row_values(i)) s += v;
    EXPECT_DOUBLE_EQ(s, 1.0);
  }
  // pi_bar pi^T = I
  const auto prod = matmul(p.pi_bar, transpose(p.pi));
  EXPECT_EQ(prod.to_dense(), Eigen::MatrixXd::Identity(16, 16));
  EXPECT_THROW(build_pi(t, 3), std::invalid_argument);
}

TEST(Pi, ChainedAggregationMatchesDirect) {
  const IndexTree t(3);
  const auto direct = aggregation_to_fine(t, 1);
  const auto chained = matmul(build_pi(t, 1).pi, build_pi(t, 2).pi);
  EXPECT_EQ(direct.to_dense(), chained.to_dense());
}

class WVariants : public ::testing::TestWithParam<WVariant> {};

TEST_P(WVariants, OrthogonalToPi) {
  const IndexTree t(3);
  for (int k = 2; k <= 3; ++k) {
    const NullBasis w = build_w(t, k, GetParam());
    EXPECT_EQ(w.w.rows(), t.subband_size(k));
    const auto wpi = matmul(w.w, transpose(build_pi(t, k - 1).pi));
    EXPECT_LE(wpi.to_dense().cwiseAbs().maxCoeff(), 1e-15);
  }
}

INSTANTIATE_TEST_SUITE_P(Hierarchy, WVariants,
                         ::testing::Values(WVariant::chain, WVariant::orthonormal));

TEST(W, OrthonormalRows) {
  const IndexTree t(3);
  const auto w = build_w(t, 3, WVariant::orthonormal).w;
  const Eigen::MatrixXd g = w.to_dense() * w.to_dense().transpose();
  EXPECT_LE((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).norm(), 1e-14);
}

TEST(W, ChainRowPattern) {
  const IndexTree t(2);
  const auto w = build_w(t, 2, WVariant::chain).w;
  const auto ch = t.children(1, 0);
  EXPECT_DOUBLE_EQ(w.at(0, ch[0]), 1.0);
  EXPECT_DOUBLE_EQ(w.at(0, ch[1]), -1.0);
  EXPECT_DOUBLE_EQ(w.at(1, ch[1]), 1.0);
  EXPECT_DOUBLE_EQ(w.at(1, ch[2]), -1.0);
  EXPECT_DOUBLE_EQ(w.at(2, ch[3]), -1.0);
}

TEST(WVariantNames, RoundTrip) {
  EXPECT_EQ(parse_w_variant(to_string(WVariant::orthonormal)), WVariant::orthonormal);
  EXPECT_EQ(parse_w_variant("chain"), WVariant::chain);
  EXPECT_THROW(parse_w_variant("haar"), std::invalid_argument);
}

TEST(Neighborhood, CornerInteriorAndFull) {
  const IndexTree t(4);
  // rho = 0 keeps touching boxes only.
  EXPECT_EQ(neighborhood(t, 3, 0, 0.0), (std::vector<Index>{0, 1, 8, 9}));
  const auto interior = neighborhood(t, 3, 3 + 8 * 3, 0.0);
  EXPECT_EQ(interior.size(), 9u);
  EXPECT_TRUE(std::is_sorted(interior.begin(), interior.end()));
  EXPECT_EQ(neighborhood(t, 3, 27, 1.0).size(), 25u);
  EXPECT_EQ(neighborhood(t, 2, 5, 10.0).size(), 16u);
}

TEST(Neighborhood, ChiIsThreeSubbandsPerParent) {
  const IndexTree t(3);
  const auto parents = neighborhood(t, 2, 5, 0.0);
  const auto chi = chi_neighborhood(t, 3, 5, 0.0);
  ASSERT_EQ(chi.size(), 3 * parents.size());
  for (Index j : chi) {
    EXPECT_TRUE(std::binary_search(parents.begin(), parents.end(), t.subband_parent(j)));
  }
}

TEST(TreeSummary, ValidJson) {
  const Grid g = build_grid(3);
  const auto j = nlohmann::json::parse(tree_summary_json(build_hierarchy(g), g));
  EXPECT_TRUE(j.contains("levels"));
  EXPECT_EQ(j["levels"].size(), 3u);
}
