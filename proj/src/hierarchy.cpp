#include "gamblet/hierarchy.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace gamblet {

namespace {

void check_level(const IndexTree& tree, int k, int lo) {
  if (k < lo || k > tree.depth()) {
    throw std::invalid_argument("hierarchy: level " + std::to_string(k) +
                                " outside [" + std::to_string(lo) + ", " +
                                std::to_string(tree.depth()) + "]");
  }
}

}  // namespace

double IndexTree::resolution(int k) const { return std::ldexp(1.0, -k); }

Index IndexTree::parent(int k, Index i) const {
  const Index s = side(k);
  return (i % s) / 2 + side(k - 1) * ((i / s) / 2);
}

std::array<Index, 4> IndexTree::children(int k, Index i) const {
  const Index s = side(k);
  const Index cs = side(k + 1);
  const Index x = 2 * (i % s);
  const Index y = 2 * (i / s);
  return {x + cs * y, x + 1 + cs * y, x + cs * (y + 1), x + 1 + cs * (y + 1)};
}

Index IndexTree::aggregate_of_node(int k, Index node) const {
  const Index n = side(q_);
  const int shift = q_ - k;
  return ((node % n) >> shift) + side(k) * ((node / n) >> shift);
}

std::pair<double, double> IndexTree::center(int k, Index i, double h) const {
  const double width = std::ldexp(1.0, q_ - k);
  const Index s = side(k);
  const double x = (static_cast<double>(i % s) * width + (width - 1.0) / 2.0 + 1.0) * h;
  const double y = (static_cast<double>(i / s) * width + (width - 1.0) / 2.0 + 1.0) * h;
  return {x, y};
}

IndexTree build_hierarchy(const Grid& grid) {
  if (grid.q < 1 || grid.n != (Index{1} << grid.q)) {
    throw std::invalid_argument("build_hierarchy: nodes per side must be 2^q");
  }
  return IndexTree(grid.q);
}

Aggregation build_pi(const IndexTree& tree, int k) {
  if (k < 1 || k >= tree.depth()) {
    throw std::invalid_argument("build_pi: need 1 <= k < q");
  }
  std::vector<Triplet> ones, quarters;
  for (Index i = 0; i < tree.size(k); ++i) {
    for (Index c : tree.children(k, i)) {
      ones.push_back({i, c, 1.0});
      quarters.push_back({i, c, 0.25});
    }
  }
  return {CsrMatrix::from_triplets(tree.size(k), tree.size(k + 1), std::move(ones)),
          CsrMatrix::from_triplets(tree.size(k), tree.size(k + 1), std::move(quarters))};
}

CsrMatrix aggregation_to_fine(const IndexTree& tree, int k) {
  check_level(tree, k, 1);
  const Index n_fine = tree.size(tree.depth());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n_fine));
  for (Index node = 0; node < n_fine; ++node) {
    t.push_back({tree.aggregate_of_node(k, node), node, 1.0});
  }
  return CsrMatrix::from_triplets(tree.size(k), n_fine, std::move(t));
}

CsrMatrix measurement_matrix(const IndexTree& tree, const CsrMatrix& mass, int k) {
  return matmul(aggregation_to_fine(tree, k), mass);
}

std::string to_string(WVariant v) {
  return v == WVariant::chain ? "chain" : "orthonormal";
}

WVariant parse_w_variant(const std::string& s) {
  if (s == "chain") return WVariant::chain;
  if (s == "orthonormal") return WVariant::orthonormal;
  throw std::invalid_argument("unknown W variant '" + s + "' (chain|orthonormal)");
}

NullBasis build_w(const IndexTree& tree, int k, WVariant variant) {
  check_level(tree, k, 2);
  // Rows of the per-parent block acting on the children (SW, SE, NW, NE).
  static constexpr double kChain[3][4] = {
      {1.0, -1.0, 0.0, 0.0}, {0.0, 1.0, -1.0, 0.0}, {0.0, 0.0, 1.0, -1.0}};
  const double r2 = 1.0 / std::sqrt(2.0);
  const double r6 = 1.0 / std::sqrt(6.0);
  const double r12 = 1.0 / std::sqrt(12.0);
  const double kOrtho[3][4] = {{r2, -r2, 0.0, 0.0},
                               {r6, r6, -2.0 * r6, 0.0},
                               {r12, r12, r12, -3.0 * r12}};
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(tree.subband_size(k)) * 4);
  for (Index s = 0; s < tree.size(k - 1); ++s) {
    const auto ch = tree.children(k - 1, s);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        const double v = variant == WVariant::chain ? kChain[r][c] : kOrtho[r][c];
        if (v != 0.0) t.push_back({3 * s + r, ch[c], v});
      }
    }
  }
  return {CsrMatrix::from_triplets(tree.subband_size(k), tree.size(k), std::move(t)), variant};
}

std::vector<Index> neighborhood(const IndexTree& tree, int k, Index i, double rho) {
  check_level(tree, k, 1);
  if (!(rho >= 0.0)) throw std::invalid_argument("neighborhood: rho must be >= 0");
  const Index s = tree.side(k);
  if (i < 0 || i >= tree.size(k)) throw std::invalid_argument("neighborhood: index out of range");
  // Boxes at index offset d are (|d| - 1) H_k apart in the max norm.
  const double reach = std::floor(rho) + 1.0;
  const Index w = reach >= static_cast<double>(s) ? s : static_cast<Index>(reach);
  const Index x = i % s;
  const Index y = i / s;
  std::vector<Index> out;
  for (Index yy = std::max<Index>(0, y - w); yy <= std::min<Index>(s - 1, y + w); ++yy) {
    for (Index xx = std::max<Index>(0, x - w); xx <= std::min<Index>(s - 1, x + w); ++xx) {
      out.push_back(xx + s * yy);
    }
  }
  return out;
}

std::vector<Index> chi_neighborhood(const IndexTree& tree, int k, Index i, double rho) {
  check_level(tree, k, 2);
  const auto parents = neighborhood(tree, k - 1, i, rho);
  std::vector<Index> out;
  out.reserve(parents.size() * 3);
  for (Index p : parents) {
    for (Index t = 0; t < 3; ++t) out.push_back(3 * p + t);
  }
  return out;
}

std::string tree_summary_json(const IndexTree& tree, const Grid& grid) {
  nlohmann::json j;
  j["depth"] = tree.depth();
  j["H"] = 0.5;
  j["mesh_size"] = grid.h;
  nlohmann::json levels = nlohmann::json::array();
  for (int k = 1; k <= tree.depth(); ++k) {
    const Index width = Index{1} << (tree.depth() - k);
    nlohmann::json lv;
    lv["level"] = k;
    lv["aggregates"] = tree.size(k);
    lv["subbands"] = k >= 2 ? tree.subband_size(k) : 0;
    lv["H_k"] = tree.resolution(k);
    lv["nodes_per_aggregate"] = width * width;
    nlohmann::json boxes = nlohmann::json::array();
    for (Index a = 0; a < tree.size(k); ++a) {
      const Index x0 = (a % tree.side(k)) * width;
      const Index y0 = (a / tree.side(k)) * width;
      boxes.push_back({x0, y0, x0 + width - 1, y0 + width - 1});
    }
    lv["node_boxes"] = std::move(boxes);
    levels.push_back(std::move(lv));
  }
  j["levels"] = std::move(levels);
  return j.dump(2);
}

}  // namespace gamblet
