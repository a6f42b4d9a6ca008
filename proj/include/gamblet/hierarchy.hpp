#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "gamblet/grid_fem.hpp"
#include "gamblet/sparse.hpp"

namespace gamblet {

/// Dyadic quadtree over the interior nodes (H = 1/2). Level k in [1, q] has
/// 2^k x 2^k aggregates numbered X + 2^k Y; level q aggregates are the fine
/// nodes themselves. Subband indices at level k are 3*parent + t with
/// t in {0, 1, 2} and parent a level k-1 aggregate.
class IndexTree {
 public:
  IndexTree() = default;
  explicit IndexTree(int depth) : q_(depth) {}

  int depth() const { return q_; }
  Index side(int k) const { return Index{1} << k; }
  Index size(int k) const { return side(k) * side(k); }
  Index subband_size(int k) const { return size(k) - size(k - 1); }
  double resolution(int k) const;  // H_k = 2^-k

  Index parent(int k, Index i) const;
  /// Children at level k+1 in fixed order SW, SE, NW, NE.
  std::array<Index, 4> children(int k, Index i) const;
  Index aggregate_of_node(int k, Index node) const;
  /// Level k-1 aggregate owning subband index j of level k.
  Index subband_parent(Index j) const { return j / 3; }

  /// Mean position of the fine nodes inside aggregate i of level k.
  std::pair<double, double> center(int k, Index i, double h) const;

 private:
  int q_ = 0;
};

/// Throws std::invalid_argument unless the grid has n = 2^q nodes per side.
IndexTree build_hierarchy(const Grid& grid);

struct Aggregation {
  CsrMatrix pi;      // pi^(k,k+1), 0/1 entries
  CsrMatrix pi_bar;  // pi / m_i with m_i = 4
};

/// pi^(k,k+1) and its normalized form, 1 <= k < q.
Aggregation build_pi(const IndexTree& tree, int k);
/// pi^(k,q): level-k aggregate indicator over fine nodes.
CsrMatrix aggregation_to_fine(const IndexTree& tree, int k);
/// Phi^(k) = pi^(k,q) M: level-k measurements of fine nodal coefficients.
CsrMatrix measurement_matrix(const IndexTree& tree, const CsrMatrix& mass, int k);

enum class WVariant { chain, orthonormal };

std::string to_string(WVariant v);
WVariant parse_w_variant(const std::string& s);

struct NullBasis {
  CsrMatrix w;  // J^(k) x I^(k)
  WVariant variant = WVariant::chain;
};

/// W^(k) for 2 <= k <= q; rows are orthogonal to (1,1,1,1) inside each
/// parent block.
NullBasis build_w(const IndexTree& tree, int k, WVariant variant);

/// Level-k aggregates whose boxes lie within Chebyshev distance H_k*rho of
/// aggregate i (touching boxes are at distance 0). Sorted; contains i.
std::vector<Index> neighborhood(const IndexTree& tree, int k, Index i, double rho);
/// Level-k subband indices whose parent lies in the level-(k-1)
/// neighborhood of i (a level k-1 aggregate). Sorted.
std::vector<Index> chi_neighborhood(const IndexTree& tree, int k, Index i, double rho);

/// Level sizes, H_k and aggregate boxes as JSON text.
std::string tree_summary_json(const IndexTree& tree, const Grid& grid);

}  // namespace gamblet
