#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gamblet {

using Index = std::int32_t;
using Vector = std::vector<double>;

/// Multiply-add counter threaded through the kernels. One fused multiply-add
/// counts as two flops.
struct OpCount {
  std::uint64_t flops = 0;
  void add(std::uint64_t f) { flops += f; }
};

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; instances are immutable once built.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols);
  /// Takes ownership of raw CSR arrays; throws std::invalid_argument if the
  /// arrays violate the storage invariants.
  CsrMatrix(Index rows, Index cols, std::vector<std::int64_t> offsets,
            std::vector<Index> indices, std::vector<double> values);

  static CsrMatrix identity(Index n);
  /// Duplicate (row, col) pairs are summed.
  static CsrMatrix from_triplets(Index rows, Index cols,
                                 std::vector<Triplet> triplets);
  /// Entries with |value| <= drop are skipped.
  static CsrMatrix from_dense(const Eigen::MatrixXd& dense, double drop = 0.0);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(values_.size()); }

  std::span<const std::int64_t> offsets() const { return offsets_; }
  std::span<const Index> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  std::span<const Index> row_indices(Index i) const {
    return {indices_.data() + offsets_[i],
            static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }
  std::span<const double> row_values(Index i) const {
    return {values_.data() + offsets_[i],
            static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }
  Index row_nnz(Index i) const {
    return static_cast<Index>(offsets_[i + 1] - offsets_[i]);
  }

  /// Entry lookup by binary search; zero when not stored.
  double at(Index i, Index j) const;

  Eigen::MatrixXd to_dense() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::int64_t> offsets_{0};
  std::vector<Index> indices_;
  std::vector<double> values_;
};

// y = A x
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
          OpCount* ops = nullptr);
Vector spmv(const CsrMatrix& a, std::span<const double> x,
            OpCount* ops = nullptr);
// y = A^T x
Vector spmv_transpose(const CsrMatrix& a, std::span<const double> x,
                      OpCount* ops = nullptr);

CsrMatrix transpose(const CsrMatrix& a);
CsrMatrix matmul(const CsrMatrix& a, const CsrMatrix& b,
                 OpCount* ops = nullptr);
/// alpha*A + beta*B with the union sparsity pattern.
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0,
              double beta = 1.0);
CsrMatrix scaled(const CsrMatrix& a, double factor);
/// R A R^T, symmetrized as (X + X^T)/2.
CsrMatrix triple_product(const CsrMatrix& r, const CsrMatrix& a,
                         OpCount* ops = nullptr);
/// Removes entries with |value| <= threshold.
CsrMatrix drop_small(const CsrMatrix& a, double threshold);

struct PrincipalSubmatrix {
  CsrMatrix matrix;
  std::vector<Index> global;  // local index -> global index
};

/// A[S,S] in local numbering. `index_set` must be sorted, unique and in
/// range.
PrincipalSubmatrix extract_principal(const CsrMatrix& a,
                                     std::span<const Index> index_set);

/// Reusable scratch for repeated principal extractions from one matrix.
class PrincipalExtractor {
 public:
  explicit PrincipalExtractor(const CsrMatrix& a);
  PrincipalSubmatrix operator()(std::span<const Index> index_set);

 private:
  const CsrMatrix* a_;
  std::vector<Index> local_;
};

double max_abs(const CsrMatrix& a);
/// max |A - A^T|
double symmetry_defect(const CsrMatrix& a);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace gamblet
