#include "gamblet/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gamblet {

CsrMatrix::CsrMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("CsrMatrix: negative dimension");
  }
}

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<std::int64_t> offsets,
                     std::vector<Index> indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      offsets_(std::move(offsets)),
      indices_(std::move(indices)),
      values_(std::move(values)) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("CsrMatrix: negative dimension");
  }
  if (offsets_.size() != static_cast<std::size_t>(rows) + 1 ||
      offsets_.front() != 0 ||
      offsets_.back() != static_cast<std::int64_t>(indices_.size()) ||
      indices_.size() != values_.size()) {
    throw std::invalid_argument("CsrMatrix: inconsistent offsets");
  }
  for (Index i = 0; i < rows; ++i) {
    if (offsets_[i + 1] < offsets_[i]) {
      throw std::invalid_argument("CsrMatrix: offsets not monotone");
    }
    for (auto p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      if (indices_[p] < 0 || indices_[p] >= cols ||
          (p > offsets_[i] && indices_[p] <= indices_[p - 1])) {
        throw std::invalid_argument("CsrMatrix: column indices of row " +
                                    std::to_string(i) +
                                    " not strictly increasing or out of range");
      }
    }
  }
}

CsrMatrix CsrMatrix::identity(Index n) {
  std::vector<std::int64_t> off(static_cast<std::size_t>(n) + 1);
  std::iota(off.begin(), off.end(), 0);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return {n, n, std::move(off), std::move(idx), Vector(static_cast<std::size_t>(n), 1.0)};
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols,
                                   std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw std::invalid_argument("from_triplets: entry out of range");
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  std::vector<std::int64_t> off(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> idx;
  Vector val;
  idx.reserve(triplets.size());
  val.reserve(triplets.size());
  for (std::size_t p = 0; p < triplets.size(); ++p) {
    const auto& t = triplets[p];
    if (!idx.empty() && p > 0 && triplets[p - 1].row == t.row &&
        triplets[p - 1].col == t.col) {
      val.back() += t.value;
      continue;
    }
    idx.push_back(t.col);
    val.push_back(t.value);
    ++off[t.row + 1];
  }
  std::partial_sum(off.begin(), off.end(), off.begin());
  return {rows, cols, std::move(off), std::move(idx), std::move(val)};
}

CsrMatrix CsrMatrix::from_dense(const Eigen::MatrixXd& dense, double drop) {
  const auto rows = static_cast<Index>(dense.rows());
  const auto cols = static_cast<Index>(dense.cols());
  std::vector<std::int64_t> off(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> idx;
  Vector val;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double v = dense(i, j);
      if (v != 0.0 && std::abs(v) > drop) {
        idx.push_back(j);
        val.push_back(v);
      }
    }
    off[i + 1] = static_cast<std::int64_t>(idx.size());
  }
  return {rows, cols, std::move(off), std::move(idx), std::move(val)};
}

double CsrMatrix::at(Index i, Index j) const {
  const auto cols = row_indices(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[offsets_[i] + (it - cols.begin())];
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index i = 0; i < rows_; ++i) {
    for (auto p = offsets_[i]; p < offsets_[i + 1]; ++p) {
      d(i, indices_[p]) = values_[p];
    }
  }
  return d;
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
          OpCount* ops) {
  if (x.size() != static_cast<std::size_t>(a.cols()) ||
      y.size() != static_cast<std::size_t>(a.rows())) {
    throw std::invalid_argument("spmv: dimension mismatch");
  }
  const auto off = a.offsets();
  const auto idx = a.indices();
  const auto val = a.values();
  for (Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (auto p = off[i]; p < off[i + 1]; ++p) s += val[p] * x[idx[p]];
    y[i] = s;
  }
  if (ops) ops->add(2 * static_cast<std::uint64_t>(a.nnz()));
}

Vector spmv(const CsrMatrix& a, std::span<const double> x, OpCount* ops) {
  Vector y(static_cast<std::size_t>(a.rows()));
  spmv(a, x, y, ops);
  return y;
}

Vector spmv_transpose(const CsrMatrix& a, std::span<const double> x,
                      OpCount* ops) {
  if (x.size() != static_cast<std::size_t>(a.rows())) {
    throw std::invalid_argument("spmv_transpose: dimension mismatch");
  }
  Vector y(static_cast<std::size_t>(a.cols()), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_indices(i);
    const auto vals = a.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) y[cols[p]] += vals[p] * x[i];
  }
  if (ops) ops->add(2 * static_cast<std::uint64_t>(a.nnz()));
  return y;
}

CsrMatrix transpose(const CsrMatrix& a) {
  std::vector<std::int64_t> off(static_cast<std::size_t>(a.cols()) + 1, 0);
  for (Index j : a.indices()) ++off[j + 1];
  std::partial_sum(off.begin(), off.end(), off.begin());
  std::vector<Index> idx(static_cast<std::size_t>(a.nnz()));
  Vector val(static_cast<std::size_t>(a.nnz()));
  std::vector<std::int64_t> fill(off.begin(), off.end() - 1);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_indices(i);
    const auto vals = a.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const auto dst = fill[cols[p]]++;
      idx[dst] = i;
      val[dst] = vals[p];
    }
  }
  return {a.cols(), a.rows(), std::move(off), std::move(idx), std::move(val)};
}

CsrMatrix matmul(const CsrMatrix& a, const CsrMatrix& b, OpCount* ops) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch");
  }
  std::vector<std::int64_t> off(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> idx;
  Vector val;
  Vector acc(static_cast<std::size_t>(b.cols()), 0.0);
  std::vector<Index> marker(static_cast<std::size_t>(b.cols()), -1);
  std::vector<Index> row_cols;
  std::uint64_t flops = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    row_cols.clear();
    const auto acols = a.row_indices(i);
    const auto avals = a.row_values(i);
    for (std::size_t p = 0; p < acols.size(); ++p) {
      const Index k = acols[p];
      const double av = avals[p];
      const auto bcols = b.row_indices(k);
      const auto bvals = b.row_values(k);
      for (std::size_t r = 0; r < bcols.size(); ++r) {
        const Index j = bcols[r];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = 0.0;
          row_cols.push_back(j);
        }
        acc[j] += av * bvals[r];
      }
      flops += 2 * bcols.size();
    }
    std::sort(row_cols.begin(), row_cols.end());
    for (Index j : row_cols) {
      idx.push_back(j);
      val.push_back(acc[j]);
    }
    off[i + 1] = static_cast<std::int64_t>(idx.size());
  }
  if (ops) ops->add(flops);
  return {a.rows(), b.cols(), std::move(off), std::move(idx), std::move(val)};
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha,
              double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("add: dimension mismatch");
  }
  std::vector<std::int64_t> off(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> idx;
  Vector val;
  idx.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
  val.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
  for (Index i = 0; i < a.rows(); ++i) {
    const auto ac = a.row_indices(i);
    const auto av = a.row_values(i);
    const auto bc = b.row_indices(i);
    const auto bv = b.row_values(i);
    std::size_t p = 0, r = 0;
    while (p < ac.size() || r < bc.size()) {
      if (r == bc.size() || (p < ac.size() && ac[p] < bc[r])) {
        idx.push_back(ac[p]);
        val.push_back(alpha * av[p++]);
      } else if (p == ac.size() || bc[r] < ac[p]) {
        idx.push_back(bc[r]);
        val.push_back(beta * bv[r++]);
      } else {
        idx.push_back(ac[p]);
        val.push_back(alpha * av[p++] + beta * bv[r++]);
      }
    }
    off[i + 1] = static_cast<std::int64_t>(idx.size());
  }
  return {a.rows(), a.cols(), std::move(off), std::move(idx), std::move(val)};
}

CsrMatrix scaled(const CsrMatrix& a, double factor) {
  Vector val(a.values().begin(), a.values().end());
  for (double& v : val) v *= factor;
  return {a.rows(), a.cols(),
          std::vector<std::int64_t>(a.offsets().begin(), a.offsets().end()),
          std::vector<Index>(a.indices().begin(), a.indices().end()),
          std::move(val)};
}

CsrMatrix triple_product(const CsrMatrix& r, const CsrMatrix& a, OpCount* ops) {
  if (r.cols() != a.rows() || a.rows() != a.cols()) {
    throw std::invalid_argument("triple_product: dimension mismatch");
  }
  const CsrMatrix ra = matmul(r, a, ops);
  const CsrMatrix x = matmul(ra, transpose(r), ops);
  return add(x, transpose(x), 0.5, 0.5);
}

CsrMatrix drop_small(const CsrMatrix& a, double threshold) {
  std::vector<std::int64_t> off(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> idx;
  Vector val;
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_indices(i);
    const auto vals = a.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (std::abs(vals[p]) > threshold) {
        idx.push_back(cols[p]);
        val.push_back(vals[p]);
      }
    }
    off[i + 1] = static_cast<std::int64_t>(idx.size());
  }
  return {a.rows(), a.cols(), std::move(off), std::move(idx), std::move(val)};
}

PrincipalExtractor::PrincipalExtractor(const CsrMatrix& a)
    : a_(&a), local_(static_cast<std::size_t>(a.cols()), -1) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("extract_principal: matrix not square");
  }
}

PrincipalSubmatrix PrincipalExtractor::operator()(
    std::span<const Index> index_set) {
  const auto n = static_cast<Index>(index_set.size());
  for (Index l = 0; l < n; ++l) {
    const Index g = index_set[l];
    if (g < 0 || g >= a_->rows() || (l > 0 && g <= index_set[l - 1])) {
      for (Index m = 0; m < l; ++m) local_[index_set[m]] = -1;
      throw std::invalid_argument(
          "extract_principal: index set must be sorted, unique and in range");
    }
    local_[g] = l;
  }
  std::vector<std::int64_t> off(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> idx;
  Vector val;
  for (Index l = 0; l < n; ++l) {
    const auto cols = a_->row_indices(index_set[l]);
    const auto vals = a_->row_values(index_set[l]);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const Index c = local_[cols[p]];
      if (c >= 0) {
        idx.push_back(c);
        val.push_back(vals[p]);
      }
    }
    off[l + 1] = static_cast<std::int64_t>(idx.size());
  }
  for (Index g : index_set) local_[g] = -1;
  return {CsrMatrix(n, n, std::move(off), std::move(idx), std::move(val)),
          std::vector<Index>(index_set.begin(), index_set.end())};
}

PrincipalSubmatrix extract_principal(const CsrMatrix& a,
                                     std::span<const Index> index_set) {
  PrincipalExtractor extract(a);
  return extract(index_set);
}

double max_abs(const CsrMatrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double symmetry_defect(const CsrMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("symmetry_defect: matrix not square");
  }
  return max_abs(add(a, transpose(a), 1.0, -1.0));
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace gamblet
