#pragma once

#include <numeric>

#include "biotgeneo/sparse.hpp"

namespace biotgeneo {

/// Exact sparse Cholesky A = L L^T for SPD A, natural ordering, up-looking
/// numeric phase over the symbolic fill pattern from the elimination tree.
/// L is stored by columns; only the lower triangle of A is referenced.
class SparseCholesky {
public:
  static SparseCholesky factor(const SparseMatrix& a) {
    require(a.nrows == a.ncols, "SparseCholesky: square required");
    const std::int32_t n = a.nrows;
    SparseCholesky f;
    f.n_ = n;
    f.perm_.resize(n);
    std::iota(f.perm_.begin(), f.perm_.end(), 0);
    if (n == 0) {
      f.col_offsets_ = {0};
      return f;
    }

    // Elimination tree (Liu's algorithm with ancestor path compression).
    std::vector<std::int32_t> parent(n, -1), ancestor(n, -1);
    for (std::int32_t i = 0; i < n; ++i) {
      for (std::int64_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
        std::int32_t j = a.cols[p];
        while (j != -1 && j < i) {
          const std::int32_t jnext = ancestor[j];
          ancestor[j] = i;
          if (jnext == -1) parent[j] = i;
          j = jnext;
        }
      }
    }

    // Symbolic pass: column counts from the row patterns (ereach per row).
    std::vector<std::int64_t> count(n, 1);  // diagonals
    std::vector<std::int32_t> marker(n, -1), stack(n), pattern(n);
    auto ereach = [&](std::int32_t k) {
      // Pattern of row k of L (excluding diagonal) in topological order,
      // returned in pattern[top..n-1].
      std::int32_t top = n;
      marker[k] = k;
      for (std::int64_t p = a.row_offsets[k]; p < a.row_offsets[k + 1]; ++p) {
        std::int32_t j = a.cols[p];
        if (j > k) continue;
        std::int32_t len = 0;
        while (marker[j] != k) {
          stack[len++] = j;
          marker[j] = k;
          j = parent[j];
        }
        while (len > 0) pattern[--top] = stack[--len];
      }
      return top;
    };

    for (std::int32_t k = 0; k < n; ++k) {
      const std::int32_t top = ereach(k);
      for (std::int32_t t = top; t < n; ++t) ++count[pattern[t]];
    }
    f.col_offsets_.assign(n + 1, 0);
    for (std::int32_t j = 0; j < n; ++j) f.col_offsets_[j + 1] = f.col_offsets_[j] + count[j];
    const std::int64_t nnz = f.col_offsets_[n];
    f.rows_.resize(nnz);
    f.vals_.resize(nnz);

    // Numeric pass (up-looking): row k of L via sparse triangular solve.
    std::vector<std::int64_t> cursor(f.col_offsets_.begin(), f.col_offsets_.end() - 1);
    std::fill(marker.begin(), marker.end(), -1);
    Vec x(n, 0.0);
    for (std::int32_t k = 0; k < n; ++k) {
      const std::int32_t top = ereach(k);
      double d = 0.0;
      for (std::int64_t p = a.row_offsets[k]; p < a.row_offsets[k + 1]; ++p) {
        if (a.cols[p] < k) x[a.cols[p]] = a.vals[p];
        if (a.cols[p] == k) d = a.vals[p];
      }
      for (std::int32_t t = top; t < n; ++t) {
        const std::int32_t j = pattern[t];
        const double lkj = x[j] / f.vals_[f.col_offsets_[j]];
        x[j] = 0.0;
        for (std::int64_t p = f.col_offsets_[j] + 1; p < cursor[j]; ++p)
          x[f.rows_[p]] -= f.vals_[p] * lkj;
        d -= lkj * lkj;
        f.rows_[cursor[j]] = k;
        f.vals_[cursor[j]] = lkj;
        ++cursor[j];
      }
      if (d <= 0.0)
        throw NotPositiveDefiniteError("sparse Cholesky", static_cast<std::size_t>(k));
      f.rows_[cursor[k]] = k;
      f.vals_[cursor[k]] = std::sqrt(d);
      ++cursor[k];
    }
    return f;
  }

  std::int32_t size() const { return n_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(vals_.size()); }
  const std::vector<std::int32_t>& permutation() const { return perm_; }

  Vec solve(std::span<const double> b) const {
    require(b.size() == static_cast<std::size_t>(n_), "sparse solve: size mismatch");
    Vec x(b.begin(), b.end());
    for (std::int32_t j = 0; j < n_; ++j) {  // L y = b
      x[j] /= vals_[col_offsets_[j]];
      for (std::int64_t p = col_offsets_[j] + 1; p < col_offsets_[j + 1]; ++p)
        x[rows_[p]] -= vals_[p] * x[j];
    }
    for (std::int32_t j = n_ - 1; j >= 0; --j) {  // L^T x = y
      for (std::int64_t p = col_offsets_[j] + 1; p < col_offsets_[j + 1]; ++p)
        x[j] -= vals_[p] * x[rows_[p]];
      x[j] /= vals_[col_offsets_[j]];
    }
    return x;
  }

  /// L as a CSR matrix (for recomposition checks).
  SparseMatrix lower() const {
    std::vector<Triplet> t;
    t.reserve(vals_.size());
    for (std::int32_t j = 0; j < n_; ++j)
      for (std::int64_t p = col_offsets_[j]; p < col_offsets_[j + 1]; ++p)
        t.push_back({rows_[p], j, vals_[p]});
    return SparseMatrix::from_triplets(n_, n_, std::move(t));
  }

private:
  std::int32_t n_ = 0;
  std::vector<std::int64_t> col_offsets_;
  std::vector<std::int32_t> rows_;
  Vec vals_;
  std::vector<std::int32_t> perm_;  // natural ordering
};

}  // namespace biotgeneo
