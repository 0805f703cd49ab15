#pragma once

#include "biotgeneo/sparse.hpp"

namespace biotgeneo {

/// Zero-fill incomplete Cholesky IC(0): the factor keeps exactly the lower-
/// triangular sparsity pattern of A. A non-positive pivot triggers a diagonal
/// shift of 1e-8 * max|diag(A)| (growing tenfold per retry) and a refactor.
class IncompleteCholesky {
public:
  static IncompleteCholesky factor(const SparseMatrix& a) {
    require(a.nrows == a.ncols, "IncompleteCholesky: square required");
    const double base = 1e-8 * max_abs(diagonal(a));
    double shift = 0.0;
    for (int attempt = 0; attempt < 20; ++attempt) {
      IncompleteCholesky f;
      if (f.try_factor(a, shift)) {
        f.shift_ = shift;
        return f;
      }
      shift = (shift == 0.0) ? base : shift * 10.0;
      if (shift == 0.0) break;  // zero diagonal matrix, nothing to shift by
    }
    throw NotPositiveDefiniteError("incomplete Cholesky (shift retries exhausted)", 0);
  }

  double shift_used() const { return shift_; }

  Vec solve(std::span<const double> b) const {
    require(b.size() == static_cast<std::size_t>(n_), "ic0 solve: size mismatch");
    Vec x(b.begin(), b.end());
    for (std::int32_t i = 0; i < n_; ++i) {  // L y = b (rows, diagonal last)
      double s = x[i];
      for (std::int64_t p = offsets_[i]; p < offsets_[i + 1] - 1; ++p)
        s -= vals_[p] * x[cols_[p]];
      x[i] = s / vals_[offsets_[i + 1] - 1];
    }
    for (std::int32_t i = n_ - 1; i >= 0; --i) {  // L^T x = y
      x[i] /= vals_[offsets_[i + 1] - 1];
      for (std::int64_t p = offsets_[i]; p < offsets_[i + 1] - 1; ++p)
        x[cols_[p]] -= vals_[p] * x[i];
    }
    return x;
  }

  SparseMatrix lower() const {
    std::vector<Triplet> t;
    t.reserve(vals_.size());
    for (std::int32_t i = 0; i < n_; ++i)
      for (std::int64_t p = offsets_[i]; p < offsets_[i + 1]; ++p)
        t.push_back({i, cols_[p], vals_[p]});
    return SparseMatrix::from_triplets(n_, n_, std::move(t));
  }

private:
  // Lower triangle in CSR; each row's diagonal entry is its last entry.
  std::int32_t n_ = 0;
  std::vector<std::int64_t> offsets_;
  std::vector<std::int32_t> cols_;
  Vec vals_;
  double shift_ = 0.0;

  bool try_factor(const SparseMatrix& a, double shift) {
    n_ = a.nrows;
    offsets_.assign(n_ + 1, 0);
    cols_.clear();
    vals_.clear();
    for (std::int32_t i = 0; i < n_; ++i) {
      bool has_diag = false;
      for (std::int64_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
        if (a.cols[p] > i) break;
        cols_.push_back(a.cols[p]);
        vals_.push_back(a.vals[p] + (a.cols[p] == i ? shift : 0.0));
        has_diag |= a.cols[p] == i;
      }
      require(has_diag, "IncompleteCholesky: structurally missing diagonal");
      offsets_[i + 1] = static_cast<std::int64_t>(cols_.size());
    }
    for (std::int32_t i = 0; i < n_; ++i) {
      const std::int64_t row_begin = offsets_[i], row_diag = offsets_[i + 1] - 1;
      for (std::int64_t p = row_begin; p < row_diag; ++p) {
        const std::int32_t k = cols_[p];
        // dot of rows i and k over the shared pattern left of column k
        double s = vals_[p];
        std::int64_t pi = row_begin, pk = offsets_[k];
        const std::int64_t ke = offsets_[k + 1] - 1;
        while (pi < p && pk < ke) {
          if (cols_[pi] == cols_[pk])
            s -= vals_[pi++] * vals_[pk++];
          else if (cols_[pi] < cols_[pk])
            ++pi;
          else
            ++pk;
        }
        vals_[p] = s / vals_[ke];  // divide by L(k,k)
      }
      double d = vals_[row_diag];
      for (std::int64_t p = row_begin; p < row_diag; ++p) d -= vals_[p] * vals_[p];
      if (d <= 0.0) return false;
      vals_[row_diag] = std::sqrt(d);
    }
    return true;
  }
};

}  // namespace biotgeneo
