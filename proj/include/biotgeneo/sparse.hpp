#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "biotgeneo/common.hpp"

namespace biotgeneo {

struct Triplet {
  std::int32_t row;
  std::int32_t col;
  double value;
};

/// Compressed-sparse-row matrix. Per row, column indices are strictly
/// increasing and duplicate-free; row_offsets is monotone with
/// row_offsets[0] == 0 and row_offsets[nrows] == nnz.
class SparseMatrix {
public:
  std::int32_t nrows = 0;
  std::int32_t ncols = 0;
  std::vector<std::int64_t> row_offsets{0};
  std::vector<std::int32_t> cols;
  std::vector<double> vals;

  SparseMatrix() = default;
  SparseMatrix(std::int32_t rows, std::int32_t columns)
      : nrows(rows), ncols(columns), row_offsets(static_cast<std::size_t>(rows) + 1, 0) {}

  std::int64_t nnz() const { return static_cast<std::int64_t>(vals.size()); }

  /// Builds from coordinate triplets; duplicates are summed in insertion
  /// order (stable sort), which keeps assembly deterministic.
  static SparseMatrix from_triplets(std::int32_t nrows, std::int32_t ncols,
                                    std::vector<Triplet> triplets) {
    require(nrows >= 0 && ncols >= 0, "from_triplets: negative dimension");
    for (const Triplet& t : triplets)
      require(t.row >= 0 && t.row < nrows && t.col >= 0 && t.col < ncols,
              "from_triplets: index out of range");
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) {
                       return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });
    SparseMatrix m(nrows, ncols);
    m.cols.reserve(triplets.size());
    m.vals.reserve(triplets.size());
    std::size_t i = 0;
    for (std::int32_t r = 0; r < nrows; ++r) {
      while (i < triplets.size() && triplets[i].row == r) {
        const std::int32_t c = triplets[i].col;
        double v = triplets[i].value;
        ++i;
        while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
          v += triplets[i].value;
          ++i;
        }
        m.cols.push_back(c);
        m.vals.push_back(v);
      }
      m.row_offsets[static_cast<std::size_t>(r) + 1] =
          static_cast<std::int64_t>(m.cols.size());
    }
    return m;
  }

  static SparseMatrix identity(std::int32_t n) {
    SparseMatrix m(n, n);
    m.cols.resize(n);
    m.vals.assign(n, 1.0);
    std::iota(m.cols.begin(), m.cols.end(), 0);
    for (std::int32_t i = 0; i <= n; ++i) m.row_offsets[i] = i;
    return m;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    require(x.size() == static_cast<std::size_t>(ncols), "spmv: x size mismatch");
    require(y.size() == static_cast<std::size_t>(nrows), "spmv: y size mismatch");
    for (std::int32_t r = 0; r < nrows; ++r) {
      double s = 0.0;
      for (std::int64_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k)
        s += vals[k] * x[cols[k]];
      y[r] = s;
    }
  }

  SparseMatrix transposed() const {
    SparseMatrix t(ncols, nrows);
    std::vector<std::int64_t> count(static_cast<std::size_t>(ncols) + 1, 0);
    for (std::int32_t c : cols) ++count[static_cast<std::size_t>(c) + 1];
    for (std::int32_t c = 0; c < ncols; ++c) count[c + 1] += count[c];
    t.row_offsets = count;
    t.cols.resize(vals.size());
    t.vals.resize(vals.size());
    std::vector<std::int64_t> cursor(count.begin(), count.end() - 1);
    for (std::int32_t r = 0; r < nrows; ++r)
      for (std::int64_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
        const std::int64_t q = cursor[cols[k]]++;
        t.cols[q] = r;
        t.vals[q] = vals[k];
      }
    return t;
  }

  /// Structural invariants; used by tests, cheap enough for debug paths.
  void validate() const {
    require(row_offsets.size() == static_cast<std::size_t>(nrows) + 1,
            "validate: offsets size");
    require(row_offsets.front() == 0 &&
                row_offsets.back() == static_cast<std::int64_t>(vals.size()) &&
                cols.size() == vals.size(),
            "validate: offsets/nnz");
    for (std::int32_t r = 0; r < nrows; ++r) {
      require(row_offsets[r] <= row_offsets[r + 1], "validate: offsets monotone");
      for (std::int64_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
        require(cols[k] >= 0 && cols[k] < ncols, "validate: column range");
        if (k > row_offsets[r])
          require(cols[k - 1] < cols[k], "validate: columns strictly increasing");
      }
    }
  }
};

inline Vec spmv(const SparseMatrix& a, std::span<const double> x) {
  Vec y(static_cast<std::size_t>(a.nrows));
  a.multiply(x, y);
  return y;
}

inline Vec diagonal(const SparseMatrix& a) {
  Vec d(static_cast<std::size_t>(std::min(a.nrows, a.ncols)), 0.0);
  for (std::int32_t r = 0; r < static_cast<std::int32_t>(d.size()); ++r)
    for (std::int64_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
      if (a.cols[k] == r) d[r] = a.vals[k];
  return d;
}

/// c*A + d*B with matching shapes; result keeps sorted unique columns.
inline SparseMatrix add(double c, const SparseMatrix& a, double d, const SparseMatrix& b) {
  require(a.nrows == b.nrows && a.ncols == b.ncols, "add: shape mismatch");
  SparseMatrix r(a.nrows, a.ncols);
  r.cols.reserve(a.cols.size() + b.cols.size());
  r.vals.reserve(a.cols.size() + b.cols.size());
  for (std::int32_t i = 0; i < a.nrows; ++i) {
    std::int64_t ka = a.row_offsets[i], kb = b.row_offsets[i];
    const std::int64_t ea = a.row_offsets[i + 1], eb = b.row_offsets[i + 1];
    while (ka < ea || kb < eb) {
      std::int32_t col;
      double v = 0.0;
      if (kb >= eb || (ka < ea && a.cols[ka] < b.cols[kb])) {
        col = a.cols[ka];
        v = c * a.vals[ka++];
      } else if (ka >= ea || b.cols[kb] < a.cols[ka]) {
        col = b.cols[kb];
        v = d * b.vals[kb++];
      } else {
        col = a.cols[ka];
        v = c * a.vals[ka++] + d * b.vals[kb++];
      }
      r.cols.push_back(col);
      r.vals.push_back(v);
    }
    r.row_offsets[i + 1] = static_cast<std::int64_t>(r.cols.size());
  }
  return r;
}

/// CSR product A*B (Gustavson); output columns sorted per row.
inline SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b) {
  require(a.ncols == b.nrows, "matmul: inner dimension mismatch");
  SparseMatrix r(a.nrows, b.ncols);
  std::vector<double> acc(static_cast<std::size_t>(b.ncols), 0.0);
  std::vector<std::int32_t> marker(static_cast<std::size_t>(b.ncols), -1);
  std::vector<std::int32_t> row_cols;
  for (std::int32_t i = 0; i < a.nrows; ++i) {
    row_cols.clear();
    for (std::int64_t ka = a.row_offsets[i]; ka < a.row_offsets[i + 1]; ++ka) {
      const std::int32_t j = a.cols[ka];
      const double av = a.vals[ka];
      for (std::int64_t kb = b.row_offsets[j]; kb < b.row_offsets[j + 1]; ++kb) {
        const std::int32_t c = b.cols[kb];
        if (marker[c] != i) {
          marker[c] = i;
          acc[c] = 0.0;
          row_cols.push_back(c);
        }
        acc[c] += av * b.vals[kb];
      }
    }
    std::sort(row_cols.begin(), row_cols.end());
    for (std::int32_t c : row_cols) {
      r.cols.push_back(c);
      r.vals.push_back(acc[c]);
    }
    r.row_offsets[i + 1] = static_cast<std::int64_t>(r.cols.size());
  }
  return r;
}

/// max |A - A^T| over all entries; 0 for exactly symmetric matrices.
inline double symmetry_error(const SparseMatrix& a) {
  require(a.nrows == a.ncols, "symmetry_error: square required");
  const SparseMatrix t = a.transposed();
  const SparseMatrix d = add(1.0, a, -1.0, t);
  return max_abs(d.vals);
}

}  // namespace biotgeneo
