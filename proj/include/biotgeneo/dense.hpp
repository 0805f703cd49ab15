#pragma once

#include <lapacke.h>

#include <algorithm>
#include <cstdint>
#include <limits>

#include "biotgeneo/common.hpp"

extern "C" {
void dgemm_(const char*, const char*, const int*, const int*, const int*, const double*,
            const double*, const int*, const double*, const int*, const double*, double*,
            const int*);
void dtrsm_(const char*, const char*, const char*, const char*, const int*, const int*,
            const double*, const double*, const int*, double*, const int*);
void dgemv_(const char*, const int*, const int*, const double*, const double*, const int*,
            const double*, const int*, const double*, double*, const int*);
}

namespace biotgeneo {

/// Column-major dense matrix (LAPACK layout).
class DenseMatrix {
public:
  std::int32_t nrows = 0;
  std::int32_t ncols = 0;
  Vec a;

  DenseMatrix() = default;
  DenseMatrix(std::int32_t rows, std::int32_t columns)
      : nrows(rows), ncols(columns),
        a(static_cast<std::size_t>(rows) * static_cast<std::size_t>(columns), 0.0) {}

  double& operator()(std::int32_t i, std::int32_t j) {
    return a[static_cast<std::size_t>(j) * nrows + i];
  }
  double operator()(std::int32_t i, std::int32_t j) const {
    return a[static_cast<std::size_t>(j) * nrows + i];
  }

  static DenseMatrix identity(std::int32_t n) {
    DenseMatrix m(n, n);
    for (std::int32_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Vec multiply(std::span<const double> x) const {
    require(x.size() == static_cast<std::size_t>(ncols), "dense multiply: size mismatch");
    Vec y(static_cast<std::size_t>(nrows), 0.0);
    if (nrows == 0 || ncols == 0) return y;
    const double one = 1.0, zero = 0.0;
    const int inc = 1;
    dgemv_("N", &nrows, &ncols, &one, a.data(), &nrows, x.data(), &inc, &zero, y.data(),
           &inc);
    return y;
  }

  DenseMatrix transposed() const {
    DenseMatrix t(ncols, nrows);
    for (std::int32_t j = 0; j < ncols; ++j)
      for (std::int32_t i = 0; i < nrows; ++i) t(j, i) = (*this)(i, j);
    return t;
  }
};

/// C = alpha*op(A)*op(B).
inline DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b,
                                bool transpose_a = false, bool transpose_b = false,
                                double alpha = 1.0) {
  const std::int32_t m = transpose_a ? a.ncols : a.nrows;
  const std::int32_t k = transpose_a ? a.nrows : a.ncols;
  const std::int32_t kb = transpose_b ? b.ncols : b.nrows;
  const std::int32_t n = transpose_b ? b.nrows : b.ncols;
  require(k == kb, "dense_matmul: inner dimension mismatch");
  DenseMatrix c(m, n);
  if (m == 0 || n == 0 || k == 0) return c;
  const double beta = 0.0;
  dgemm_(transpose_a ? "T" : "N", transpose_b ? "T" : "N", &m, &n, &k, &alpha, a.a.data(),
         &a.nrows, b.a.data(), &b.nrows, &beta, c.a.data(), &c.nrows);
  return c;
}

/// Exact dense Cholesky A = L L^T (lower). Throws NotPositiveDefiniteError.
class DenseCholesky {
public:
  static DenseCholesky factor(DenseMatrix a) {
    require(a.nrows == a.ncols, "DenseCholesky: square required");
    DenseCholesky f;
    f.l_ = std::move(a);
    if (f.l_.nrows == 0) return f;
    const lapack_int info =
        LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', f.l_.nrows, f.l_.a.data(), f.l_.nrows);
    if (info > 0)
      throw NotPositiveDefiniteError("dense Cholesky", static_cast<std::size_t>(info - 1));
    require(info == 0, "DenseCholesky: LAPACK argument error");
    for (std::int32_t j = 1; j < f.l_.ncols; ++j)
      for (std::int32_t i = 0; i < j; ++i) f.l_(i, j) = 0.0;
    return f;
  }

  std::int32_t size() const { return l_.nrows; }
  const DenseMatrix& lower() const { return l_; }

  /// In-place X <- L^-1 X (forward) over ncols right-hand sides.
  void solve_lower(DenseMatrix& x) const {
    require(x.nrows == l_.nrows, "solve_lower: size mismatch");
    if (x.nrows == 0 || x.ncols == 0) return;
    const double one = 1.0;
    dtrsm_("L", "L", "N", "N", &x.nrows, &x.ncols, &one, l_.a.data(), &l_.nrows,
           x.a.data(), &x.nrows);
  }

  /// In-place X <- L^-T X (backward).
  void solve_lower_transposed(DenseMatrix& x) const {
    require(x.nrows == l_.nrows, "solve_lower_transposed: size mismatch");
    if (x.nrows == 0 || x.ncols == 0) return;
    const double one = 1.0;
    dtrsm_("L", "L", "T", "N", &x.nrows, &x.ncols, &one, l_.a.data(), &l_.nrows,
           x.a.data(), &x.nrows);
  }

  Vec solve(std::span<const double> b) const {
    require(b.size() == static_cast<std::size_t>(l_.nrows), "dense solve: size mismatch");
    DenseMatrix x(l_.nrows, 1);
    std::copy(b.begin(), b.end(), x.a.begin());
    solve_lower(x);
    solve_lower_transposed(x);
    return x.a;
  }

private:
  DenseMatrix l_;
};

struct SymmetricEig {
  Vec eigenvalues;       ///< ascending
  DenseMatrix eigenvectors;  ///< column j pairs with eigenvalues[j], orthonormal
};

/// All eigenpairs of a symmetric matrix (lower triangle referenced).
inline SymmetricEig symmetric_eig(DenseMatrix a) {
  require(a.nrows == a.ncols, "symmetric_eig: square required");
  SymmetricEig out;
  out.eigenvalues.resize(a.nrows);
  if (a.nrows == 0) {
    out.eigenvectors = DenseMatrix(0, 0);
    return out;
  }
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', a.nrows, a.a.data(),
                                         a.nrows, out.eigenvalues.data());
  require(info == 0, "symmetric_eig: LAPACK dsyevd failed");
  out.eigenvectors = std::move(a);
  return out;
}

/// The k largest eigenpairs (returned ascending). Faster than the full
/// decomposition when k << n; k is clamped to n.
inline SymmetricEig symmetric_eig_largest(DenseMatrix a, std::int32_t k) {
  require(a.nrows == a.ncols, "symmetric_eig_largest: square required");
  const std::int32_t n = a.nrows;
  k = std::min(k, n);
  SymmetricEig out;
  if (k <= 0 || n == 0) {
    out.eigenvectors = DenseMatrix(n, 0);
    return out;
  }
  // LAPACK requires the eigenvalue array to hold n entries even when only k
  // are requested, and the support array is safest at 2n.
  Vec values(n);
  out.eigenvectors = DenseMatrix(n, k);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.a.data(), n, 0.0, 0.0, n - k + 1, n, 0.0,
      &found, values.data(), out.eigenvectors.a.data(), n, isuppz.data());
  require(info == 0 && found == k, "symmetric_eig_largest: LAPACK dsyevr failed");
  out.eigenvalues.assign(values.begin(), values.begin() + k);
  return out;
}

struct GeneralizedEigPair {
  double lambda;
  Vec v;  ///< normalized v^T A v = 1
};

/// Finite eigenpairs of the symmetric pencil A v = lambda B v with A SPD and
/// B symmetric positive semidefinite (possibly singular), ascending in lambda.
///
/// Inverted-pencil method: A = L L^T, C = L^-1 B L^-T, eigenvalues mu of C;
/// directions with mu <= 1e-12 * max(mu) lie in null(B) (lambda infinite) and
/// are dropped; kept pairs map back as lambda = 1/mu, v = L^-T w.
/// If max_pairs >= 0 only the max_pairs smallest lambdas are computed.
inline std::vector<GeneralizedEigPair> generalized_symmetric_eig(
    const DenseMatrix& a, const DenseMatrix& b, std::int32_t max_pairs = -1) {
  require(a.nrows == a.ncols && b.nrows == b.ncols && a.nrows == b.nrows,
          "generalized_symmetric_eig: shape mismatch");
  const std::int32_t n = a.nrows;
  std::vector<GeneralizedEigPair> pairs;
  if (n == 0 || max_pairs == 0) return pairs;

  const DenseCholesky chol = DenseCholesky::factor(a);
  DenseMatrix c = b;
  chol.solve_lower(c);              // C <- L^-1 B
  c = c.transposed();               // C <- B L^-T   (B symmetric)
  chol.solve_lower(c);              // C <- L^-1 B L^-T

  SymmetricEig eig;
  if (max_pairs < 0) {
    eig = symmetric_eig(std::move(c));
  } else {
    // smallest lambdas correspond to largest mus
    eig = symmetric_eig_largest(std::move(c), max_pairs);
  }
  // With a count-limited query the window holds the largest mus, so the
  // window maximum is still the global maximum.
  const std::int32_t m = static_cast<std::int32_t>(eig.eigenvalues.size());
  double mu_max = 0.0;
  for (double mu : eig.eigenvalues) mu_max = std::max(mu_max, mu);
  if (mu_max <= 0.0) return pairs;
  const double cut = 1e-12 * mu_max;

  // descending mu = ascending lambda
  for (std::int32_t j = m - 1; j >= 0; --j) {
    const double mu = eig.eigenvalues[j];
    if (mu <= cut) continue;
    GeneralizedEigPair p;
    p.lambda = 1.0 / mu;
    DenseMatrix w(n, 1);
    for (std::int32_t i = 0; i < n; ++i) w(i, 0) = eig.eigenvectors(i, j);
    chol.solve_lower_transposed(w);
    p.v = std::move(w.a);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

struct SemidefiniteCholesky {
  DenseMatrix l;                     ///< lower factor on the kept index set
  std::vector<std::int32_t> kept;    ///< original indices that survived
  std::vector<std::int32_t> dropped; ///< linearly dependent indices

  /// Solves (L L^T) x = b on the kept set (b already reduced).
  Vec solve(std::span<const double> b) const {
    const std::int32_t m = l.nrows;
    require(b.size() == static_cast<std::size_t>(m), "semidef solve: size mismatch");
    Vec x(b.begin(), b.end());
    for (std::int32_t j = 0; j < m; ++j) {
      x[j] /= l(j, j);
      for (std::int32_t i = j + 1; i < m; ++i) x[i] -= l(i, j) * x[j];
    }
    for (std::int32_t j = m - 1; j >= 0; --j) {
      for (std::int32_t i = j + 1; i < m; ++i) x[j] -= l(i, j) * x[i];
      x[j] /= l(j, j);
    }
    return x;
  }
};

/// Cholesky of a symmetric positive semidefinite matrix that skips rows whose
/// pivot falls below pivot_tol (dependent directions), recording the drops.
inline SemidefiniteCholesky semidefinite_cholesky(const DenseMatrix& a, double pivot_tol) {
  require(a.nrows == a.ncols, "semidefinite_cholesky: square required");
  const std::int32_t n = a.nrows;
  DenseMatrix work = a;
  std::vector<bool> active(n, true);
  SemidefiniteCholesky out;
  for (std::int32_t j = 0; j < n; ++j) {
    if (work(j, j) <= pivot_tol) {
      active[j] = false;
      out.dropped.push_back(j);
      continue;
    }
    const double ljj = std::sqrt(work(j, j));
    work(j, j) = ljj;
    for (std::int32_t i = j + 1; i < n; ++i) work(i, j) /= ljj;
    for (std::int32_t k = j + 1; k < n; ++k) {
      const double lkj = work(k, j);
      if (lkj == 0.0) continue;
      for (std::int32_t i = k; i < n; ++i) work(i, k) -= work(i, j) * lkj;
    }
    out.kept.push_back(j);
  }
  const std::int32_t m = static_cast<std::int32_t>(out.kept.size());
  out.l = DenseMatrix(m, m);
  for (std::int32_t jc = 0; jc < m; ++jc)
    for (std::int32_t ic = jc; ic < m; ++ic)
      out.l(ic, jc) = work(out.kept[ic], out.kept[jc]);
  return out;
}

}  // namespace biotgeneo
