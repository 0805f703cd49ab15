#pragma once

// Test-side oracles, deliberately independent of the library code paths they
// check: a cyclic Jacobi eigensolver, an LAPACK dgesv direct solve, and small
// random-matrix generators with fixed seeds.

#include <lapacke.h>

#include <random>

#include "biotgeneo/dense.hpp"
#include "biotgeneo/sparse.hpp"

namespace testsupport {

using biotgeneo::DenseMatrix;
using biotgeneo::SparseMatrix;
using biotgeneo::Vec;

inline DenseMatrix to_dense(const SparseMatrix& a) {
  DenseMatrix d(a.nrows, a.ncols);
  for (std::int32_t r = 0; r < a.nrows; ++r)
    for (std::int64_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
      d(r, a.cols[k]) += a.vals[k];
  return d;
}

/// Cyclic Jacobi eigensolver for symmetric matrices; ascending eigenvalues.
/// Hand-rolled so library eigensolvers can be checked against it.
struct JacobiEig {
  Vec eigenvalues;
  DenseMatrix eigenvectors;  // columns
};

inline JacobiEig jacobi_eig(DenseMatrix a, int max_sweeps = 100) {
  const std::int32_t n = a.nrows;
  DenseMatrix v = DenseMatrix::identity(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::int32_t p = 0; p < n; ++p)
      for (std::int32_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) < 1e-14 * (1.0 + biotgeneo::max_abs(a.a))) break;
    for (std::int32_t p = 0; p < n; ++p)
      for (std::int32_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::int32_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::int32_t i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::int32_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
  }
  JacobiEig out;
  out.eigenvalues.resize(n);
  std::vector<std::int32_t> order(n);
  for (std::int32_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::int32_t x, std::int32_t y) { return a(x, x) < a(y, y); });
  out.eigenvectors = DenseMatrix(n, n);
  for (std::int32_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    for (std::int32_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
  }
  return out;
}

/// Direct dense solve via LAPACK LU (independent of the library solvers).
inline Vec lu_solve(DenseMatrix a, Vec b) {
  const std::int32_t n = a.nrows;
  std::vector<lapack_int> ipiv(n);
  const lapack_int info =
      LAPACKE_dgesv(LAPACK_COL_MAJOR, n, 1, a.a.data(), n, ipiv.data(), b.data(), n);
  if (info != 0) throw std::runtime_error("lu_solve: dgesv failed");
  return b;
}

inline DenseMatrix random_spd(std::int32_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix m(n, n);
  for (double& x : m.a) x = dist(rng);
  DenseMatrix a = biotgeneo::dense_matmul(m, m, true, false);
  for (std::int32_t i = 0; i < n; ++i) a(i, i) += 1.0;
  return a;
}

inline Vec random_vec(std::size_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline SparseMatrix sparse_from_dense(const DenseMatrix& d, double drop_tol = 0.0) {
  std::vector<biotgeneo::Triplet> t;
  for (std::int32_t j = 0; j < d.ncols; ++j)
    for (std::int32_t i = 0; i < d.nrows; ++i)
      if (std::abs(d(i, j)) > drop_tol) t.push_back({i, j, d(i, j)});
  return SparseMatrix::from_triplets(d.nrows, d.ncols, std::move(t));
}

/// 5-point Laplacian on an nx-by-ny grid (Dirichlet exterior).
inline SparseMatrix grid_laplacian(std::int32_t nx, std::int32_t ny) {
  std::vector<biotgeneo::Triplet> t;
  auto id = [&](std::int32_t i, std::int32_t j) { return j * nx + i; };
  for (std::int32_t j = 0; j < ny; ++j)
    for (std::int32_t i = 0; i < nx; ++i) {
      t.push_back({id(i, j), id(i, j), 4.0});
      if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0});
      if (i + 1 < nx) t.push_back({id(i, j), id(i + 1, j), -1.0});
      if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
      if (j + 1 < ny) t.push_back({id(i, j), id(i, j + 1), -1.0});
    }
  return SparseMatrix::from_triplets(nx * ny, nx * ny, std::move(t));
}

/// Finite eigenvalues (ascending) of the pencil A v = lambda B v with A SPD,
/// B PSD, through C = A^{-1/2} B A^{-1/2} built from the Jacobi eigensolver:
/// mu of C above 1e-12*mu_max map to lambda = 1/mu.
inline Vec pencil_brute_force(const DenseMatrix& a, const DenseMatrix& b) {
  const std::int32_t n = a.nrows;
  const JacobiEig ea = jacobi_eig(a);
  DenseMatrix inv_sqrt(n, n);
  for (std::int32_t k = 0; k < n; ++k) {
    const double w = 1.0 / std::sqrt(ea.eigenvalues[k]);
    for (std::int32_t i = 0; i < n; ++i)
      for (std::int32_t j = 0; j < n; ++j)
        inv_sqrt(i, j) += w * ea.eigenvectors(i, k) * ea.eigenvectors(j, k);
  }
  const DenseMatrix c =
      biotgeneo::dense_matmul(inv_sqrt, biotgeneo::dense_matmul(b, inv_sqrt));
  const JacobiEig ec = jacobi_eig(c);
  double mu_max = 0.0;
  for (double mu : ec.eigenvalues) mu_max = std::max(mu_max, mu);
  Vec lambdas;
  for (double mu : ec.eigenvalues)
    if (mu > 1e-12 * mu_max) lambdas.push_back(1.0 / mu);
  std::sort(lambdas.begin(), lambdas.end());
  return lambdas;
}

}  // namespace testsupport
