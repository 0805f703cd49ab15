#pragma once

#include "biotgeneo/dense.hpp"

namespace biotgeneo {

struct KrylovConfig {
  double r_tol = 1e-8;
  std::int32_t max_iters = 1000;
  std::int32_t restart = 200;

  void validate() const {
    require(r_tol > 0.0, "KrylovConfig: r_tol must be positive");
    require(max_iters >= 1, "KrylovConfig: max_iters must be >= 1");
    require(restart >= 1, "KrylovConfig: restart must be >= 1");
  }
};

struct SolveReport {
  std::int32_t iterations = 0;
  bool converged = false;
  Vec residual_history;  ///< relative true/estimated residual, entry 0 at start
};

inline void identity_operator(std::span<const double> x, std::span<double> y) {
  std::copy(x.begin(), x.end(), y.begin());
}

/// Restarted GMRES for A M^-1 y = b with x = M^-1 y (right preconditioning,
/// so the residual norm is the unpreconditioned one). Modified Gram-Schmidt
/// with one reorthogonalization pass when cancellation exceeds 1e-8.
/// apply_a / apply_m: void(span<const double> in, span<double> out).
template <class OpA, class OpM>
std::pair<Vec, SolveReport> gmres(OpA&& apply_a, OpM&& apply_m, std::span<const double> b,
                                  std::span<const double> x0, const KrylovConfig& cfg) {
  cfg.validate();
  const std::size_t n = b.size();
  require(x0.size() == n, "gmres: x0 size mismatch");
  Vec x(x0.begin(), x0.end());
  SolveReport report;

  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    report.converged = true;
    report.residual_history.push_back(0.0);
    return {Vec(n, 0.0), report};
  }

  Vec r(n), tmp(n);
  auto compute_residual = [&](Vec& out) {
    apply_a(x, out);
    for (std::size_t i = 0; i < n; ++i) out[i] = b[i] - out[i];
  };
  compute_residual(r);
  report.residual_history.push_back(norm2(r) / bnorm);

  while (report.iterations < cfg.max_iters) {
    const double beta = norm2(r);
    if (beta / bnorm <= cfg.r_tol) {
      report.converged = true;
      break;
    }
    const std::int32_t m =
        std::min<std::int32_t>(cfg.restart, cfg.max_iters - report.iterations);
    std::vector<Vec> v;
    v.reserve(m + 1);
    v.emplace_back(r);
    scale(1.0 / beta, v[0]);
    DenseMatrix h(m + 1, m);
    Vec g(static_cast<std::size_t>(m) + 1, 0.0), cs(m, 0.0), sn(m, 0.0);
    g[0] = beta;

    std::int32_t cols = 0;
    bool cycle_converged = false;
    for (std::int32_t j = 0; j < m; ++j) {
      apply_m(v[j], tmp);
      Vec w(n);
      apply_a(tmp, w);
      const double norm_before = norm2(w);
      for (std::int32_t i = 0; i <= j; ++i) {
        const double hij = dot(v[i], w);
        axpy(-hij, v[i], w);
        h(i, j) = hij;
      }
      double norm_after = norm2(w);
      if (norm_after <= 1e-8 * norm_before) {
        // severe cancellation: one reorthogonalization pass
        for (std::int32_t i = 0; i <= j; ++i) {
          const double c = dot(v[i], w);
          axpy(-c, v[i], w);
          h(i, j) += c;
        }
        norm_after = norm2(w);
      }
      h(j + 1, j) = norm_after;
      const bool breakdown = norm_after <= 1e-14 * beta;
      if (!breakdown) {
        v.emplace_back(w);
        scale(1.0 / norm_after, v.back());
      }

      // Givens rotations: previous ones on the new column, then a new one.
      for (std::int32_t i = 0; i < j; ++i) {
        const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      if (denom == 0.0) throw Error("gmres: zero Hessenberg column (singular operator)");
      cs[j] = h(j, j) / denom;
      sn[j] = h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];

      ++report.iterations;
      ++cols;
      const double rel = std::abs(g[j + 1]) / bnorm;
      report.residual_history.push_back(rel);
      if (rel <= cfg.r_tol) {
        cycle_converged = true;
        break;
      }
      if (breakdown)
        throw Error("gmres: Arnoldi breakdown with residual above tolerance");
    }

    // y from the triangular system, then x += M^-1 (V y).
    Vec y(cols, 0.0);
    for (std::int32_t i = cols - 1; i >= 0; --i) {
      double s = g[i];
      for (std::int32_t k = i + 1; k < cols; ++k) s -= h(i, k) * y[k];
      y[i] = s / h(i, i);
    }
    Vec z(n, 0.0);
    for (std::int32_t i = 0; i < cols; ++i) axpy(y[i], v[i], z);
    apply_m(z, tmp);
    axpy(1.0, tmp, std::span<double>(x));

    if (cycle_converged) {
      report.converged = true;
      break;
    }
    compute_residual(r);
  }

  if (!report.converged) {
    compute_residual(r);
    report.converged = norm2(r) / bnorm <= cfg.r_tol;
  }
  return {std::move(x), report};
}

}  // namespace biotgeneo
