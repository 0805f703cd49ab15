#pragma once

#include <functional>
#include <iostream>
#include <optional>

#include "biotgeneo/decomposition.hpp"
#include "biotgeneo/sparse_cholesky.hpp"

namespace biotgeneo {

/// Eigenpair selection rule for the coarse space: the fixed_count smallest
/// eigenvalues per subdomain, or every eigenvalue below tau when tau is set.
struct CoarseSelection {
  std::int32_t fixed_count = 15;
  std::optional<double> tau;
};

/// Builds the left-hand pencil matrix for subdomain i on demand. Used to
/// substitute a locally assembled (Neumann) subdomain operator for the
/// default principal submatrix A_i'; an empty function keeps the default.
using LocalPencilAssembler = std::function<DenseMatrix(std::int32_t)>;

/// Local generalized eigenproblem L_i y = lambda (D_i A_i' D_i) y on
/// subdomain i, ascending finite eigenvalues. By default L_i is the
/// principal submatrix A_i' = R_i A R_i^T. When `left` is supplied it is a
/// locally assembled operator that may be singular (rigid modes), so the
/// pencil is solved in the shifted SPD form (L_i + B_i) y = (lambda+1) B_i y
/// with B_i = D_i A_i' D_i. max_pairs < 0 solves for all finite pairs;
/// otherwise only the max_pairs smallest are computed.
inline std::vector<GeneralizedEigPair> local_geneo_eigenpairs(
    const Subdomain& sub, const SparseMatrix& a, std::int32_t max_pairs = -1,
    const DenseMatrix* left = nullptr) {
  const DenseMatrix a_local = local_operator(sub, a);
  DenseMatrix b = a_local;
  for (std::int32_t j = 0; j < b.ncols; ++j)
    for (std::int32_t i = 0; i < b.nrows; ++i)
      if (!sub.owned[i] || !sub.owned[j]) b(i, j) = 0.0;
  if (left == nullptr) return generalized_symmetric_eig(a_local, b, max_pairs);

  require(left->nrows == a_local.nrows && left->ncols == a_local.ncols,
          "local_geneo_eigenpairs: left pencil matrix size mismatch");
  DenseMatrix shifted = *left;
  double trace = 0.0;
  for (std::int32_t j = 0; j < shifted.ncols; ++j) {
    for (std::int32_t i = 0; i < shifted.nrows; ++i) shifted(i, j) += b(i, j);
    trace += shifted(j, j);
  }
  // Tiny diagonal guard: the shifted matrix is SPD in exact arithmetic but
  // the rigid-mode kernel of the assembled operator can leave it borderline
  // for Cholesky at extreme coefficient contrasts.
  for (std::int32_t j = 0; j < shifted.ncols; ++j)
    shifted(j, j) += 1e-12 * trace / shifted.ncols;
  auto pairs = generalized_symmetric_eig(shifted, b, max_pairs);
  for (auto& pair : pairs) pair.lambda -= 1.0;
  return pairs;
}

/// GenEO coarse space: deflation matrix P with one sparse column per kept
/// local eigenvector (supported on the subdomain's owned DOFs) and the
/// factorized Galerkin product E = P^T A P.
class CoarseSpace {
public:
  SparseMatrix p, p_t;                 ///< n x n_c and its transpose
  std::vector<Vec> lambdas;            ///< selected eigenvalues per subdomain
  std::int32_t dropped_columns = 0;

  std::int32_t size() const { return p.ncols; }

  static CoarseSpace build(const Decomposition& decomp, const SparseMatrix& a,
                           const CoarseSelection& selection,
                           const LocalPencilAssembler& left_assembler = {}) {
    require(selection.tau.has_value() || selection.fixed_count >= 0,
            "CoarseSpace: invalid selection");
    CoarseSpace cs;
    cs.lambdas.resize(decomp.count());

    std::vector<Triplet> trip;
    std::int32_t n_c = 0;
    for (std::int32_t i = 0; i < decomp.count(); ++i) {
      const Subdomain& sub = decomp.subdomains[i];
      const std::int32_t want = selection.tau ? -1
                                              : std::min<std::int32_t>(selection.fixed_count,
                                                                       sub.owned_count);
      if (want == 0) continue;
      std::optional<DenseMatrix> left;
      if (left_assembler) left = left_assembler(i);
      const auto pairs = local_geneo_eigenpairs(sub, a, want, left ? &*left : nullptr);
      std::size_t take = pairs.size();
      if (selection.tau) {
        take = 0;
        while (take < pairs.size() && pairs[take].lambda < *selection.tau) ++take;
      }
      for (std::size_t k = 0; k < take; ++k) {
        cs.lambdas[i].push_back(pairs[k].lambda);
        for (std::int32_t l = 0; l < sub.size(); ++l)
          if (sub.owned[l] && pairs[k].v[l] != 0.0)
            trip.push_back({sub.dofs[l], n_c, pairs[k].v[l]});
        ++n_c;
      }
    }
    cs.p = SparseMatrix::from_triplets(a.nrows, n_c, std::move(trip));
    cs.p_t = cs.p.transposed();

    if (n_c > 0) {
      const SparseMatrix e_sparse = matmul(cs.p_t, matmul(a, cs.p));
      DenseMatrix e(n_c, n_c);
      for (std::int32_t r = 0; r < n_c; ++r)
        for (std::int64_t k = e_sparse.row_offsets[r]; k < e_sparse.row_offsets[r + 1]; ++k)
          e(r, e_sparse.cols[k]) = e_sparse.vals[k];
      double trace = 0.0;
      for (std::int32_t r = 0; r < n_c; ++r) trace += e(r, r);
      cs.e_factor_ = semidefinite_cholesky(e, 1e-10 * trace / n_c);
      cs.dropped_columns = static_cast<std::int32_t>(cs.e_factor_->dropped.size());
      if (cs.dropped_columns > 0)
        std::cerr << "warning: coarse space dropped " << cs.dropped_columns
                  << " dependent column(s) of " << n_c << "\n";
    }
    return cs;
  }

  /// q = Q r = P E^{-1} P^T r (zero when the space is empty; dependent
  /// coarse directions dropped by the factorization carry no correction).
  Vec apply_q(std::span<const double> r) const {
    Vec q(r.size(), 0.0);
    if (size() == 0) return q;
    const Vec full = spmv(p_t, r);
    Vec reduced(e_factor_->kept.size());
    for (std::size_t k = 0; k < reduced.size(); ++k) reduced[k] = full[e_factor_->kept[k]];
    const Vec solved = e_factor_->solve(reduced);
    Vec coarse(full.size(), 0.0);
    for (std::size_t k = 0; k < solved.size(); ++k) coarse[e_factor_->kept[k]] = solved[k];
    p.multiply(coarse, q);
    return q;
  }

private:
  std::optional<SemidefiniteCholesky> e_factor_;
};

/// Two-level compositions: Hybrid applies the coarse correction once
/// (deflated form), Balanced projects the residual on both sides of the
/// local solves, which is markedly stronger on nearly incompressible
/// elasticity at small coarse-space sizes.
enum class SchwarzVariant { OneLevel, Additive, Hybrid, Balanced };

struct SchwarzConfig {
  SchwarzVariant variant = SchwarzVariant::Hybrid;
  CoarseSelection selection;
  bool symmetric_scatter = false;  ///< use R_i^T instead of the restricted R~_i^T
  /// Optional locally assembled left pencil matrices for the coarse space.
  LocalPencilAssembler pencil_left;
  std::int32_t threads = 1;
};

/// Overlapping additive Schwarz operator for the displacement block, with
/// the optional GenEO second level. Constrained DOFs (unit rows of A) pass
/// through unchanged so the operator stays useful as a preconditioner for
/// the eliminated system.
class SchwarzPreconditioner {
public:
  static SchwarzPreconditioner build(const Decomposition& decomp, const SparseMatrix& a,
                                     const DofMap& dofmap, const SchwarzConfig& config) {
    require(a.nrows == dofmap.n_u, "SchwarzPreconditioner: matrix/dofmap mismatch");
    SchwarzPreconditioner pc;
    pc.decomp_ = &decomp;
    pc.a_ = &a;
    pc.config_ = config;
    pc.constrained_ = dofmap.u_constrained_list;
    pc.local_factors_.reserve(decomp.count());
    for (const Subdomain& sub : decomp.subdomains)
      pc.local_factors_.push_back(SparseCholesky::factor(local_submatrix(sub, a)));
    if (config.variant != SchwarzVariant::OneLevel)
      pc.coarse_ = CoarseSpace::build(decomp, a, config.selection, config.pencil_left);
    return pc;
  }

  const CoarseSpace* coarse() const { return coarse_ ? &*coarse_ : nullptr; }

  void apply(std::span<const double> r, std::span<double> x) const {
    require(r.size() == static_cast<std::size_t>(a_->nrows) && r.size() == x.size(),
            "SchwarzPreconditioner: size mismatch");
    std::fill(x.begin(), x.end(), 0.0);
    for (std::int32_t d : constrained_) x[d] = r[d];

    switch (config_.variant) {
      case SchwarzVariant::OneLevel:
        add_local_solves(r, x);
        break;
      case SchwarzVariant::Additive: {
        const Vec q = coarse_->apply_q(r);
        axpy(1.0, q, x);
        add_local_solves(r, x);
        break;
      }
      case SchwarzVariant::Hybrid: {
        const Vec q = coarse_->apply_q(r);
        Vec deflated(r.size());
        a_->multiply(q, deflated);
        for (std::size_t i = 0; i < r.size(); ++i) deflated[i] = r[i] - deflated[i];
        axpy(1.0, q, x);
        add_local_solves(deflated, x);
        break;
      }
      case SchwarzVariant::Balanced: {
        const Vec q = coarse_->apply_q(r);
        Vec deflated(r.size());
        a_->multiply(q, deflated);
        for (std::size_t i = 0; i < r.size(); ++i) deflated[i] = r[i] - deflated[i];
        Vec local(r.size(), 0.0);
        add_local_solves(deflated, local);
        Vec a_local_v(r.size());
        a_->multiply(local, a_local_v);
        const Vec q_post = coarse_->apply_q(a_local_v);
        axpy(1.0, q, x);
        axpy(1.0, local, x);
        axpy(-1.0, q_post, x);
        break;
      }
    }
  }

private:
  const Decomposition* decomp_ = nullptr;
  const SparseMatrix* a_ = nullptr;
  SchwarzConfig config_;
  std::vector<std::int32_t> constrained_;
  std::vector<SparseCholesky> local_factors_;
  std::optional<CoarseSpace> coarse_;

  // Local solves run in parallel; the scatter is sequential in subdomain
  // order, so results are identical for any thread count.
  void add_local_solves(std::span<const double> r, std::span<double> x) const {
    const auto n = static_cast<std::size_t>(decomp_->count());
    std::vector<Vec> sols(n);
    parallel_for(n, config_.threads, [&](std::size_t i) {
      sols[i] = local_factors_[i].solve(restrict_to(decomp_->subdomains[i], r));
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (config_.symmetric_scatter)
        prolong_add(decomp_->subdomains[i], sols[i], x);
      else
        prolong_owned_add(decomp_->subdomains[i], sols[i], x);
    }
  }
};

}  // namespace biotgeneo
