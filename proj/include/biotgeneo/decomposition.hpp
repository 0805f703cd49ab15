#pragma once

#include "biotgeneo/dense.hpp"
#include "biotgeneo/dofmap.hpp"
#include "biotgeneo/sparse.hpp"

namespace biotgeneo {

/// One extended subdomain of the displacement block: the DOFs it solves on
/// (its restriction operator R_i) and the 0/1 weights that make the family a
/// partition of unity (R~_i / D_i).
struct Subdomain {
  std::vector<std::int32_t> dofs;    ///< overlapped u-DOFs, ascending (defines R_i)
  std::vector<std::uint8_t> owned;   ///< per local DOF: 1 if this subdomain owns it
  std::int32_t owned_count = 0;
  /// Triangles lying entirely inside the extended region. Mesh-built
  /// decompositions fill this; it backs the locally assembled (Neumann)
  /// subdomain operators. Hand-built algebraic subdomains may leave it empty.
  std::vector<std::int32_t> elements;

  std::int32_t size() const { return static_cast<std::int32_t>(dofs.size()); }
};

/// Overlapping decomposition of the unconstrained displacement DOFs built
/// from a rectangular triangle partition. Each subdomain's extended region is
/// its cell block widened by `overlap` element layers in every direction
/// (clipped at the domain boundary); its DOF set is the unconstrained
/// displacement DOFs of the vertices inside that widened rectangle. Local
/// functions vanish past the rectangle, which realizes homogeneous local
/// Dirichlet conditions on internal subdomain boundaries, and for more than
/// one subdomain every overlapped set strictly contains its owned set.
struct Decomposition {
  std::int32_t overlap = 1;
  std::vector<Subdomain> subdomains;

  std::int32_t count() const { return static_cast<std::int32_t>(subdomains.size()); }

  static Decomposition build(const Mesh& mesh, const Partition& partition,
                             const DofMap& dofmap, std::int32_t overlap) {
    require(overlap >= 1, "Decomposition: overlap must be >= 1");
    require(partition.owner.size() == static_cast<std::size_t>(mesh.triangle_count()),
            "Decomposition: partition/mesh mismatch");
    require(partition.kx >= 1 && partition.ky >= 1 &&
                mesh.n % partition.kx == 0 && mesh.n % partition.ky == 0,
            "Decomposition: partition blocks must tile the mesh");

    const std::int32_t n_sub = partition.count();
    const std::int32_t nv = mesh.vertex_count();
    const std::int32_t mx = mesh.n / partition.kx;
    const std::int32_t my = mesh.n / partition.ky;

    std::vector<std::vector<std::int32_t>> vertex_tris(nv);
    for (std::int32_t t = 0; t < mesh.triangle_count(); ++t)
      for (std::int32_t v : mesh.triangles[t]) vertex_tris[v].push_back(t);

    // A vertex is owned by the lowest-index subdomain among its incident
    // elements' owners; ownership is disjoint and refines the overlapped
    // sets.
    std::vector<std::int32_t> vertex_owner(nv);
    for (std::int32_t v = 0; v < nv; ++v) {
      std::int32_t o = n_sub;
      for (std::int32_t t : vertex_tris[v]) o = std::min(o, partition.owner[t]);
      vertex_owner[v] = o;
    }

    Decomposition d;
    d.overlap = overlap;
    d.subdomains.resize(n_sub);

    for (std::int32_t i = 0; i < n_sub; ++i) {
      const std::int32_t bx = i % partition.kx;
      const std::int32_t by = i / partition.kx;
      const std::int32_t i_lo = std::max<std::int32_t>(0, bx * mx - overlap);
      const std::int32_t i_hi = std::min<std::int32_t>(mesh.n, (bx + 1) * mx + overlap);
      const std::int32_t j_lo = std::max<std::int32_t>(0, by * my - overlap);
      const std::int32_t j_hi = std::min<std::int32_t>(mesh.n, (by + 1) * my + overlap);

      Subdomain& sub = d.subdomains[i];
      for (std::int32_t vj = j_lo; vj <= j_hi; ++vj)
        for (std::int32_t vi = i_lo; vi <= i_hi; ++vi) {
          const std::int32_t v = vj * (mesh.n + 1) + vi;
          for (int c = 0; c < 2; ++c) {
            const std::int32_t dof = DofMap::vector_dof(v, c);
            if (dofmap.u_constrained[dof]) continue;
            sub.dofs.push_back(dof);
            sub.owned.push_back(vertex_owner[v] == i ? 1 : 0);
            sub.owned_count += sub.owned.back();
          }
        }
      for (std::int32_t t = 0; t < mesh.triangle_count(); ++t) {
        bool inside = true;
        for (std::int32_t v : mesh.triangles[t]) {
          const std::int32_t vi = v % (mesh.n + 1);
          const std::int32_t vj = v / (mesh.n + 1);
          if (vi < i_lo || vi > i_hi || vj < j_lo || vj > j_hi) {
            inside = false;
            break;
          }
        }
        if (inside) sub.elements.push_back(t);
      }
      require(sub.size() > 0, "Decomposition: empty subdomain");
    }

    // Partition-of-unity audit: each unconstrained DOF owned exactly once
    // and covered by at least one overlapped set.
    std::vector<std::int32_t> owner_hits(dofmap.n_u, 0), cover_hits(dofmap.n_u, 0);
    for (const Subdomain& sub : d.subdomains)
      for (std::int32_t k = 0; k < sub.size(); ++k) {
        cover_hits[sub.dofs[k]] += 1;
        owner_hits[sub.dofs[k]] += sub.owned[k];
      }
    for (std::int32_t dof = 0; dof < dofmap.n_u; ++dof) {
      if (dofmap.u_constrained[dof]) {
        require(cover_hits[dof] == 0, "Decomposition: constrained DOF in a subdomain");
      } else {
        require(owner_hits[dof] == 1 && cover_hits[dof] >= 1,
                "Decomposition: partition of unity violated");
      }
    }
    return d;
  }
};

/// x restricted to subdomain coordinates: (R_i x)[k] = x[dofs[k]].
inline Vec restrict_to(const Subdomain& sub, std::span<const double> x) {
  Vec local(static_cast<std::size_t>(sub.size()));
  for (std::int32_t k = 0; k < sub.size(); ++k) local[k] = x[sub.dofs[k]];
  return local;
}

/// y += R_i^T v (prolongation of a full local vector).
inline void prolong_add(const Subdomain& sub, std::span<const double> v, std::span<double> y) {
  for (std::int32_t k = 0; k < sub.size(); ++k) y[sub.dofs[k]] += v[k];
}

/// y += R~_i^T v: only owned entries scatter, so subdomain writes are
/// disjoint across the decomposition.
inline void prolong_owned_add(const Subdomain& sub, std::span<const double> v,
                              std::span<double> y) {
  for (std::int32_t k = 0; k < sub.size(); ++k)
    if (sub.owned[k]) y[sub.dofs[k]] += v[k];
}

/// Principal sparse submatrix of A on the subdomain's DOFs (row/col order =
/// local order). Used for the local solves.
inline SparseMatrix local_submatrix(const Subdomain& sub, const SparseMatrix& a) {
  std::vector<std::int32_t> global_to_local(a.ncols, -1);
  for (std::int32_t k = 0; k < sub.size(); ++k) global_to_local[sub.dofs[k]] = k;
  std::vector<Triplet> trip;
  for (std::int32_t k = 0; k < sub.size(); ++k) {
    const std::int32_t r = sub.dofs[k];
    for (std::int64_t q = a.row_offsets[r]; q < a.row_offsets[r + 1]; ++q) {
      const std::int32_t lc = global_to_local[a.cols[q]];
      if (lc >= 0) trip.push_back({k, lc, a.vals[q]});
    }
  }
  return SparseMatrix::from_triplets(sub.size(), sub.size(), trip);
}

/// Dense principal submatrix A_i' = R_i A R_i^T on subdomain i's DOFs.
inline DenseMatrix local_operator(const Subdomain& sub, const SparseMatrix& a) {
  const SparseMatrix s = local_submatrix(sub, a);
  DenseMatrix d(s.nrows, s.ncols);
  for (std::int32_t r = 0; r < s.nrows; ++r)
    for (std::int64_t k = s.row_offsets[r]; k < s.row_offsets[r + 1]; ++k)
      d(r, s.cols[k]) = s.vals[k];
  return d;
}

}  // namespace biotgeneo
