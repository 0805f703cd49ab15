#pragma once

#include "biotgeneo/dofmap.hpp"
#include "biotgeneo/manufactured.hpp"
#include "biotgeneo/material.hpp"
#include "biotgeneo/sparse.hpp"

namespace biotgeneo {

struct ModelParams {
  double alpha = 1.0;    ///< Biot-Willis coefficient
  double c0 = 0.0;       ///< constrained storage coefficient
  double dstab = 0.1;    ///< pressure-jump stabilization weight
  double dt = 0.0125;    ///< time step
  double t_end = 0.25;   ///< final time

  void validate() const {
    require(alpha > 0.0 && alpha <= 1.0, "ModelParams: alpha must lie in (0, 1]");
    require(c0 >= 0.0, "ModelParams: c0 must be nonnegative");
    require(dstab > 0.0, "ModelParams: dstab must be positive");
    require(dt > 0.0, "ModelParams: dt must be positive");
    require(t_end >= dt, "ModelParams: t_end must cover at least one step");
  }
};

/// Element stiffness of 2 mu eps(u):eps(v) + lambda (div u)(div v) on one
/// triangle; DOF order (v0x, v0y, v1x, v1y, v2x, v2y).
inline std::array<std::array<double, 6>, 6> elasticity_element(const TriangleGeometry& g,
                                                               double mu, double lambda) {
  require(g.area > 0.0, "elasticity_element: degenerate triangle");
  std::array<std::array<double, 6>, 6> k{};
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 2; ++i)
      for (int b = 0; b < 3; ++b)
        for (int j = 0; j < 2; ++j) {
          const double gab = g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1];
          double v = mu * (((i == j) ? gab : 0.0) + g.grad[a][j] * g.grad[b][i]);
          v += lambda * g.grad[a][i] * g.grad[b][j];
          k[2 * a + i][2 * b + j] = g.area * v;
        }
  return k;
}

/// Vector-P1 mass matrix scaled by `weight` (area/12 pattern per component).
inline std::array<std::array<double, 6>, 6> vector_mass_element(const TriangleGeometry& g,
                                                                double weight) {
  std::array<std::array<double, 6>, 6> m{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double v = weight * g.area / 12.0 * (a == b ? 2.0 : 1.0);
      m[2 * a][2 * b] = v;
      m[2 * a + 1][2 * b + 1] = v;
    }
  return m;
}

inline SparseMatrix assemble_elasticity(const Mesh& mesh, const MaterialField& material,
                                        const DofMap& dofmap) {
  require(material.size() == static_cast<std::size_t>(mesh.triangle_count()),
          "assemble_elasticity: material size mismatch");
  std::vector<Triplet> trip;
  trip.reserve(36ull * mesh.triangle_count());
  for (std::int32_t t = 0; t < mesh.triangle_count(); ++t) {
    const TriangleGeometry g = mesh.geometry(t);
    const auto k = elasticity_element(g, material.mu[t], material.lambda[t]);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i)
        for (int b = 0; b < 3; ++b)
          for (int j = 0; j < 2; ++j)
            trip.push_back({DofMap::vector_dof(tri[a], i), DofMap::vector_dof(tri[b], j),
                            k[2 * a + i][2 * b + j]});
  }
  return SparseMatrix::from_triplets(dofmap.n_u, dofmap.n_u, trip);
}

/// Flux mass block: vector-P1 mass with per-element weight dt / kappa.
inline SparseMatrix assemble_darcy_mass(const Mesh& mesh, const MaterialField& material,
                                        const DofMap& dofmap, double dt) {
  std::vector<Triplet> trip;
  trip.reserve(36ull * mesh.triangle_count());
  for (std::int32_t t = 0; t < mesh.triangle_count(); ++t) {
    const TriangleGeometry g = mesh.geometry(t);
    const auto m = vector_mass_element(g, dt / material.kappa[t]);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i)
        for (int b = 0; b < 3; ++b)
          for (int j = 0; j < 2; ++j)
            trip.push_back({DofMap::vector_dof(tri[a], i), DofMap::vector_dof(tri[b], j),
                            m[2 * a + i][2 * b + j]});
  }
  return SparseMatrix::from_triplets(dofmap.n_z, dofmap.n_z, trip);
}

/// Divergence couplings: B1[K, (v,c)] = -area * d(phi_v)/dx_c and
/// B2 = dt-scaled copy (both negative, matching the symmetrized system).
inline std::pair<SparseMatrix, SparseMatrix> assemble_div_couplings(const Mesh& mesh,
                                                                    const DofMap& dofmap,
                                                                    double dt) {
  std::vector<Triplet> t1, t2;
  t1.reserve(6ull * mesh.triangle_count());
  t2.reserve(6ull * mesh.triangle_count());
  for (std::int32_t t = 0; t < mesh.triangle_count(); ++t) {
    const TriangleGeometry g = mesh.geometry(t);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 2; ++c) {
        const double v = -g.area * g.grad[a][c];
        t1.push_back({t, DofMap::vector_dof(tri[a], c), v});
        t2.push_back({t, DofMap::vector_dof(tri[a], c), dt * v});
      }
  }
  return {SparseMatrix::from_triplets(dofmap.n_p, dofmap.n_u, t1),
          SparseMatrix::from_triplets(dofmap.n_p, dofmap.n_z, t2)};
}

/// Pressure block (c0/alpha) diag(area) plus the interior-edge jump
/// stabilizer with weight dstab * |e|^2 per edge.
inline SparseMatrix assemble_pressure_block(const Mesh& mesh, const ModelParams& params,
                                            const DofMap& dofmap) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangle_count() + 4 * mesh.edges.size());
  if (params.c0 != 0.0)
    for (std::int32_t t = 0; t < mesh.triangle_count(); ++t)
      trip.push_back({t, t, params.c0 / params.alpha * mesh.geometry(t).area});
  for (const Edge& e : mesh.edges) {
    if (e.boundary()) continue;
    const double len = mesh.edge_length(e);
    const double w = params.dstab * len * len;
    trip.push_back({e.tri0, e.tri0, w});
    trip.push_back({e.tri1, e.tri1, w});
    trip.push_back({e.tri0, e.tri1, -w});
    trip.push_back({e.tri1, e.tri0, -w});
  }
  return SparseMatrix::from_triplets(dofmap.n_p, dofmap.n_p, trip);
}

/// Zeroes constrained rows/columns; for square blocks places a unit diagonal
/// on constrained rows.
inline SparseMatrix eliminate_constraints(const SparseMatrix& a,
                                          const std::vector<std::uint8_t>& row_constrained,
                                          const std::vector<std::uint8_t>& col_constrained,
                                          bool unit_diagonal) {
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(a.nnz()));
  for (std::int32_t r = 0; r < a.nrows; ++r) {
    if (row_constrained[r]) continue;
    for (std::int64_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
      if (!col_constrained[a.cols[k]]) trip.push_back({r, a.cols[k], a.vals[k]});
  }
  if (unit_diagonal) {
    require(a.nrows == a.ncols, "eliminate_constraints: unit diagonal needs square block");
    for (std::int32_t r = 0; r < a.nrows; ++r)
      if (row_constrained[r]) trip.push_back({r, r, 1.0});
  }
  return SparseMatrix::from_triplets(a.nrows, a.ncols, trip);
}

/// All per-step-invariant data of the time-discrete system: raw blocks (no
/// boundary treatment, used to form right-hand sides) and eliminated blocks
/// (identity rows on essential DOFs, solved by the outer Krylov method).
struct Discretization {
  Mesh mesh;
  MaterialField material;
  ModelParams params;
  DofMap dofmap;

  SparseMatrix au_raw, az_raw, b1_raw, b2_raw, ap_raw, b1t_raw, b2t_raw;
  SparseMatrix au, az, b1, b2, ap, b1t, b2t;

  static Discretization build(Mesh mesh_in, MaterialField material_in, ModelParams params_in) {
    params_in.validate();
    Discretization d;
    d.mesh = std::move(mesh_in);
    d.material = std::move(material_in);
    d.params = params_in;
    d.dofmap = DofMap::build(d.mesh, d.params.c0);

    d.au_raw = assemble_elasticity(d.mesh, d.material, d.dofmap);
    d.az_raw = assemble_darcy_mass(d.mesh, d.material, d.dofmap, d.params.dt);
    std::tie(d.b1_raw, d.b2_raw) = assemble_div_couplings(d.mesh, d.dofmap, d.params.dt);
    d.ap_raw = assemble_pressure_block(d.mesh, d.params, d.dofmap);
    d.b1t_raw = d.b1_raw.transposed();
    d.b2t_raw = d.b2_raw.transposed();

    const auto& uc = d.dofmap.u_constrained;
    const auto& zc = d.dofmap.z_constrained;
    const auto& pc = d.dofmap.p_constrained;
    d.au = eliminate_constraints(d.au_raw, uc, uc, true);
    d.az = eliminate_constraints(d.az_raw, zc, zc, true);
    d.ap = eliminate_constraints(d.ap_raw, pc, pc, true);
    d.b1 = eliminate_constraints(d.b1_raw, pc, uc, false);
    d.b2 = eliminate_constraints(d.b2_raw, pc, zc, false);
    d.b1t = d.b1.transposed();
    d.b2t = d.b2.transposed();
    return d;
  }

  /// Essential-DOF values at time t: zeros except boundary traces and, when
  /// the pressure DOF is pinned, its exact centroid value.
  Vec constraint_values(double t, const ManufacturedSolution& data) const {
    Vec c(static_cast<std::size_t>(dofmap.total()), 0.0);
    for (std::int32_t d : dofmap.u_constrained_list) {
      const Point x = mesh.vertices[d / 2];
      c[dofmap.u_offset() + d] = data.u(x, t)[d % 2];
    }
    for (std::int32_t d : dofmap.z_constrained_list) {
      const Point x = mesh.vertices[d / 2];
      c[dofmap.z_offset() + d] = data.z(x, t)[d % 2];
    }
    for (std::int32_t d : dofmap.p_constrained_list)
      c[dofmap.p_offset() + d] = data.p(mesh.centroid(d), t);
    return c;
  }

  /// Per-step right-hand side at time t_n from the previous full state
  /// (implicit Euler, symmetrized block form, boundary lift included).
  Vec rhs(const Vec& state_prev, double t_n, const ManufacturedSolution& data) const {
    require(state_prev.size() == static_cast<std::size_t>(dofmap.total()),
            "rhs: state size mismatch");
    Vec f(state_prev.size(), 0.0);
    auto f1 = std::span(f).subspan(dofmap.u_offset(), dofmap.n_u);
    auto f2 = std::span(f).subspan(dofmap.z_offset(), dofmap.n_z);
    auto f3 = std::span(f).subspan(dofmap.p_offset(), dofmap.n_p);
    const auto u_prev = std::span(state_prev).subspan(dofmap.u_offset(), dofmap.n_u);
    const auto p_prev = std::span(state_prev).subspan(dofmap.p_offset(), dofmap.n_p);

    // f3 = -(dt/alpha) (g1, q) + B1 u_prev - A_p p_prev, all pre-elimination.
    Vec tmp(dofmap.n_p);
    for (std::int32_t t = 0; t < mesh.triangle_count(); ++t) {
      const TriangleGeometry g = mesh.geometry(t);
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        const Point& a = g.coords[k];
        const Point& b = g.coords[(k + 1) % 3];
        s += data.g1({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])}, t_n);
      }
      f3[t] = -(params.dt / params.alpha) * g.area / 3.0 * s;
    }
    b1_raw.multiply(u_prev, tmp);
    axpy(1.0, tmp, f3);
    ap_raw.multiply(p_prev, tmp);
    axpy(-1.0, tmp, f3);

    // Lift: f -= M_raw * c over constrained columns, then prescribe values.
    const Vec c = constraint_values(t_n, data);
    const auto c_u = std::span(c).subspan(dofmap.u_offset(), dofmap.n_u);
    const auto c_z = std::span(c).subspan(dofmap.z_offset(), dofmap.n_z);
    const auto c_p = std::span(c).subspan(dofmap.p_offset(), dofmap.n_p);
    Vec tu(dofmap.n_u), tz(dofmap.n_z);
    au_raw.multiply(c_u, tu);
    axpy(-1.0, tu, f1);
    b1t_raw.multiply(c_p, tu);
    axpy(-1.0, tu, f1);
    az_raw.multiply(c_z, tz);
    axpy(-1.0, tz, f2);
    b2t_raw.multiply(c_p, tz);
    axpy(-1.0, tz, f2);
    b1_raw.multiply(c_u, tmp);
    axpy(-1.0, tmp, f3);
    b2_raw.multiply(c_z, tmp);
    axpy(-1.0, tmp, f3);
    ap_raw.multiply(c_p, tmp);
    axpy(1.0, tmp, f3);

    for (std::int32_t d : dofmap.u_constrained_list)
      f1[d] = c[dofmap.u_offset() + d];
    for (std::int32_t d : dofmap.z_constrained_list)
      f2[d] = c[dofmap.z_offset() + d];
    // The pinned row lives in the negated pressure block of the global
    // matrix, so the prescribed value enters with a minus sign.
    for (std::int32_t d : dofmap.p_constrained_list)
      f3[d] = -c[dofmap.p_offset() + d];
    return f;
  }

  /// y = M x for the eliminated global block matrix
  /// [[A_u, 0, B1^T], [0, A_z, B2^T], [B1, B2, -A_p]].
  void apply_global(std::span<const double> x, std::span<double> y) const {
    require(x.size() == static_cast<std::size_t>(dofmap.total()) && x.size() == y.size(),
            "apply_global: size mismatch");
    const auto x_u = x.subspan(dofmap.u_offset(), dofmap.n_u);
    const auto x_z = x.subspan(dofmap.z_offset(), dofmap.n_z);
    const auto x_p = x.subspan(dofmap.p_offset(), dofmap.n_p);
    auto y_u = y.subspan(dofmap.u_offset(), dofmap.n_u);
    auto y_z = y.subspan(dofmap.z_offset(), dofmap.n_z);
    auto y_p = y.subspan(dofmap.p_offset(), dofmap.n_p);

    Vec tu(dofmap.n_u), tz(dofmap.n_z), tp(dofmap.n_p);
    au.multiply(x_u, y_u);
    b1t.multiply(x_p, tu);
    axpy(1.0, tu, y_u);
    az.multiply(x_z, y_z);
    b2t.multiply(x_p, tz);
    axpy(1.0, tz, y_z);
    b1.multiply(x_u, y_p);
    b2.multiply(x_z, tp);
    axpy(1.0, tp, y_p);
    ap.multiply(x_p, tp);
    axpy(-1.0, tp, y_p);
  }
};

}  // namespace biotgeneo
