#pragma once

#include "biotgeneo/assembly.hpp"

namespace biotgeneo {

struct ErrorNorms {
  double e_u = 0.0, e_z = 0.0, e_p = 0.0;
};

/// L2 errors of the three fields against the reference solution at time t,
/// by the 3-point edge-midpoint rule per triangle (degree-2 exact).
inline ErrorNorms error_norms(const Vec& state, const Discretization& disc,
                              const ManufacturedSolution& exact, double t) {
  const DofMap& dm = disc.dofmap;
  require(state.size() == static_cast<std::size_t>(dm.total()), "error_norms: size mismatch");
  const auto u_h = std::span(state).subspan(dm.u_offset(), dm.n_u);
  const auto z_h = std::span(state).subspan(dm.z_offset(), dm.n_z);
  const auto p_h = std::span(state).subspan(dm.p_offset(), dm.n_p);

  double su = 0.0, sz = 0.0, sp = 0.0;
  const Mesh& mesh = disc.mesh;
  for (std::int32_t tri = 0; tri < mesh.triangle_count(); ++tri) {
    const TriangleGeometry g = mesh.geometry(tri);
    const auto& vs = mesh.triangles[tri];
    const double w = g.area / 3.0;
    for (int k = 0; k < 3; ++k) {
      const std::int32_t a = vs[k], b = vs[(k + 1) % 3];
      const Point m = {0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                       0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1])};
      const Point ue = exact.u(m, t), ze = exact.z(m, t);
      const double pe = exact.p(m, t);
      for (int c = 0; c < 2; ++c) {
        const double uh = 0.5 * (u_h[DofMap::vector_dof(a, c)] + u_h[DofMap::vector_dof(b, c)]);
        const double zh = 0.5 * (z_h[DofMap::vector_dof(a, c)] + z_h[DofMap::vector_dof(b, c)]);
        su += w * (uh - ue[c]) * (uh - ue[c]);
        sz += w * (zh - ze[c]) * (zh - ze[c]);
      }
      sp += w * (p_h[tri] - pe) * (p_h[tri] - pe);
    }
  }
  return {std::sqrt(su), std::sqrt(sz), std::sqrt(sp)};
}

/// Nodal/elementwise interpolant of the reference fields at time t, mainly
/// for initial states and interpolation-error baselines.
inline Vec interpolate_exact(const Discretization& disc, const ManufacturedSolution& exact,
                             double t) {
  const DofMap& dm = disc.dofmap;
  Vec state(static_cast<std::size_t>(dm.total()), 0.0);
  for (std::int32_t v = 0; v < disc.mesh.vertex_count(); ++v) {
    const Point x = disc.mesh.vertices[v];
    const Point u = exact.u(x, t), z = exact.z(x, t);
    for (int c = 0; c < 2; ++c) {
      state[dm.u_offset() + DofMap::vector_dof(v, c)] = u[c];
      state[dm.z_offset() + DofMap::vector_dof(v, c)] = z[c];
    }
  }
  for (std::int32_t tri = 0; tri < disc.mesh.triangle_count(); ++tri)
    state[dm.p_offset() + tri] = exact.p(disc.mesh.centroid(tri), t);
  return state;
}

}  // namespace biotgeneo
