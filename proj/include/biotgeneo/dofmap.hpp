#pragma once

#include "biotgeneo/mesh.hpp"

namespace biotgeneo {

/// Block-local DOF numbering: displacement and flux get two DOFs per vertex
/// (x component even, y component odd), pressure one DOF per triangle. The
/// global state vector is laid out [u | z | p].
struct DofMap {
  std::int32_t n_u = 0, n_z = 0, n_p = 0;

  std::vector<std::uint8_t> u_constrained;  ///< per u-DOF (block-local)
  std::vector<std::uint8_t> z_constrained;  ///< per z-DOF (block-local)
  std::vector<std::uint8_t> p_constrained;  ///< per p-DOF (block-local)
  std::vector<std::int32_t> u_constrained_list, z_constrained_list, p_constrained_list;

  std::int32_t total() const { return n_u + n_z + n_p; }
  std::int32_t u_offset() const { return 0; }
  std::int32_t z_offset() const { return n_u; }
  std::int32_t p_offset() const { return n_u + n_z; }

  static std::int32_t vector_dof(std::int32_t vertex, int component) {
    return 2 * vertex + component;
  }

  /// Marks essential DOFs: both displacement components at vertices of
  /// displacement-data edges, the normal flux component at vertices of
  /// flux-data edges (corners collect both components from the two incident
  /// sides). When the storage coefficient vanishes the pressure field is
  /// only determined up to a constant under all-boundary data, so the
  /// pressure DOF of triangle 0 is pinned.
  static DofMap build(const Mesh& mesh, double c0) {
    DofMap d;
    d.n_u = 2 * mesh.vertex_count();
    d.n_z = 2 * mesh.vertex_count();
    d.n_p = mesh.triangle_count();
    d.u_constrained.assign(d.n_u, 0);
    d.z_constrained.assign(d.n_z, 0);
    d.p_constrained.assign(d.n_p, 0);

    for (const Edge& e : mesh.edges) {
      if (!e.boundary()) continue;
      for (std::int32_t v : {e.v0, e.v1}) {
        if (e.dirichlet_u) {
          d.u_constrained[vector_dof(v, 0)] = 1;
          d.u_constrained[vector_dof(v, 1)] = 1;
        }
        if (e.flux_z) {
          const int normal_component = (e.side == 0 || e.side == 2) ? 1 : 0;
          d.z_constrained[vector_dof(v, normal_component)] = 1;
        }
      }
    }
    if (c0 == 0.0) d.p_constrained[0] = 1;

    for (std::int32_t i = 0; i < d.n_u; ++i)
      if (d.u_constrained[i]) d.u_constrained_list.push_back(i);
    for (std::int32_t i = 0; i < d.n_z; ++i)
      if (d.z_constrained[i]) d.z_constrained_list.push_back(i);
    for (std::int32_t i = 0; i < d.n_p; ++i)
      if (d.p_constrained[i]) d.p_constrained_list.push_back(i);
    return d;
  }
};

}  // namespace biotgeneo
