#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "biotgeneo/mesh.hpp"

using namespace biotgeneo;

TEST_CASE("unit square mesh has the expected entity counts", "[mesh]") {
  const Mesh m = Mesh::unit_square(2);
  REQUIRE(m.vertex_count() == 9);
  REQUIRE(m.triangle_count() == 8);
  REQUIRE(m.edges.size() == 16);

  int boundary = 0;
  for (const Edge& e : m.edges)
    if (e.boundary()) ++boundary;
  REQUIRE(boundary == 8);

  // Euler: V - E + T = 1 for a disc.
  REQUIRE(m.vertex_count() - static_cast<int>(m.edges.size()) + m.triangle_count() == 1);

  const Mesh m4 = Mesh::unit_square(4);
  REQUIRE(m4.vertex_count() == 25);
  REQUIRE(m4.triangle_count() == 32);
  REQUIRE(m4.edges.size() == 56);  // 2*4*5 axis-aligned + 16 diagonals
}

TEST_CASE("triangles are positively oriented with area h^2/2", "[mesh]") {
  for (int n : {1, 2, 5}) {
    const Mesh m = Mesh::unit_square(n);
    double total = 0.0;
    for (std::int32_t t = 0; t < m.triangle_count(); ++t) {
      const TriangleGeometry g = m.geometry(t);
      REQUIRE(g.area > 0.0);
      REQUIRE(g.area == Catch::Approx(0.5 / (n * n)).epsilon(1e-14));
      total += g.area;
    }
    REQUIRE(total == Catch::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("P1 gradients reproduce linear functions", "[mesh]") {
  const Mesh m = Mesh::unit_square(3);
  // For f(x,y) = 2x + 5y - 1 the P1 interpolant gradient must be (2,5).
  for (std::int32_t t = 0; t < m.triangle_count(); ++t) {
    const TriangleGeometry g = m.geometry(t);
    double gx = 0.0, gy = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double f = 2.0 * g.coords[k][0] + 5.0 * g.coords[k][1] - 1.0;
      gx += f * g.grad[k][0];
      gy += f * g.grad[k][1];
    }
    REQUIRE(gx == Catch::Approx(2.0).epsilon(1e-13));
    REQUIRE(gy == Catch::Approx(5.0).epsilon(1e-13));
    // Gradients of the three basis functions sum to zero.
    REQUIRE(std::abs(g.grad[0][0] + g.grad[1][0] + g.grad[2][0]) < 1e-13);
    REQUIRE(std::abs(g.grad[0][1] + g.grad[1][1] + g.grad[2][1]) < 1e-13);
  }
}

TEST_CASE("edges are consistent with triangle incidence", "[mesh]") {
  const Mesh m = Mesh::unit_square(3);
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const Edge& edge = m.edges[e];
    REQUIRE(edge.v0 < edge.v1);
    for (std::int32_t t : {edge.tri0, edge.tri1}) {
      if (t < 0) continue;
      const auto& tri = m.triangles[t];
      const std::set<std::int32_t> vs(tri.begin(), tri.end());
      REQUIRE(vs.count(edge.v0) == 1);
      REQUIRE(vs.count(edge.v1) == 1);
      const auto& te = m.triangle_edges[t];
      REQUIRE(std::count(te.begin(), te.end(), static_cast<std::int32_t>(e)) == 1);
    }
  }
  // Each triangle references three distinct edges.
  for (std::int32_t t = 0; t < m.triangle_count(); ++t) {
    const auto& te = m.triangle_edges[t];
    REQUIRE(std::set<std::int32_t>(te.begin(), te.end()).size() == 3);
  }
}

TEST_CASE("boundary edges lie on the square boundary with outward normals", "[mesh]") {
  const Mesh m = Mesh::unit_square(4);
  for (const Edge& e : m.edges) {
    const Point a = m.vertices[e.v0], b = m.vertices[e.v1];
    const bool on_boundary =
        (a[0] == 0.0 && b[0] == 0.0) || (a[0] == 1.0 && b[0] == 1.0) ||
        (a[1] == 0.0 && b[1] == 0.0) || (a[1] == 1.0 && b[1] == 1.0);
    REQUIRE(e.boundary() == on_boundary);
    if (e.boundary()) {
      REQUIRE(e.dirichlet_u);
      REQUIRE(e.flux_z);
      const Point nrm = e.outward_normal();
      // The normal points away from the domain: midpoint + eps*normal leaves [0,1]^2.
      const double mx = 0.5 * (a[0] + b[0]) + 1e-6 * nrm[0];
      const double my = 0.5 * (a[1] + b[1]) + 1e-6 * nrm[1];
      REQUIRE((mx < 0.0 || mx > 1.0 || my < 0.0 || my > 1.0));
      REQUIRE(std::abs(nrm[0] * nrm[0] + nrm[1] * nrm[1] - 1.0) < 1e-15);
    } else {
      REQUIRE(e.tri0 != e.tri1);
      REQUIRE_THROWS_AS(e.outward_normal(), Error);
    }
  }
}

TEST_CASE("edge lengths are h or h*sqrt(2)", "[mesh]") {
  const Mesh m = Mesh::unit_square(2);
  const double h = m.h();
  for (const Edge& e : m.edges) {
    const double len = m.edge_length(e);
    const bool axis = std::abs(len - h) < 1e-14;
    const bool diag = std::abs(len - h * std::sqrt(2.0)) < 1e-14;
    REQUIRE((axis || diag));
  }
}

TEST_CASE("mesh construction is deterministic", "[mesh]") {
  const Mesh a = Mesh::unit_square(3);
  const Mesh b = Mesh::unit_square(3);
  REQUIRE(a.triangles == b.triangles);
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t e = 0; e < a.edges.size(); ++e) {
    REQUIRE(a.edges[e].v0 == b.edges[e].v0);
    REQUIRE(a.edges[e].v1 == b.edges[e].v1);
    REQUIRE(a.edges[e].tri0 == b.edges[e].tri0);
    REQUIRE(a.edges[e].tri1 == b.edges[e].tri1);
  }
}

TEST_CASE("invalid mesh size is rejected", "[mesh]") {
  REQUIRE_THROWS_AS(Mesh::unit_square(0), std::invalid_argument);
  REQUIRE_THROWS_AS(Mesh::unit_square(-2), std::invalid_argument);
}

TEST_CASE("structured partition assigns equal blocks", "[mesh][partition]") {
  const Mesh m = Mesh::unit_square(8);
  const Partition p = Partition::structured(m, 2, 2);
  REQUIRE(p.count() == 4);
  std::vector<int> sizes(4, 0);
  for (std::int32_t t = 0; t < m.triangle_count(); ++t) {
    REQUIRE(p.owner[t] >= 0);
    REQUIRE(p.owner[t] < 4);
    ++sizes[p.owner[t]];
  }
  for (int s : sizes) REQUIRE(s == 32);

  // Owners follow the centroid block: triangle in cell (i,j) belongs to
  // block (i/4, j/4) with index by*kx + bx.
  for (std::int32_t t = 0; t < m.triangle_count(); ++t) {
    const Point c = m.centroid(t);
    const int bx = static_cast<int>(c[0] * 2.0);
    const int by = static_cast<int>(c[1] * 2.0);
    REQUIRE(p.owner[t] == by * 2 + bx);
  }
}

TEST_CASE("single-subdomain partition owns everything", "[mesh][partition]") {
  const Mesh m = Mesh::unit_square(4);
  const Partition p = Partition::structured(m, 1, 1);
  REQUIRE(p.count() == 1);
  for (std::int32_t o : p.owner) REQUIRE(o == 0);
}

TEST_CASE("partition validates its inputs", "[mesh][partition]") {
  const Mesh m = Mesh::unit_square(6);
  REQUIRE_THROWS_AS(Partition::structured(m, 4, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(Partition::structured(m, 2, 5), std::invalid_argument);
  REQUIRE_THROWS_AS(Partition::structured(m, 0, 1), std::invalid_argument);
  REQUIRE_NOTHROW(Partition::structured(m, 3, 2));
  REQUIRE_NOTHROW(Partition::structured(m, 6, 6));
}
