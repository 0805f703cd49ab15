#pragma once

#include <array>
#include <unordered_map>

#include "biotgeneo/common.hpp"

namespace biotgeneo {

using Point = std::array<double, 2>;

struct Edge {
  std::int32_t v0 = -1, v1 = -1;   ///< endpoints, v0 < v1
  std::int32_t tri0 = -1, tri1 = -1;
  std::int8_t side = -1;           ///< boundary side 0=bottom 1=right 2=top 3=left
  bool dirichlet_u = false;        ///< essential displacement data on this edge
  bool flux_z = false;             ///< essential normal-flux data on this edge

  bool boundary() const { return tri1 < 0; }
  Point outward_normal() const {
    switch (side) {
      case 0: return {0.0, -1.0};
      case 1: return {1.0, 0.0};
      case 2: return {0.0, 1.0};
      case 3: return {-1.0, 0.0};
      default: throw Error("outward_normal: interior edge");
    }
  }
};

struct TriangleGeometry {
  double area = 0.0;
  std::array<Point, 3> grad;    ///< constant P1 basis gradients
  std::array<Point, 3> coords;  ///< vertex coordinates
};

/// Structured triangulation of the unit square: n x n grid cells, each split
/// along its lower-left-to-upper-right diagonal into two CCW triangles.
class Mesh {
public:
  std::int32_t n = 0;
  std::vector<Point> vertices;
  std::vector<std::array<std::int32_t, 3>> triangles;
  std::vector<Edge> edges;
  std::vector<std::array<std::int32_t, 3>> triangle_edges;

  double h() const { return 1.0 / n; }
  std::int32_t vertex_count() const { return static_cast<std::int32_t>(vertices.size()); }
  std::int32_t triangle_count() const { return static_cast<std::int32_t>(triangles.size()); }

  static Mesh unit_square(std::int32_t n) {
    require(n >= 1, "unit_square: n must be >= 1");
    Mesh m;
    m.n = n;
    const std::int32_t nv = n + 1;
    m.vertices.reserve(static_cast<std::size_t>(nv) * nv);
    for (std::int32_t j = 0; j < nv; ++j)
      for (std::int32_t i = 0; i < nv; ++i)
        m.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

    auto vid = [nv](std::int32_t i, std::int32_t j) { return j * nv + i; };
    m.triangles.reserve(2ull * n * n);
    for (std::int32_t j = 0; j < n; ++j)
      for (std::int32_t i = 0; i < n; ++i) {
        const std::int32_t v00 = vid(i, j), v10 = vid(i + 1, j);
        const std::int32_t v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
        m.triangles.push_back({v00, v10, v11});
        m.triangles.push_back({v00, v11, v01});
      }

    m.build_edges();
    return m;
  }

  TriangleGeometry geometry(std::int32_t t) const {
    const auto& tri = triangles[t];
    TriangleGeometry g;
    for (int k = 0; k < 3; ++k) g.coords[k] = vertices[tri[k]];
    const double x0 = g.coords[0][0], y0 = g.coords[0][1];
    const double x1 = g.coords[1][0], y1 = g.coords[1][1];
    const double x2 = g.coords[2][0], y2 = g.coords[2][1];
    const double det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    g.area = 0.5 * det;
    g.grad[0] = {(y1 - y2) / det, (x2 - x1) / det};
    g.grad[1] = {(y2 - y0) / det, (x0 - x2) / det};
    g.grad[2] = {(y0 - y1) / det, (x1 - x0) / det};
    return g;
  }

  Point centroid(std::int32_t t) const {
    const auto& tri = triangles[t];
    return {(vertices[tri[0]][0] + vertices[tri[1]][0] + vertices[tri[2]][0]) / 3.0,
            (vertices[tri[0]][1] + vertices[tri[1]][1] + vertices[tri[2]][1]) / 3.0};
  }

  double edge_length(const Edge& e) const {
    const double dx = vertices[e.v1][0] - vertices[e.v0][0];
    const double dy = vertices[e.v1][1] - vertices[e.v0][1];
    return std::sqrt(dx * dx + dy * dy);
  }

private:
  void build_edges() {
    // Deterministic ordering: edges appear in first-encounter order while
    // scanning triangles; triangle-local edges are (0,1), (1,2), (2,0).
    std::unordered_map<std::int64_t, std::int32_t> index;
    index.reserve(triangles.size() * 2);
    triangle_edges.resize(triangles.size());
    const auto nv = static_cast<std::int64_t>(vertices.size());
    for (std::int32_t t = 0; t < triangle_count(); ++t) {
      for (int k = 0; k < 3; ++k) {
        std::int32_t a = triangles[t][k], b = triangles[t][(k + 1) % 3];
        if (a > b) std::swap(a, b);
        const std::int64_t key = a * nv + b;
        auto it = index.find(key);
        if (it == index.end()) {
          Edge e;
          e.v0 = a;
          e.v1 = b;
          e.tri0 = t;
          it = index.emplace(key, static_cast<std::int32_t>(edges.size())).first;
          edges.push_back(e);
        } else {
          require(edges[it->second].tri1 < 0, "build_edges: non-manifold edge");
          edges[it->second].tri1 = t;
        }
        triangle_edges[t][k] = it->second;
      }
    }
    for (Edge& e : edges) {
      if (!e.boundary()) continue;
      const Point a = vertices[e.v0], b = vertices[e.v1];
      if (a[1] == 0.0 && b[1] == 0.0)
        e.side = 0;
      else if (a[0] == 1.0 && b[0] == 1.0)
        e.side = 1;
      else if (a[1] == 1.0 && b[1] == 1.0)
        e.side = 2;
      else if (a[0] == 0.0 && b[0] == 0.0)
        e.side = 3;
      else
        throw Error("build_edges: boundary edge not on the unit-square boundary");
      // The test problem drives both fields on the whole boundary.
      e.dirichlet_u = true;
      e.flux_z = true;
    }
  }
};

/// Assignment of triangles to a kx-by-ky grid of square subdomains by
/// centroid location. kx and ky must divide n so sub-boundaries align.
struct Partition {
  std::int32_t kx = 1, ky = 1;
  std::vector<std::int32_t> owner;  ///< per triangle

  std::int32_t count() const { return kx * ky; }

  static Partition structured(const Mesh& mesh, std::int32_t kx, std::int32_t ky) {
    require(kx >= 1 && ky >= 1, "Partition: kx, ky must be >= 1");
    require(mesh.n % kx == 0 && mesh.n % ky == 0, "Partition: kx, ky must divide n");
    Partition p;
    p.kx = kx;
    p.ky = ky;
    p.owner.resize(mesh.triangle_count());
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(kx) * ky, 0);
    for (std::int32_t t = 0; t < mesh.triangle_count(); ++t) {
      const Point c = mesh.centroid(t);
      const auto bx = std::min<std::int32_t>(static_cast<std::int32_t>(c[0] * kx), kx - 1);
      const auto by = std::min<std::int32_t>(static_cast<std::int32_t>(c[1] * ky), ky - 1);
      p.owner[t] = by * kx + bx;
      ++sizes[p.owner[t]];
    }
    for (std::int64_t s : sizes)
      require(s > 0, "Partition: empty subdomain");
    return p;
  }
};

}  // namespace biotgeneo
