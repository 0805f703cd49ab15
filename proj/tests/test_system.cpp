#include <catch2/catch_amalgamated.hpp>

#include "biotgeneo/assembly.hpp"
#include "biotgeneo/gmres.hpp"
#include "biotgeneo/norms.hpp"
#include "biotgeneo/sparse_cholesky.hpp"
#include "support.hpp"

using namespace biotgeneo;

namespace {

Discretization make_disc(std::int32_t n, double nu = 0.3, double kappa = 1e-2,
                         ModelParams params = {}) {
  Mesh mesh = Mesh::unit_square(n);
  MaterialField mat = MaterialField::constant(mesh, nu, kappa);
  return Discretization::build(std::move(mesh), std::move(mat), params);
}

ManufacturedSolution data_for(const Discretization& d) {
  return ManufacturedSolution::from(d.material.lambda[0], d.material.mu[0],
                                    d.material.kappa[0]);
}

DenseMatrix compose_global(const Discretization& d) {
  const DofMap& dm = d.dofmap;
  DenseMatrix m(dm.total(), dm.total());
  auto insert = [&](const SparseMatrix& blk, std::int32_t r0, std::int32_t c0, double sign) {
    for (std::int32_t r = 0; r < blk.nrows; ++r)
      for (std::int64_t k = blk.row_offsets[r]; k < blk.row_offsets[r + 1]; ++k)
        m(r0 + r, c0 + blk.cols[k]) += sign * blk.vals[k];
  };
  insert(d.au, dm.u_offset(), dm.u_offset(), 1.0);
  insert(d.b1t, dm.u_offset(), dm.p_offset(), 1.0);
  insert(d.az, dm.z_offset(), dm.z_offset(), 1.0);
  insert(d.b2t, dm.z_offset(), dm.p_offset(), 1.0);
  insert(d.b1, dm.p_offset(), dm.u_offset(), 1.0);
  insert(d.b2, dm.p_offset(), dm.z_offset(), 1.0);
  insert(d.ap, dm.p_offset(), dm.p_offset(), -1.0);
  return m;
}

}  // namespace

TEST_CASE("global block matrix is symmetric and matches its operator", "[system]") {
  const Discretization d = make_disc(2);
  const DenseMatrix m = compose_global(d);

  double max_entry = 0.0, max_asym = 0.0;
  for (std::int32_t i = 0; i < m.nrows; ++i)
    for (std::int32_t j = 0; j < m.ncols; ++j) {
      max_entry = std::max(max_entry, std::abs(m(i, j)));
      max_asym = std::max(max_asym, std::abs(m(i, j) - m(j, i)));
    }
  REQUIRE(max_asym <= 1e-12 * max_entry);

  // apply_global agrees with the dense composition on random vectors.
  for (int trial = 0; trial < 3; ++trial) {
    const Vec x = testsupport::random_vec(d.dofmap.total(), 100 + trial);
    Vec y(x.size());
    d.apply_global(x, y);
    const Vec y_ref = m.multiply(x);
    for (std::size_t i = 0; i < y.size(); ++i)
      REQUIRE(y[i] == Catch::Approx(y_ref[i]).margin(1e-12));
  }
}

TEST_CASE("eliminated diagonal blocks pass the SPD certificate", "[system]") {
  for (const double nu : {0.3, 0.4999}) {
    const Discretization d = make_disc(4, nu, 1e-2);
    REQUIRE_NOTHROW(SparseCholesky::factor(d.au));
    REQUIRE_NOTHROW(SparseCholesky::factor(d.az));
    REQUIRE(symmetry_error(d.au) < 1e-12 * max_abs(d.au.vals));
    REQUIRE(symmetry_error(d.az) < 1e-14 * max_abs(d.az.vals));
  }
}

TEST_CASE("constrained rows read identity and raw kernel holds", "[system]") {
  const Discretization d = make_disc(2);
  // Raw pressure block annihilates constants (c0 = 0).
  REQUIRE(max_abs(spmv(d.ap_raw, Vec(d.dofmap.n_p, 1.0))) < 1e-15);
  // Eliminated block does not (pin row contributes its unit diagonal).
  REQUIRE(spmv(d.ap, Vec(d.dofmap.n_p, 1.0))[0] == 1.0);

  // Unit vector on a constrained u-DOF maps to itself under A_u.
  const std::int32_t c = d.dofmap.u_constrained_list[0];
  Vec e(d.dofmap.n_u, 0.0);
  e[c] = 1.0;
  const Vec r = spmv(d.au, e);
  for (std::int32_t i = 0; i < d.dofmap.n_u; ++i)
    REQUIRE(r[i] == (i == c ? 1.0 : 0.0));
}

TEST_CASE("zero data source is an exact fixed point of the step", "[system]") {
  const Discretization d = make_disc(3);
  const auto zero = ManufacturedSolution::zero_source();
  const Vec state(d.dofmap.total(), 0.0);
  const Vec f = d.rhs(state, 0.0125, zero);
  REQUIRE(max_abs(f) == 0.0);
}

TEST_CASE("first-step right-hand side is driven by the source", "[system]") {
  const Discretization d = make_disc(2);
  const auto data = data_for(d);
  const Vec state(d.dofmap.total(), 0.0);
  const Vec f = d.rhs(state, d.params.dt, data);

  const auto f3 = std::span(f).subspan(d.dofmap.p_offset(), d.dofmap.n_p);
  double f3_interior = 0.0;
  for (std::int32_t t = 1; t < d.dofmap.n_p; ++t) f3_interior += std::abs(f3[t]);
  REQUIRE(f3_interior > 0.0);

  // Constrained entries carry the prescribed trace values.
  for (std::int32_t c : d.dofmap.u_constrained_list) {
    const Point x = d.mesh.vertices[c / 2];
    REQUIRE(f[d.dofmap.u_offset() + c] ==
            Catch::Approx(data.u(x, d.params.dt)[c % 2]).margin(1e-15));
  }
  REQUIRE(f[d.dofmap.p_offset()] ==
          Catch::Approx(-data.p(d.mesh.centroid(0), d.params.dt)).margin(1e-15));
}

TEST_CASE("one implicit step matches a dense direct solve", "[system]") {
  const Discretization d = make_disc(2);
  const auto data = data_for(d);
  const Vec state(d.dofmap.total(), 0.0);
  const Vec f = d.rhs(state, d.params.dt, data);

  const Vec x_direct = testsupport::lu_solve(compose_global(d), f);

  KrylovConfig cfg;
  cfg.r_tol = 1e-12;
  cfg.max_iters = 500;
  auto apply = [&](std::span<const double> x, std::span<double> y) { d.apply_global(x, y); };
  const auto [x_gmres, report] = gmres(apply, identity_operator, f, Vec(f.size(), 0.0), cfg);
  REQUIRE(report.converged);

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    num += (x_gmres[i] - x_direct[i]) * (x_gmres[i] - x_direct[i]);
    den += x_direct[i] * x_direct[i];
  }
  REQUIRE(std::sqrt(num / den) < 1e-6);

  // The solved step respects the essential data exactly.
  for (std::int32_t c : d.dofmap.u_constrained_list) {
    const Point x = d.mesh.vertices[c / 2];
    REQUIRE(x_direct[d.dofmap.u_offset() + c] ==
            Catch::Approx(data.u(x, d.params.dt)[c % 2]).margin(1e-12));
  }
  REQUIRE(x_direct[d.dofmap.p_offset()] ==
          Catch::Approx(data.p(d.mesh.centroid(0), d.params.dt)).margin(1e-12));
}

TEST_CASE("error norms reproduce the zero-state reference value", "[norms]") {
  const Discretization d = make_disc(64);
  const auto data = data_for(d);
  const Vec zero_state(d.dofmap.total(), 0.0);
  const ErrorNorms e = error_norms(zero_state, d, data, 0.125);
  REQUIRE(e.e_p == Catch::Approx(std::sin(std::numbers::pi / 4.0) / 2.0).epsilon(2e-3));

  // The interpolant of the exact solution beats the zero field in every norm.
  const Vec interp = interpolate_exact(d, data, 0.125);
  const ErrorNorms ei = error_norms(interp, d, data, 0.125);
  REQUIRE(ei.e_u < error_norms(zero_state, d, data, 0.125).e_u);
  REQUIRE(ei.e_z < e.e_z);
  REQUIRE(ei.e_p < e.e_p);
  REQUIRE(ei.e_u < 1e-3);
}

TEST_CASE("pressure error decreases about linearly with h", "[norms]") {
  const auto data = ManufacturedSolution::from(0.576923, 0.384615, 1e-2);
  double prev = 0.0;
  for (int step = 0; step < 2; ++step) {
    const std::int32_t n = step == 0 ? 16 : 32;
    const Discretization d = make_disc(n);
    const Vec interp = interpolate_exact(d, data, 0.125);
    const ErrorNorms e = error_norms(interp, d, data, 0.125);
    if (step == 1) {
      const double ratio = prev / e.e_p;
      REQUIRE(ratio > 1.5);
      REQUIRE(ratio < 2.5);
    }
    prev = e.e_p;
  }
}
