#pragma once

#include "biotgeneo/mesh.hpp"

namespace biotgeneo {

/// Lame parameters for unit Young modulus.
inline std::pair<double, double> lame_from_poisson(double nu) {
  require(nu >= 0.0 && nu < 0.5, "lame_from_poisson: nu must lie in [0, 0.5)");
  const double mu = 1.0 / (2.0 * (1.0 + nu));
  const double lambda = nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return {lambda, mu};
}

/// Per-triangle material data: Poisson ratio, permeability, derived Lame pair.
struct MaterialField {
  Vec nu, kappa, lambda, mu;

  std::size_t size() const { return nu.size(); }

  bool uniform() const {
    for (double v : nu)
      if (v != nu[0]) return false;
    for (double v : kappa)
      if (v != kappa[0]) return false;
    return true;
  }

  static MaterialField constant(const Mesh& mesh, double nu, double kappa) {
    require(kappa > 0.0, "MaterialField: kappa must be positive");
    MaterialField m;
    const auto nt = static_cast<std::size_t>(mesh.triangle_count());
    const auto [lambda, mu_v] = lame_from_poisson(nu);
    m.nu.assign(nt, nu);
    m.kappa.assign(nt, kappa);
    m.lambda.assign(nt, lambda);
    m.mu.assign(nt, mu_v);
    return m;
  }

  static MaterialField from_per_element(Vec nu, Vec kappa) {
    require(nu.size() == kappa.size(), "MaterialField: size mismatch");
    MaterialField m;
    m.nu = std::move(nu);
    m.kappa = std::move(kappa);
    m.lambda.resize(m.nu.size());
    m.mu.resize(m.nu.size());
    for (std::size_t e = 0; e < m.nu.size(); ++e) {
      require(m.kappa[e] > 0.0, "MaterialField: kappa must be positive");
      const auto [lambda, mu_v] = lame_from_poisson(m.nu[e]);
      m.lambda[e] = lambda;
      m.mu[e] = mu_v;
    }
    return m;
  }
};

}  // namespace biotgeneo
