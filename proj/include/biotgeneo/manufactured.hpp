#pragma once

#include <numbers>

#include "biotgeneo/material.hpp"

namespace biotgeneo {

/// Closed-form time-periodic solution of the three-field model on the unit
/// square (with f = 0, b = 0), used to drive runs and measure errors. The
/// `scale` factor multiplies every field; scale = 0 gives the zero data
/// source (homogeneous boundary data, no volumetric source).
struct ManufacturedSolution {
  double lambda = 0.0;
  double mu = 0.0;
  double kappa = 1.0;
  double scale = 1.0;

  static ManufacturedSolution from(double lambda, double mu, double kappa) {
    return {lambda, mu, kappa, 1.0};
  }

  static ManufacturedSolution zero_source() { return {0.0, 0.5, 1.0, 0.0}; }

  Point u(const Point& x, double t) const {
    const double c = -scale * std::sin(tp() * t) / (2.0 * tp() * (lambda + 2.0 * mu));
    const Point w = wave(x);
    return {c * w[0], c * w[1]};
  }

  Point z(const Point& x, double t) const {
    const double c = -scale * tp() * kappa * std::sin(tp() * t);
    const Point w = wave(x);
    return {c * w[0], c * w[1]};
  }

  double p(const Point& x, double t) const {
    return scale * std::sin(tp() * x[0]) * std::sin(tp() * x[1]) * std::sin(tp() * t);
  }

  double g1(const Point& x, double t) const {
    const double ss = std::sin(tp() * x[0]) * std::sin(tp() * x[1]);
    return scale * (tp() / (lambda + 2.0 * mu) * ss * std::cos(tp() * t) +
                    2.0 * tp() * tp() * kappa * ss * std::sin(tp() * t));
  }

private:
  static constexpr double tp() { return 2.0 * std::numbers::pi; }
  static Point wave(const Point& x) {
    return {std::cos(tp() * x[0]) * std::sin(tp() * x[1]),
            std::sin(tp() * x[0]) * std::cos(tp() * x[1])};
  }
};

}  // namespace biotgeneo
