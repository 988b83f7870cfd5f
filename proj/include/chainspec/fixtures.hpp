#pragma once

#include <cmath>

#include "core.hpp"

// Four hand-checked reference instances, each with both spectra in closed
// form. Everything here is exact modulo one square root, which makes these
// the anchor points for unit tests and the acceptance suite.

namespace chainspec::fixtures {

struct Fixture {
  JacobiMatrix J;
  PerturbationParams params;
  JacobiMatrix J_perturbed;
  Spectrum sigma;
  Spectrum sigma_hat;
};

// 2x2 chain, perturbation at the left end, K outside both spectra.
inline Fixture a() {
  const double r3 = std::sqrt(3.0);
  Fixture f;
  f.J = {{2.0, 2.0}, {-1.0}};
  f.params = {0, 0.5, 0.0};
  f.J_perturbed = {{1.0, 2.0}, {-std::sqrt(2.0) / 2.0}};
  f.sigma = {1.0, 3.0};
  f.sigma_hat = {(3.0 - r3) / 2.0, (3.0 + r3) / 2.0};
  return f;
}

// 3x3 chain, interior site, K outside both spectra, one unmovable
// eigenvalue at 2.
inline Fixture b() {
  const double r2 = std::sqrt(2.0);
  Fixture f;
  f.J = {{2.0, 2.0, 2.0}, {-1.0, -1.0}};
  f.params = {1, 0.5, -1.0};
  f.J_perturbed = {{2.0, 0.5, 2.0}, {-r2 / 2.0, -r2 / 2.0}};
  f.sigma = {2.0 - r2, 2.0, 2.0 + r2};
  f.sigma_hat = {0.0, 2.0, 2.5};
  return f;
}

// Same chain as b but K = 2 lands on the middle eigenvalue, which the
// perturbation then moves: the shared point K is a zero of the Green's
// function, not an unmovable eigenvalue.
inline Fixture c() {
  const double r2 = std::sqrt(2.0);
  Fixture f;
  f.J = {{2.0, 2.0, 2.0}, {-1.0, -1.0}};
  f.params = {1, 0.5, 2.0};
  f.J_perturbed = {{2.0, 2.0, 2.0}, {-r2 / 2.0, -r2 / 2.0}};
  f.sigma = {2.0 - r2, 2.0, 2.0 + r2};
  f.sigma_hat = {1.0, 2.0, 3.0};
  return f;
}

// Same chain as a but K = 1 is the lower eigenvalue and stays a pole of the
// Green's function: K belongs to both spectra.
inline Fixture d() {
  Fixture f;
  f.J = {{2.0, 2.0}, {-1.0}};
  f.params = {0, 0.5, 1.0};
  f.J_perturbed = {{1.5, 2.0}, {-std::sqrt(2.0) / 2.0}};
  f.sigma = {1.0, 3.0};
  f.sigma_hat = {1.0, 2.5};
  return f;
}

inline SpectralData data(const Fixture& f, bool with_theta = true) {
  SpectralData d;
  d.sigma = f.sigma;
  d.sigma_hat = f.sigma_hat;
  d.K = f.params.K;
  d.site = f.params.site;
  if (with_theta) d.theta_sq = f.params.theta_sq;
  return d;
}

}  // namespace chainspec::fixtures
