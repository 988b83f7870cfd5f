#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "core.hpp"

// Spring-mass chains and their matrices. A chain of N masses m_0..m_{N-1}
// joined by springs has effective spring rates gamma_0..gamma_N, where
// gamma_0 couples mass 0 to the left wall and gamma_N couples mass N-1 to
// the right wall. gamma_0 = 0 (free left end) is allowed; every interior
// gamma must be positive, gamma_N may be zero.
//
//   a_i = (gamma_{i+1} + gamma_i) / m_i
//   b_i = -gamma_{i+1} / sqrt(m_i m_{i+1})
//
// The map forgets overall scale: masses and rates can be scaled together
// without changing the matrix. Fixing gamma_0 (equivalently m_0) picks one
// representative, which is what the inverse direction does.

namespace chainspec {

struct MassSpringSystem {
  std::vector<double> masses;
  std::vector<double> gammas;

  std::size_t size() const noexcept { return masses.size(); }
};

inline ValidationReport validate_system(const MassSpringSystem& S) {
  ValidationReport r;
  const std::size_t N = S.masses.size();
  if (N == 0) r.issues.push_back("system has no masses");
  if (S.gammas.size() != N + 1)
    r.issues.push_back("gammas size must be N+1, got " + std::to_string(S.gammas.size()));
  for (std::size_t i = 0; i < S.masses.size(); ++i)
    if (!std::isfinite(S.masses[i]) || S.masses[i] <= 0.0)
      r.issues.push_back("mass[" + std::to_string(i) + "] must be positive and finite");
  for (std::size_t i = 0; i < S.gammas.size(); ++i) {
    if (!std::isfinite(S.gammas[i])) {
      r.issues.push_back("gamma[" + std::to_string(i) + "] is not finite");
      continue;
    }
    const bool boundary = i == 0 || i + 1 == S.gammas.size();
    if (boundary ? S.gammas[i] < 0.0 : S.gammas[i] <= 0.0)
      r.issues.push_back("gamma[" + std::to_string(i) + "] out of range");
  }
  return r;
}

inline JacobiMatrix system_to_jacobi(const MassSpringSystem& S) {
  const auto r = validate_system(S);
  if (!r.ok()) throw InvalidSystem("invalid mass-spring system: " + r.joined());
  const std::size_t N = S.size();
  JacobiMatrix J;
  J.a.resize(N);
  J.b.resize(N - 1);
  for (std::size_t i = 0; i < N; ++i) J.a[i] = (S.gammas[i + 1] + S.gammas[i]) / S.masses[i];
  for (std::size_t i = 0; i + 1 < N; ++i)
    J.b[i] = -S.gammas[i + 1] / std::sqrt(S.masses[i] * S.masses[i + 1]);
  return J;
}

// Recovers the chain with m_0 = 1 and the given wall rate gamma_0. Walking
// down the chain, each diagonal entry fixes the next rate and each coupling
// fixes the next mass:
//   gamma_{i+1} = a_i m_i - gamma_i,   m_{i+1} = gamma_{i+1}^2 / (b_i^2 m_i).
// Fails when an interior rate comes out nonpositive or the final wall rate
// negative; the error carries the first offending rate index.
inline MassSpringSystem jacobi_to_system(const JacobiMatrix& J, double gamma0) {
  require_valid(J);
  if (!std::isfinite(gamma0) || gamma0 < 0.0)
    throw InvalidInput("gamma0 must be nonnegative and finite");
  const std::size_t N = J.size();
  MassSpringSystem S;
  S.masses.resize(N);
  S.gammas.resize(N + 1);
  S.masses[0] = 1.0;
  S.gammas[0] = gamma0;
  for (std::size_t i = 0; i < N; ++i) {
    const double g = J.a[i] * S.masses[i] - S.gammas[i];
    S.gammas[i + 1] = g;
    if (i + 1 < N) {
      if (g <= 0.0)
        throw NotRealizable("gamma[" + std::to_string(i + 1) + "] = " + std::to_string(g) +
                                " is not positive",
                            i + 1);
      S.masses[i + 1] = g * g / (J.b[i] * J.b[i] * S.masses[i]);
    } else if (g < 0.0) {
      // A free right end recovers as an exact cancellation; absorb roundoff
      // instead of rejecting the chain.
      const double scale = std::max(1.0, std::abs(J.a[i]) * S.masses[i]);
      if (g >= -1e-12 * scale)
        S.gammas[i + 1] = 0.0;
      else
        throw NotRealizable(
            "gamma[" + std::to_string(N) + "] = " + std::to_string(g) + " is negative", N);
    }
  }
  return S;
}

// Physical reading of the matrix perturbation at a site of mass mass_n: the
// new mass and the strength of the attached spring.
struct PhysicalPerturbation {
  double mass_new;
  double spring;
};

inline PhysicalPerturbation perturbation_to_physical(const PerturbationParams& p, double mass_n) {
  if (!(mass_n > 0.0) || !std::isfinite(mass_n)) throw InvalidInput("mass must be positive");
  if (!(p.theta_sq > 0.0) || !(p.theta_sq < 1.0))
    throw InvalidTheta("theta_sq must lie strictly in (0,1)");
  // K is the rate per unit of added mass; the spring itself is M * m_n,
  // the diagonal shift times the old mass.
  return {mass_n / p.theta_sq, p.M() * mass_n};
}

}  // namespace chainspec
