#pragma once

#include <cmath>
#include <cstddef>

#include "core.hpp"
#include "detail/spectra.hpp"

// The forward perturbation map. Replacing mass m_n by m_n/theta_sq and
// attaching a spring of strength K*m_n at site n changes exactly three
// matrix entries:
//
//   a_n     -> theta_sq * (a_n + M)      with M = (1/theta_sq - 1) * K
//   b_{n-1} -> theta * b_{n-1}
//   b_n     -> theta * b_n
//
// At the chain ends only the entries that exist are touched. theta_sq = 1 is
// excluded: the pure spring attachment is a rank-one special case this
// library does not treat.

namespace chainspec {

inline PerturbationParams perturbation_from(double theta_sq, double K, std::size_t site) {
  if (!std::isfinite(theta_sq) || !(theta_sq > 0.0) || !(theta_sq < 1.0))
    throw InvalidTheta("theta_sq must lie strictly in (0,1), got " + std::to_string(theta_sq));
  if (!std::isfinite(K)) throw InvalidInput("K must be finite");
  return PerturbationParams{site, theta_sq, K};
}

inline JacobiMatrix apply_perturbation(const JacobiMatrix& J, const PerturbationParams& p) {
  require_valid(J);
  const std::size_t N = J.size();
  if (p.site >= N) throw InvalidInput("perturbation site out of range");
  if (!(p.theta_sq > 0.0) || !(p.theta_sq < 1.0))
    throw InvalidTheta("theta_sq must lie strictly in (0,1)");
  const double theta = std::sqrt(p.theta_sq);

  JacobiMatrix Jt = J;
  Jt.a[p.site] = p.theta_sq * (J.a[p.site] + p.M());
  if (p.site >= 1) Jt.b[p.site - 1] = theta * J.b[p.site - 1];
  if (p.site + 1 < N) Jt.b[p.site] = theta * J.b[p.site];
  return Jt;
}

// Evaluates the reduced two-spectra ratio at lambda_star. At an unmovable
// eigenvalue (present in both spectra) the value is the mass ratio theta_sq;
// at a spring constant K outside both spectra it is theta_sq as well, and
// strictly above it when K is a shared eigenvalue.
inline double mass_ratio_from_unmovable(const Spectrum& sigma, const Spectrum& sigma_hat,
                                        double lambda_star, const TolerancePolicy& tol = {}) {
  double spread = std::max(spread_of(sigma), spread_of(sigma_hat));
  spread = std::max(spread, std::abs(lambda_star));
  const double abs_tol = tol.abs_tol(spread);
  const auto match = detail::match_coincident(sigma, sigma_hat, abs_tol);
  const auto num = detail::unmatched_values(sigma_hat, match.hat_matched);
  const auto den = detail::unmatched_values(sigma, match.sigma_matched);
  return detail::cancelled_ratio(num, den, lambda_star, abs_tol);
}

}  // namespace chainspec
