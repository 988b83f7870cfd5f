#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "core.hpp"
#include "detail/spectra.hpp"
#include "eigen.hpp"
#include "poly.hpp"

// The diagonal Green's function at the perturbed site, three ways:
//
//   polynomial    G(lambda) = - phi_N(lambda) P_n(lambda) / Q_N(lambda)
//   spectral      G(lambda) = sum_k w_k / (lambda_k - lambda)
//   two spectra   G(lambda) = (theta_sq - R(lambda)) / ((1-theta_sq)(lambda - K))
//
// where R is the reduced ratio prod (lambda - sigma_hat_j) / (lambda - sigma_j)
// with coincident pairs cancelled. The three agree wherever all are defined;
// the library leans on that as its strongest internal cross-check.
//
// At lambda = K the last formula is 0/0 whenever R(K) = theta_sq, and the
// removable value is G(K) = -R'(K) / (1 - theta_sq). When R(K) differs from
// theta_sq the singularity is genuine and reported as PoleAtK.

namespace chainspec {

// Reduced ratio of the two characteristic polynomials. Coincident points
// cancel exactly, so unmovable eigenvalues are neither zeros nor poles.
inline double spectral_ratio(const Spectrum& sigma, const Spectrum& sigma_hat, double lambda,
                             const TolerancePolicy& tol = {}) {
  double spread = std::max(spread_of(sigma), spread_of(sigma_hat));
  spread = std::max(spread, std::abs(lambda));
  const double abs_tol = tol.abs_tol(spread);
  const auto match = detail::match_coincident(sigma, sigma_hat, abs_tol);
  return detail::cancelled_ratio(detail::unmatched_values(sigma_hat, match.hat_matched),
                                 detail::unmatched_values(sigma, match.sigma_matched), lambda,
                                 abs_tol);
}

// Derivative of the reduced ratio, in logarithmic form
//   R'(lambda) = R(lambda) * (sum 1/(lambda - sigma_hat'_j) - sum 1/(lambda - sigma'_j))
// over the surviving points only. Identically zero when the spectra agree.
inline double spectral_ratio_derivative(const Spectrum& sigma, const Spectrum& sigma_hat,
                                        double lambda, const TolerancePolicy& tol = {}) {
  double spread = std::max(spread_of(sigma), spread_of(sigma_hat));
  spread = std::max(spread, std::abs(lambda));
  const double abs_tol = tol.abs_tol(spread);
  const auto match = detail::match_coincident(sigma, sigma_hat, abs_tol);
  return detail::cancelled_ratio_derivative(
      detail::unmatched_values(sigma_hat, match.hat_matched),
      detail::unmatched_values(sigma, match.sigma_matched), lambda, abs_tol);
}

inline double green_nn_poly(const JacobiMatrix& J, std::size_t site, double lambda,
                            const TolerancePolicy& tol = {}) {
  require_valid(J);
  if (site >= J.size()) throw InvalidInput("site out of range");
  const auto [glo, ghi] = gershgorin(J);
  const double spread = std::max({1.0, std::abs(glo), std::abs(ghi), std::abs(lambda)});
  const double delta = tol.abs_tol(spread);
  // An eigenvalue within delta of lambda flips the pivot count across it.
  if (sturm_count(J, lambda - delta, tol) != sturm_count(J, lambda + delta, tol))
    throw PoleAtPoint("lambda within tolerance of an eigenvalue");
  const double phiN = eval_second_kind(J, site, lambda).back();
  const double Pn = eval_first_kind(J, lambda)[site];
  return -phiN * Pn / eval_q(J, lambda);
}

// Worker over a precomputed weighted spectrum. Terms whose pole carries no
// weight are skipped near that pole: the true function is regular there.
inline double green_nn_spectral(const WeightedSpectrum& ws, double lambda,
                                const TolerancePolicy& tol = {}) {
  double spread = spread_of(ws.values);
  spread = std::max(spread, std::abs(lambda));
  const double abs_tol = tol.abs_tol(spread);
  double g = 0.0;
  for (std::size_t k = 0; k < ws.values.size(); ++k) {
    const double d = ws.values[k] - lambda;
    if (std::abs(d) <= abs_tol) {
      if (ws.weights[k] >= tol.rel_tol)
        throw PoleAtPoint("lambda within tolerance of a weighted pole at " +
                          std::to_string(ws.values[k]));
      continue;
    }
    g += ws.weights[k] / d;
  }
  return g;
}

inline double green_nn_spectral(const JacobiMatrix& J, std::size_t site, double lambda,
                                const TolerancePolicy& tol = {}) {
  return green_nn_spectral(eigenvector_weights(J, site, tol), lambda, tol);
}

inline double green_nn_two_spectra(const Spectrum& sigma, const Spectrum& sigma_hat,
                                   double theta_sq, double K, double lambda,
                                   const TolerancePolicy& tol = {}) {
  if (!(theta_sq > 0.0) || !(theta_sq < 1.0))
    throw InvalidTheta("theta_sq must lie strictly in (0,1)");
  double spread = std::max(spread_of(sigma), spread_of(sigma_hat));
  spread = std::max({spread, std::abs(K), std::abs(lambda)});
  const double abs_tol = tol.abs_tol(spread);
  const auto match = detail::match_coincident(sigma, sigma_hat, abs_tol);
  const auto num = detail::unmatched_values(sigma_hat, match.hat_matched);
  const auto den = detail::unmatched_values(sigma, match.sigma_matched);

  if (std::abs(lambda - K) <= abs_tol) {
    const double rK = detail::cancelled_ratio(num, den, lambda, abs_tol);
    if (std::abs(rK - theta_sq) > tol.rel_tol)
      throw PoleAtK("spectral ratio at K is " + std::to_string(rK) +
                    ", not the mass ratio; the pole at K is genuine");
    return -detail::cancelled_ratio_derivative(num, den, lambda, abs_tol) / (1.0 - theta_sq);
  }

  // When the singularity at K is removable, theta_sq - R(lambda) carries an
  // exact factor (lambda - K) that the direct subtraction destroys: close to K
  // the difference is a tiny residue of two O(1) quantities, and dividing by
  // (lambda - K) amplifies its rounding noise without bound. Cancel the factor
  // analytically instead. With N(x) = prod (x - num_j), D(x) = prod (x - den_j)
  // and R(K) = theta_sq,
  //
  //   theta_sq - R(lambda) = [N(K) D(lambda) - N(lambda) D(K)] / (D(K) D(lambda))
  //
  // and the bracket telescopes over paired factors
  //   a_j = (K - num_j)(lambda - den_j),  b_j = (lambda - num_j)(K - den_j),
  //   a_k - b_k = (lambda - K)(den_k - num_k)
  // so every summand absorbs one exact (lambda - K).
  if (num.size() == den.size() && !num.empty()) {
    bool k_clear = true;
    for (double v : den)
      if (std::abs(K - v) <= abs_tol || std::abs(lambda - v) <= abs_tol) k_clear = false;
    for (double v : num)
      if (std::abs(K - v) <= abs_tol) k_clear = false;
    if (k_clear && std::abs(detail::cancelled_ratio(num, den, K, abs_tol) - theta_sq) <= tol.rel_tol) {
      const std::size_t m = num.size();
      std::vector<double> suffix_a(m + 1, 1.0);
      for (std::size_t j = m; j-- > 0;)
        suffix_a[j] = suffix_a[j + 1] * (K - num[j]) * (lambda - den[j]);
      double sum = 0.0;
      double prefix_b = 1.0;
      double dK = 1.0;
      double dL = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        sum += (den[k] - num[k]) * prefix_b * suffix_a[k + 1];
        prefix_b *= (lambda - num[k]) * (K - den[k]);
        dK *= K - den[k];
        dL *= lambda - den[k];
      }
      return sum / ((1.0 - theta_sq) * dK * dL);
    }
  }
  const double r = detail::cancelled_ratio(num, den, lambda, abs_tol);
  return (theta_sq - r) / ((1.0 - theta_sq) * (lambda - K));
}

}  // namespace chainspec
