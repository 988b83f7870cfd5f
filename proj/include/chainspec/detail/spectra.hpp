#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "../core.hpp"

// Shared machinery for functions of two spectra: tolerance matching of
// coincident points and evaluation of the reduced ratio
//
//   prod_j (lambda - sigma_hat_j) / prod_j (lambda - sigma_j)
//
// after coincident factor pairs have been cancelled. Both the spectral-ratio
// evaluators and the mass-ratio recovery build on this header.

namespace chainspec::detail {

struct CoincidenceMatch {
  // (index into sigma, index into sigma_hat) per coincident pair, ascending.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<char> sigma_matched;
  std::vector<char> hat_matched;
};

// Greedy two-pointer sweep over the sorted spectra. Unambiguous because each
// spectrum is strictly increasing at tolerance, so a point can sit inside at
// most one coincidence ball.
inline CoincidenceMatch match_coincident(const Spectrum& sigma, const Spectrum& sigma_hat,
                                         double abs_tol) {
  CoincidenceMatch m;
  m.sigma_matched.assign(sigma.size(), 0);
  m.hat_matched.assign(sigma_hat.size(), 0);
  std::size_t i = 0, j = 0;
  while (i < sigma.size() && j < sigma_hat.size()) {
    const double d = sigma[i] - sigma_hat[j];
    if (std::abs(d) <= abs_tol) {
      m.pairs.emplace_back(i, j);
      m.sigma_matched[i] = 1;
      m.hat_matched[j] = 1;
      ++i;
      ++j;
    } else if (d > 0.0) {
      ++j;
    } else {
      ++i;
    }
  }
  return m;
}

inline std::vector<double> unmatched_values(const Spectrum& s, const std::vector<char>& matched) {
  std::vector<double> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!matched[i]) out.push_back(s[i]);
  return out;
}

// Ratio over the surviving factors, paired by sorted index so partial
// products stay O(1) for interlaced data. Throws if lambda sits on a
// surviving pole.
inline double cancelled_ratio(const std::vector<double>& num, const std::vector<double>& den,
                              double lambda, double abs_tol) {
  double r = 1.0;
  for (std::size_t i = 0; i < num.size() || i < den.size(); ++i) {
    if (i < den.size()) {
      const double d = lambda - den[i];
      if (std::abs(d) <= abs_tol)
        throw PoleAtPoint("evaluation point within tolerance of a pole at " +
                          std::to_string(den[i]));
      r /= d;
    }
    if (i < num.size()) r *= lambda - num[i];
  }
  return r;
}

// Logarithmic derivative of the cancelled ratio, times the ratio itself:
//   d/dlambda = ratio * (sum 1/(lambda - num_i) - sum 1/(lambda - den_i)).
// Zeros of the numerator sum against the denominator sum are where unmovable
// points live, so this form loses nothing to cancellation of large terms.
inline double cancelled_ratio_derivative(const std::vector<double>& num,
                                         const std::vector<double>& den, double lambda,
                                         double abs_tol) {
  const double r = cancelled_ratio(num, den, lambda, abs_tol);
  double s = 0.0;
  for (double x : num) {
    const double d = lambda - x;
    if (std::abs(d) <= abs_tol)
      throw PoleAtPoint("derivative requested at a surviving zero at " + std::to_string(x));
    s += 1.0 / d;
  }
  for (double x : den) s -= 1.0 / (lambda - x);
  return r * s;
}

// Magnitude scale of the derivative at lambda, used for its zero test.
inline double ratio_derivative_scale(const std::vector<double>& num,
                                     const std::vector<double>& den, double lambda,
                                     double ratio_abs) {
  double s = 0.0;
  for (double x : num) s += 1.0 / std::abs(lambda - x);
  for (double x : den) s += 1.0 / std::abs(lambda - x);
  return std::max(ratio_abs * s, 1e-300);
}

}  // namespace chainspec::detail
