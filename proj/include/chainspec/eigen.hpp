#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "core.hpp"
#include "poly.hpp"

// Spectrum of the chain matrix, by Sturm bisection on the signs of the
// leading-principal-minor pivots, then a short Newton polish on the scaled
// characteristic polynomial. The pivot count is also exposed on its own: it
// is the workhorse behind pole detection and the eigenvalue oracle tests.

namespace chainspec {

// Eigenvalues with the squared eigenvector components at one declared site.
// weights are nonnegative, sum to 1, and are strictly positive when the site
// is an endpoint of the chain.
struct WeightedSpectrum {
  Spectrum values;
  std::vector<double> weights;
  std::size_t site = 0;
};

// Enclosing interval [lo, hi] from row sums.
inline std::pair<double, double> gershgorin(const JacobiMatrix& J) {
  const std::size_t N = J.size();
  double lo = J.a[0], hi = J.a[0];
  for (std::size_t i = 0; i < N; ++i) {
    double r = 0.0;
    if (i >= 1) r += std::abs(J.b[i - 1]);
    if (i + 1 < N) r += std::abs(J.b[i]);
    lo = std::min(lo, J.a[i] - r);
    hi = std::max(hi, J.a[i] + r);
  }
  return {lo, hi};
}

// Number of eigenvalues below x, by counting negative pivots of the LDL^T
// factorization of J - x:
//   d_0 = a_0 - x,  d_i = (a_i - x) - b_{i-1}^2 / d_{i-1}.
// An exactly zero pivot invalidates the count, so the scan restarts at x
// nudged by eigen_tol * spread, doubling the nudge each retry. Only when
// zeros persist across all retries is BreakdownAtPivot raised.
inline int sturm_count(const JacobiMatrix& J, double x, const TolerancePolicy& tol = {}) {
  require_valid(J);
  const auto [glo, ghi] = gershgorin(J);
  const double spread = std::max({1.0, std::abs(glo), std::abs(ghi), std::abs(x)});
  double nudge = tol.eigen_tol * spread;
  double xx = x;
  for (int attempt = 0; attempt < 6; ++attempt) {
    int negatives = 0;
    double d = 1.0;
    bool zero_pivot = false;
    for (std::size_t i = 0; i < J.size(); ++i) {
      const double coupling = i == 0 ? 0.0 : J.b[i - 1] * J.b[i - 1] / d;
      d = (J.a[i] - xx) - coupling;
      if (d < 0.0) {
        ++negatives;
      } else if (d == 0.0) {
        zero_pivot = true;
        break;
      }
    }
    if (!zero_pivot) return negatives;
    xx = x + nudge;
    nudge *= 2.0;
  }
  throw BreakdownAtPivot("pivot stays exactly zero near x = " + std::to_string(x));
}

// All N eigenvalues, ascending. Bisection brackets each one to width
// eigen_tol * spread inside the Gershgorin interval; up to three Newton
// steps on Q_N then polish the midpoint without leaving the bracket.
inline Spectrum eigenvalues(const JacobiMatrix& J, const TolerancePolicy& tol = {}) {
  require_valid(J);
  const std::size_t N = J.size();
  const auto [glo, ghi] = gershgorin(J);
  const double spread = std::max({1.0, std::abs(glo), std::abs(ghi)});
  const double width = tol.eigen_tol * spread;

  Spectrum out(N);
  for (std::size_t k = 0; k < N; ++k) {
    double lo = glo - width, hi = ghi + width;
    while (hi - lo > width) {
      const double mid = 0.5 * (lo + hi);
      if (static_cast<std::size_t>(sturm_count(J, mid, tol)) <= k)
        lo = mid;
      else
        hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int step = 0; step < 3; ++step) {
      const auto s = detail::eval_q_scaled(J, x);
      if (s.dq == 0.0) break;
      const double next = x - s.q / s.dq;
      if (next < lo - 4.0 * width || next > hi + 4.0 * width) break;
      if (next == x) break;
      x = next;
    }
    out[k] = x;
  }

  for (std::size_t k = 0; k + 1 < N; ++k)
    if (out[k + 1] - out[k] <= width)
      throw NonSimpleSpectrum("eigenvalues " + std::to_string(k) + " and " +
                              std::to_string(k + 1) + " are not separated at tolerance");
  return out;
}

inline WeightedSpectrum eigenvector_weights(const JacobiMatrix& J, std::size_t site,
                                            const TolerancePolicy& tol = {}) {
  require_valid(J);
  const std::size_t N = J.size();
  if (site >= N) throw InvalidInput("weight site out of range");

  WeightedSpectrum ws;
  ws.site = site;
  ws.values = eigenvalues(J, tol);
  ws.weights.resize(N);

  for (std::size_t k = 0; k < N; ++k) {
    const double lambda = ws.values[k];
    // P_i(lambda) with running rescale; the recurrence is linear, so one
    // common factor keeps the weight ratio exact.
    double p_prev = 0.0, p = 1.0;
    double sumsq = 0.0, at_site = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      sumsq += p * p;
      if (i == site) at_site = p;
      if (i + 1 < N) {
        const double bm = i == 0 ? 0.0 : J.b[i - 1];
        const double next = ((lambda - J.a[i]) * p - bm * p_prev) / J.b[i];
        p_prev = p;
        p = next;
        const double mag = std::abs(p);
        if (mag > 1e150) {
          const double f = 1.0 / mag;
          p *= f;
          p_prev *= f;
          at_site *= f;
          sumsq *= f * f;
        }
      }
    }
    ws.weights[k] = at_site * at_site / sumsq;
  }
  return ws;
}

}  // namespace chainspec
