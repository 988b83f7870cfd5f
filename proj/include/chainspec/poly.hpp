#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "core.hpp"
#include "perturb.hpp"

// Orthogonal polynomials of the chain matrix.
//
// First kind:   P_{-1} = 0, P_0 = 1,
//               b_i P_{i+1} = (lambda - a_i) P_i - b_{i-1} P_{i-1}.
// Second kind, anchored at a site n:
//               phi_n = 0, phi_{n+1} = 1 / b_n,
// with the closing convention b_{N-1} := 1 so phi_N is defined for every
// anchor, including n = N-1 where phi_N = 1 identically.
//
// The scaled characteristic polynomial
//   Q_N(lambda) = (lambda - a_{N-1}) P_{N-1} - b_{N-2} P_{N-2}
//               = det(lambda - J) / (b_0 ... b_{N-2})
// has the eigenvalues as its roots. Zeros of P_n are the spectrum of the
// leading principal block [0, n-1]; zeros of phi_N are the spectrum of the
// trailing block [n+1, N-1].

namespace chainspec {

// P_0(lambda) .. P_{N-1}(lambda).
inline std::vector<double> eval_first_kind(const JacobiMatrix& J, double lambda) {
  require_valid(J);
  const std::size_t N = J.size();
  std::vector<double> P(N);
  P[0] = 1.0;
  double prev = 0.0;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    const double bm = i == 0 ? 0.0 : J.b[i - 1];
    P[i + 1] = ((lambda - J.a[i]) * P[i] - bm * prev) / J.b[i];
    prev = P[i];
  }
  return P;
}

// phi_site(lambda) .. phi_N(lambda); entry [i - site] holds phi_i, so the
// result has N - site + 1 values and ends with phi_N.
inline std::vector<double> eval_second_kind(const JacobiMatrix& J, std::size_t site,
                                            double lambda) {
  require_valid(J);
  const std::size_t N = J.size();
  if (site >= N) throw InvalidInput("anchor site out of range");
  const auto bext = [&](std::size_t i) { return i + 1 < N ? J.b[i] : 1.0; };

  std::vector<double> phi(N - site + 1);
  phi[0] = 0.0;
  phi[1] = 1.0 / bext(site);
  for (std::size_t i = site + 2; i <= N; ++i) {
    const double p1 = phi[i - site - 1];
    const double p2 = phi[i - site - 2];
    phi[i - site] = ((lambda - J.a[i - 1]) * p1 - bext(i - 2) * p2) / bext(i - 1);
  }
  return phi;
}

inline double eval_q(const JacobiMatrix& J, double lambda) {
  require_valid(J);
  const std::size_t N = J.size();
  const auto P = eval_first_kind(J, lambda);
  if (N == 1) return lambda - J.a[0];
  return (lambda - J.a[N - 1]) * P[N - 1] - J.b[N - 2] * P[N - 2];
}

// Principal block J[lo..hi], both ends inclusive.
inline JacobiMatrix submatrix(const JacobiMatrix& J, std::size_t lo, std::size_t hi) {
  require_valid(J);
  if (lo > hi) throw EmptyRange("submatrix range [" + std::to_string(lo) + "," +
                                std::to_string(hi) + "] is empty");
  if (hi >= J.size()) throw InvalidInput("submatrix range exceeds matrix size");
  JacobiMatrix S;
  S.a.assign(J.a.begin() + lo, J.a.begin() + hi + 1);
  if (lo < hi) S.b.assign(J.b.begin() + lo, J.b.begin() + hi);
  return S;
}

namespace detail {

// Q_N and dQ_N/dlambda under a shared positive rescaling; only the sign of q
// and the ratio q/dq survive, which is all Newton polishing needs.
struct ScaledQ {
  double q;
  double dq;
};

inline ScaledQ eval_q_scaled(const JacobiMatrix& J, double lambda) {
  const std::size_t N = J.size();
  double p = 1.0, p_prev = 0.0;
  double d = 0.0, d_prev = 0.0;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    const double bm = i == 0 ? 0.0 : J.b[i - 1];
    const double pn = ((lambda - J.a[i]) * p - bm * p_prev) / J.b[i];
    const double dn = (p + (lambda - J.a[i]) * d - bm * d_prev) / J.b[i];
    p_prev = p;
    p = pn;
    d_prev = d;
    d = dn;
    const double mag = std::max(std::abs(p), std::abs(p_prev));
    if (mag > 1e120) {
      const double f = 1.0 / mag;
      p *= f;
      p_prev *= f;
      d *= f;
      d_prev *= f;
    }
  }
  const double bm = N >= 2 ? J.b[N - 2] : 0.0;
  ScaledQ out;
  out.q = (lambda - J.a[N - 1]) * p - bm * p_prev;
  out.dq = p + (lambda - J.a[N - 1]) * d - bm * d_prev;
  return out;
}

}  // namespace detail

// Relative defect of the characteristic-polynomial identity that couples a
// chain to its perturbation,
//   Qt_N = Gamma * (Q_N + A * phi_N * P_n),
//   A = lambda * (1/theta_sq - 1) - M,
// where Gamma = theta when the site is an endpoint of the chain and 1
// otherwise; for N = 1 the single site counts as one endpoint, not two.
// Near machine precision for exact arithmetic inputs.
inline double qtilde_identity_residual(const JacobiMatrix& J, const PerturbationParams& p,
                                       double lambda) {
  require_valid(J);
  const std::size_t N = J.size();
  if (p.site >= N) throw InvalidInput("perturbation site out of range");

  const JacobiMatrix Jt = apply_perturbation(J, p);
  const double lhs = eval_q(Jt, lambda);

  const double A = lambda * (1.0 / p.theta_sq - 1.0) - p.M();
  const double phiN = eval_second_kind(J, p.site, lambda).back();
  const double Pn = eval_first_kind(J, lambda)[p.site];
  // One factor of sqrt(theta_sq) per missing neighbor coupling: the site
  // scales the determinant by theta_sq while each adjacent scaled coupling
  // cancels half of that in the normalizing product.
  std::size_t couplings = 0;
  if (p.site > 0) ++couplings;
  if (p.site + 1 < N) ++couplings;
  const double gamma = std::pow(std::sqrt(p.theta_sq), 2.0 - static_cast<double>(couplings));
  const double rhs = gamma * (eval_q(J, lambda) + A * phiN * Pn);

  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return std::abs(lhs - rhs) / scale;
}

}  // namespace chainspec
