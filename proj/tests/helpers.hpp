#pragma once

// Test-only machinery: independent oracles and seeded random instance
// generators. The oracles deliberately avoid the library's algorithms:
// eigenvalues come from interlaced sign bisection on characteristic
// determinants (no pivot counting), determinants from dense elimination,
// and chain reconstruction from exact rational arithmetic (no Lanczos).

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <chainspec/chainspec.hpp>

namespace testutil {

using chainspec::JacobiMatrix;
using chainspec::PerturbationParams;
using chainspec::Spectrum;
using chainspec::SpectralData;

// ---------------------------------------------------------------------------
// oracle: eigenvalues by interlaced bisection
//
// D_m(lambda) = det(lambda - J[0..m-1]) satisfies
//   D_0 = 1, D_1 = lambda - a_0,
//   D_m = (lambda - a_{m-1}) D_{m-1} - b_{m-2}^2 D_{m-2},
// and the roots of D_m strictly interlace those of D_{m+1}. Walking m up
// from 1 gives brackets for every root with nothing but sign evaluations.

inline double det_sign_value(const JacobiMatrix& J, std::size_t m, double lambda) {
  double prev = 1.0, cur = lambda - J.a[0];
  for (std::size_t i = 1; i < m; ++i) {
    const double next = (lambda - J.a[i]) * cur - J.b[i - 1] * J.b[i - 1] * prev;
    prev = cur;
    cur = next;
    const double mag = std::abs(cur);
    if (mag > 1e120) {
      prev /= mag;
      cur /= mag;
    }
  }
  return cur;
}

inline Spectrum oracle_eigenvalues(const JacobiMatrix& J) {
  const std::size_t N = J.size();
  const auto [glo, ghi] = chainspec::gershgorin(J);
  const double spread = std::max({1.0, std::abs(glo), std::abs(ghi)});
  const double margin = 1e-6 * spread;

  std::vector<double> roots{};
  for (std::size_t m = 1; m <= N; ++m) {
    std::vector<double> next;
    std::vector<double> edges;
    edges.push_back(glo - margin * (1.0 + static_cast<double>(N - m)));
    for (double r : roots) edges.push_back(r);
    edges.push_back(ghi + margin * (1.0 + static_cast<double>(N - m)));
    for (std::size_t g = 0; g + 1 < edges.size(); ++g) {
      double lo = edges[g], hi = edges[g + 1];
      double flo = det_sign_value(J, m, lo), fhi = det_sign_value(J, m, hi);
      if (flo == 0.0 || fhi == 0.0 || (flo < 0) == (fhi < 0))
        throw std::runtime_error("oracle lost a sign change");
      for (int it = 0; it < 90 && hi - lo > 1e-14 * spread; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = det_sign_value(J, m, mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        ((fm < 0) == (flo < 0) ? lo : hi) = mid;
        ((fm < 0) == (flo < 0) ? flo : fhi) = fm;
      }
      next.push_back(0.5 * (lo + hi));
    }
    roots = std::move(next);
  }
  return roots;
}

// oracle: det(lambda - J) by dense elimination with partial pivoting
inline double dense_char_det(const JacobiMatrix& J, double lambda) {
  const std::size_t N = J.size();
  std::vector<std::vector<double>> A(N, std::vector<double>(N, 0.0));
  for (std::size_t i = 0; i < N; ++i) {
    A[i][i] = lambda - J.a[i];
    if (i + 1 < N) {
      A[i][i + 1] = -J.b[i];
      A[i + 1][i] = -J.b[i];
    }
  }
  double det = 1.0;
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (A[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(A[piv], A[c]);
      det = -det;
    }
    det *= A[c][c];
    for (std::size_t r = c + 1; r < N; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < N; ++k) A[r][k] -= f * A[c][k];
    }
  }
  return det;
}

inline double oracle_q(const JacobiMatrix& J, double lambda) {
  double scale = 1.0;
  for (double b : J.b) scale *= b;
  return dense_char_det(J, lambda) / scale;
}

// ---------------------------------------------------------------------------
// oracle: chain from a measure, in exact rational arithmetic
//
// With m(lambda) = sum r_i / (p_i - lambda) = Pm/Qm as a rational function,
// repeatedly divide: -Qm = (lambda - a) Pm + R, read off b^2 as
// -lead(R)/lead(Pm), and continue with the pair (R, b^2 Pm). The a's and
// b^2's are exactly the entries of the chain whose first-site measure is m.

using rational = boost::multiprecision::cpp_rational;
using rational_poly = std::vector<rational>;  // ascending coefficients

struct RationalChain {
  std::vector<rational> a;
  std::vector<rational> b2;
};

inline RationalChain rational_chain_from_measure(const std::vector<rational>& poles,
                                                 const std::vector<rational>& residues) {
  const std::size_t M = poles.size();
  rational_poly Qm{1};
  for (const auto& p : poles) {
    // Qm *= (p - lambda)
    rational_poly next(Qm.size() + 1, rational(0));
    for (std::size_t i = 0; i < Qm.size(); ++i) {
      next[i] += p * Qm[i];
      next[i + 1] -= Qm[i];
    }
    Qm = std::move(next);
  }
  rational_poly Pm(M, rational(0));
  for (std::size_t i = 0; i < M; ++i) {
    rational_poly term{residues[i]};
    for (std::size_t j = 0; j < M; ++j) {
      if (j == i) continue;
      rational_poly next(term.size() + 1, rational(0));
      for (std::size_t k = 0; k < term.size(); ++k) {
        next[k] += poles[j] * term[k];
        next[k + 1] -= term[k];
      }
      term = std::move(next);
    }
    for (std::size_t k = 0; k < term.size(); ++k) Pm[k] += term[k];
  }

  RationalChain out;
  while (true) {
    const std::size_t dp = Pm.size() - 1;
    rational_poly negQ(Qm.size());
    for (std::size_t i = 0; i < Qm.size(); ++i) negQ[i] = -Qm[i];

    const rational s1 = negQ[dp + 1] / Pm[dp];
    if (s1 != 1) throw std::runtime_error("rational oracle: quotient is not monic");
    const rational s0 = (negQ[dp] - (dp >= 1 ? Pm[dp - 1] : rational(0))) / Pm[dp];
    out.a.push_back(-s0);

    if (dp == 0) break;
    rational_poly R(dp, rational(0));
    for (std::size_t k = 0; k < dp; ++k) {
      R[k] = negQ[k] - s0 * Pm[k];
      if (k >= 1) R[k] -= Pm[k - 1];
    }
    const rational b2 = -R[dp - 1] / Pm[dp];
    if (b2 <= 0) throw std::runtime_error("rational oracle: nonpositive coupling");
    out.b2.push_back(b2);

    rational_poly nextQ(Pm.size());
    for (std::size_t i = 0; i < Pm.size(); ++i) nextQ[i] = b2 * Pm[i];
    Qm = std::move(nextQ);
    Pm = std::move(R);
  }
  return out;
}

// ---------------------------------------------------------------------------
// seeded generators

inline JacobiMatrix random_jacobi(std::mt19937_64& rng, std::size_t N) {
  std::uniform_real_distribution<double> diag(-2.0, 2.0), offd(0.3, 1.5);
  JacobiMatrix J;
  J.a.resize(N);
  J.b.resize(N - 1);
  for (auto& x : J.a) x = diag(rng);
  for (auto& x : J.b) x = -offd(rng);
  return J;
}

inline double min_gap(const Spectrum& s) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) g = std::min(g, s[i + 1] - s[i]);
  return g;
}

inline double dist_to(const Spectrum& s, double x) {
  double d = std::numeric_limits<double>::infinity();
  for (double v : s) d = std::min(d, std::abs(v - x));
  return d;
}

// A sigma_hat point lying near a sigma point, but farther than the exact
// coincidences the eigensolver produces, cannot be classified at the default
// tolerances: it reads as an unmovable eigenvalue that the data does not
// support. Generators discard such draws. allow_exact admits genuinely shared
// eigenvalues (machine-accurate pairs from two solver runs).
inline bool cross_gap_ambiguous(const Spectrum& sigma, const Spectrum& sigma_hat, double spread,
                                bool allow_exact) {
  const double lo = 1e-12 * spread, hi = 1e-8 * spread;
  for (double s : sigma)
    for (double h : sigma_hat) {
      const double d = std::abs(s - h);
      if (d < hi && (d > lo || !allow_exact)) return true;
    }
  return false;
}

enum class KMode { Generic, AtEigenvalue, AtGreenZero };

struct ForwardInstance {
  JacobiMatrix J;
  JacobiMatrix J_tilde;
  PerturbationParams params;
  SpectralData data;
};

// Random chain plus perturbation whose spectra are well separated at the
// scale the default tolerances assume. KMode picks where K lands: clear of
// both spectra, exactly on an eigenvalue, or exactly on a zero of the
// Green's function at the site.
inline ForwardInstance random_forward(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max,
                                      KMode mode = KMode::Generic) {
  std::uniform_int_distribution<std::size_t> size_dist(n_min, n_max);
  std::uniform_real_distribution<double> theta_dist(0.15, 0.85), unit(0.0, 1.0);

  for (int attempt = 0; attempt < 500; ++attempt) {
    const std::size_t N = size_dist(rng);
    JacobiMatrix J = random_jacobi(rng, N);
    Spectrum sigma;
    try {
      sigma = chainspec::eigenvalues(J);
    } catch (const chainspec::Error&) {
      continue;
    }
    const double spread0 = chainspec::spread_of(sigma);
    if (N > 1 && min_gap(sigma) < 2e-3 * spread0) continue;

    PerturbationParams p;
    p.site = std::uniform_int_distribution<std::size_t>(0, N - 1)(rng);
    p.theta_sq = theta_dist(rng);

    const auto [glo, ghi] = chainspec::gershgorin(J);
    if (mode == KMode::Generic) {
      const double span = ghi - glo + 2.0;
      p.K = glo - 1.0 + span * unit(rng);
      if (dist_to(sigma, p.K) < 5e-3 * spread0) continue;
    } else if (mode == KMode::AtEigenvalue) {
      const std::size_t r = std::uniform_int_distribution<std::size_t>(0, N - 1)(rng);
      const auto ws = chainspec::eigenvector_weights(J, p.site);
      if (ws.weights[r] < 1e-6) continue;
      p.K = sigma[r];
    } else {
      const auto ws = chainspec::eigenvector_weights(J, p.site);
      std::vector<double> heavy;
      for (std::size_t k = 0; k < N; ++k)
        if (ws.weights[k] > 1e-8) heavy.push_back(ws.values[k]);
      if (heavy.size() < 2) continue;
      const std::size_t g =
          std::uniform_int_distribution<std::size_t>(0, heavy.size() - 2)(rng);
      // one zero of the increasing Green's function per heavy gap
      chainspec::PoleResidueForm G{ws.values, ws.weights};
      double lo = heavy[g], hi = heavy[g + 1];
      const double gap = hi - lo;
      double flo = 0.0, fhi = 0.0;
      bool ok = false;
      for (double frac = 0.25; frac > 1e-12; frac *= 0.5) {
        flo = G.value(lo + frac * gap);
        fhi = G.value(hi - frac * gap);
        // G(lambda) = sum w/(v - lambda) rises from -inf to +inf over the gap
        if (flo < 0.0 && fhi > 0.0) {
          lo += frac * gap;
          hi -= frac * gap;
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      while (hi - lo > 1e-14 * spread0) {
        const double mid = 0.5 * (lo + hi);
        (G.value(mid) < 0.0 ? lo : hi) = mid;
      }
      p.K = 0.5 * (lo + hi);
      if (dist_to(sigma, p.K) < 1e-3 * spread0) continue;
    }

    JacobiMatrix Jt;
    Spectrum sigma_hat;
    try {
      Jt = chainspec::apply_perturbation(J, p);
      sigma_hat = chainspec::eigenvalues(Jt);
    } catch (const chainspec::Error&) {
      continue;
    }
    const double spread = std::max(chainspec::spread_of(sigma_hat), spread0);
    if (N > 1 && min_gap(sigma_hat) < 2e-3 * spread) continue;
    if (mode == KMode::Generic && dist_to(sigma_hat, p.K) < 5e-3 * spread) continue;
    // K on an eigenvalue keeps that eigenvalue in both spectra, exactly.
    if (cross_gap_ambiguous(sigma, sigma_hat, spread, mode == KMode::AtEigenvalue)) continue;

    SpectralData D{sigma, sigma_hat, p.K, p.site, p.theta_sq};
    if (!chainspec::validate_spectral_data(D).ok()) continue;
    return {std::move(J), std::move(Jt), p, std::move(D)};
  }
  throw std::runtime_error("random_forward exhausted its attempts");
}

// Mirror-symmetric chain with the site at the center: the reflected
// half-chains share their whole spectrum, so every antisymmetric eigenvector
// vanishes at the center and its eigenvalue is unmovable. N odd gives
// q = (N-1)/2 shared eigenvalues, the largest the site allows.
inline ForwardInstance mirror_forward(std::mt19937_64& rng, std::size_t N) {
  std::uniform_real_distribution<double> theta_dist(0.2, 0.8), unit(0.0, 1.0);
  for (int attempt = 0; attempt < 500; ++attempt) {
    JacobiMatrix J = random_jacobi(rng, N);
    for (std::size_t i = 0; i < N / 2; ++i) J.a[N - 1 - i] = J.a[i];
    for (std::size_t i = 0; i + 1 < N; ++i)
      if (i >= N - 1 - i) J.b[i] = J.b[N - 2 - i];

    Spectrum sigma;
    try {
      sigma = chainspec::eigenvalues(J);
    } catch (const chainspec::Error&) {
      continue;
    }
    const double spread0 = chainspec::spread_of(sigma);
    if (min_gap(sigma) < 2e-3 * spread0) continue;

    PerturbationParams p;
    p.site = N / 2;
    p.theta_sq = theta_dist(rng);
    const auto [glo, ghi] = chainspec::gershgorin(J);
    p.K = glo - 1.0 + (ghi - glo + 2.0) * unit(rng);
    if (dist_to(sigma, p.K) < 5e-3 * spread0) continue;

    JacobiMatrix Jt = chainspec::apply_perturbation(J, p);
    Spectrum sigma_hat;
    try {
      sigma_hat = chainspec::eigenvalues(Jt);
    } catch (const chainspec::Error&) {
      continue;
    }
    const double spread = std::max(chainspec::spread_of(sigma_hat), spread0);
    if (min_gap(sigma_hat) < 2e-3 * spread) continue;
    if (dist_to(sigma_hat, p.K) < 5e-3 * spread) continue;
    if (cross_gap_ambiguous(sigma, sigma_hat, spread, true)) continue;

    SpectralData D{sigma, sigma_hat, p.K, p.site, p.theta_sq};
    if (!chainspec::validate_spectral_data(D).ok()) continue;
    return {std::move(J), std::move(Jt), p, std::move(D)};
  }
  throw std::runtime_error("mirror_forward exhausted its attempts");
}

inline double max_abs_dev(const Spectrum& x, const Spectrum& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

inline double max_entry_dev(const JacobiMatrix& X, const JacobiMatrix& Y) {
  if (X.size() != Y.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < X.a.size(); ++i) d = std::max(d, std::abs(X.a[i] - Y.a[i]));
  for (std::size_t i = 0; i < X.b.size(); ++i) d = std::max(d, std::abs(X.b[i] - Y.b[i]));
  return d;
}

// Split parameters that the original chain of a forward instance realizes:
// at each shared pole the right half-chain's share of the residue is
// b_n^2 * w_plus(nu) where w_plus is the spectral weight of the trailing
// block at its first site.
inline std::vector<double> true_splits(const ForwardInstance& inst,
                                       const chainspec::GHatExpansion& exp) {
  std::vector<double> t;
  if (exp.common.empty()) return t;
  const std::size_t n = inst.data.site;
  const std::size_t N = inst.J.size();
  auto plus = chainspec::submatrix(inst.J, n + 1, N - 1);
  auto wp = chainspec::eigenvector_weights(plus, 0);
  const double bn2 = inst.J.b[n] * inst.J.b[n];
  for (std::size_t idx : exp.common) {
    const double nu = exp.zeros[idx];
    double w = 0.0, best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < wp.values.size(); ++k) {
      const double d = std::abs(wp.values[k] - nu);
      if (d < best) {
        best = d;
        w = wp.weights[k];
      }
    }
    t.push_back(bn2 * w / exp.rec_residues[idx]);
  }
  return t;
}

}  // namespace testutil
