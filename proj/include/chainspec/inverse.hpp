#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conditions.hpp"
#include "core.hpp"
#include "detail/spectra.hpp"
#include "eigen.hpp"
#include "perturb.hpp"

// Reconstruction of all chains consistent with admissible two-spectra data.
//
// Step one turns the data into the Green's function at the perturbed site,
//   Ghat(lambda) = sum_i alpha_i / (pole_i - lambda),
// whose poles are the sigma points that keep nonzero weight and whose
// residues come from evaluating the product formula
//   beta_j = prod_i (sigma_j - sigma_hat_i) / (prod_{i != j} (sigma_j - sigma_i) * (sigma_j - K))
// in the reduced form with coincident factors cancelled, alpha = beta/(1-theta_sq).
// When K is itself a pole its residue is (R(K) - theta_sq)/(1 - theta_sq),
// which vanishes exactly in the common-zero case.
//
// Ghat increases strictly between consecutive poles, so it has one zero nu_l
// per gap. Writing the reciprocal as
//   -1/Ghat(lambda) = lambda - a_n + b_n^2 m_plus(lambda) + b_{n-1}^2 m_minus(lambda)
// splits the zeros into poles of the right half-chain function m_plus and of
// the left one m_minus. Zeros shared by both spectra (the mu's, plus K in
// the common-zero case) must be poles of both halves, and how their residue
// beta_l splits between the halves is a free parameter t_l in (0,1). Every
// other zero goes entirely to one side, and each admissible split is one
// solution family. A family has dimension equal to the number of shared
// zeros, and the number of families is C(#free zeros, #minus slots).

namespace chainspec {

struct GHatExpansion {
  PoleResidueForm ghat;
  // One zero per gap between consecutive kept poles, ascending.
  std::vector<double> zeros;
  // Diagonal entry at the perturbed site: sum alpha_i * pole_i.
  double rec_a = 0.0;
  // beta_l = 1/Ghat'(zero_l), the unnormalized residue carried by each zero.
  std::vector<double> rec_residues;
  // Indices into zeros that both half-chains must share.
  std::vector<std::size_t> common;
};

// Index sets into GHatExpansion::zeros. minus_only feeds the left
// half-chain, plus_only the right, common both.
struct PoleAssignment {
  std::vector<std::size_t> minus_only;
  std::vector<std::size_t> plus_only;
  std::vector<std::size_t> common;
};

enum class Anchor { First, Last };

struct AssembledPair {
  JacobiMatrix J;
  JacobiMatrix J_tilde;
  // Largest absolute deviation of the reproduced spectra from the data.
  double spectral_residual = 0.0;
};

struct SolveOptions {
  int samples = 3;
  std::uint64_t seed = 0;
};

struct FamilySample {
  std::vector<double> t;
  JacobiMatrix J;
  JacobiMatrix J_tilde;
  double spectral_residual = 0.0;
};

struct SolutionFamily {
  PoleAssignment assignment;
  std::size_t dimension = 0;
  std::string count_formula;
  std::vector<FamilySample> samples;
  // Evaluates the family at any interior parameter point t.
  std::function<AssembledPair(const std::vector<double>&)> sampler;
};

struct InverseResult {
  ConditionsReport report;
  std::optional<GHatExpansion> expansion;
  std::vector<SolutionFamily> families;
};

inline GHatExpansion build_ghat(const SpectralData& D, const DataClassification& cls,
                                const TolerancePolicy& tol = {}) {
  require_valid(D, tol);
  if (!cls.theta_sq)
    throw MissingTheta("the classification fixes no mass ratio; supply theta_sq");
  const double ts = *cls.theta_sq;
  if (!(ts > 0.0) || !(ts < 1.0)) throw InvalidTheta("theta_sq outside (0,1)");

  const double spread = spread_of(D);
  const double abs_tol = tol.abs_tol(spread);
  const std::size_t N = D.sigma.size();

  const auto match = detail::match_coincident(D.sigma, D.sigma_hat, abs_tol);
  std::optional<std::size_t> k_sigma, k_hat;
  for (std::size_t i = 0; i < N; ++i)
    if (std::abs(D.sigma[i] - D.K) <= abs_tol) k_sigma = i;
  for (std::size_t j = 0; j < N; ++j)
    if (std::abs(D.sigma_hat[j] - D.K) <= abs_tol) k_hat = j;
  const bool k_common = k_sigma && k_hat;
  if (k_common != (cls.k_case != KCase::Outside))
    throw VerificationFailed("classification disagrees with the data on K membership");

  GHatExpansion exp;
  for (std::size_t j = 0; j < N; ++j) {
    const bool matched = match.sigma_matched[j];
    const bool is_k = k_sigma && j == *k_sigma;
    if (matched && !is_k) continue;  // unmovable eigenvalue, weight zero
    if (is_k && cls.k_case == KCase::CommonZero) continue;

    double alpha;
    if (is_k) {
      // Residue at the shared pole K from the reduced ratio level there.
      const double rK =
          detail::cancelled_ratio(detail::unmatched_values(D.sigma_hat, match.hat_matched),
                                  detail::unmatched_values(D.sigma, match.sigma_matched), D.K,
                                  abs_tol);
      alpha = (rK - ts) / (1.0 - ts);
    } else {
      // Numerator factors: surviving sigma_hat points, never the entry at K.
      // Denominator: the other sigma points surviving cancellation, where
      // the K pole itself always survives, plus (sigma_j - K) when K is not
      // a pole of its own.
      std::vector<double> num, den;
      for (std::size_t i = 0; i < N; ++i) {
        if (!match.hat_matched[i] && !(k_hat && i == *k_hat)) num.push_back(D.sigma_hat[i]);
        if (i != j && (!match.sigma_matched[i] || (k_sigma && i == *k_sigma)))
          den.push_back(D.sigma[i]);
      }
      if (!k_common) den.push_back(D.K);
      std::sort(den.begin(), den.end());
      const double beta = detail::cancelled_ratio(num, den, D.sigma[j], abs_tol);
      alpha = beta / (1.0 - ts);
    }
    if (!(alpha > 0.0))
      throw NegativeResidue("residue at pole " + std::to_string(D.sigma[j]) + " is " +
                            std::to_string(alpha));
    exp.ghat.poles.push_back(D.sigma[j]);
    exp.ghat.residues.push_back(alpha);
  }

  double sum = 0.0;
  for (double a : exp.ghat.residues) sum += a;
  if (std::abs(sum - 1.0) > 100.0 * tol.rel_tol)
    throw VerificationFailed("residues of Ghat sum to " + std::to_string(sum) + ", not 1");

  for (std::size_t i = 0; i < exp.ghat.size(); ++i)
    exp.rec_a += exp.ghat.residues[i] * exp.ghat.poles[i];

  // One zero per gap: Ghat runs from -inf to +inf strictly increasingly.
  const double width = tol.eigen_tol * spread;
  for (std::size_t l = 0; l + 1 < exp.ghat.size(); ++l) {
    const double pl = exp.ghat.poles[l], pr = exp.ghat.poles[l + 1];
    const double gap = pr - pl;
    double lo = 0.0, hi = 0.0;
    bool have_lo = false, have_hi = false;
    for (double frac = 0.25; frac > 1e-15; frac *= 0.25) {
      if (!have_lo && exp.ghat.value(pl + frac * gap) < 0.0) {
        lo = pl + frac * gap;
        have_lo = true;
      }
      if (!have_hi && exp.ghat.value(pr - frac * gap) > 0.0) {
        hi = pr - frac * gap;
        have_hi = true;
      }
      if (have_lo && have_hi) break;
    }
    if (!have_lo || !have_hi)
      throw ZeroBracketFailure("no sign change inside the gap (" + std::to_string(pl) + ", " +
                               std::to_string(pr) + ")");
    while (hi - lo > width) {
      const double mid = 0.5 * (lo + hi);
      (exp.ghat.value(mid) < 0.0 ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int step = 0; step < 3; ++step) {
      const double next = x - exp.ghat.value(x) / exp.ghat.derivative(x);
      if (next <= pl || next >= pr || next == x) break;
      x = next;
    }
    exp.zeros.push_back(x);
    exp.rec_residues.push_back(1.0 / exp.ghat.derivative(x));
  }

  // Shared zeros: every mu, plus K itself in the common-zero case.
  std::vector<double> shared = cls.mu;
  if (cls.k_case == KCase::CommonZero) {
    shared.push_back(D.K);
    std::sort(shared.begin(), shared.end());
  }
  for (double m : shared) {
    std::size_t best = 0;
    double best_d = std::abs(exp.zeros.empty() ? 0.0 : exp.zeros[0] - m);
    for (std::size_t l = 1; l < exp.zeros.size(); ++l)
      if (std::abs(exp.zeros[l] - m) < best_d) {
        best = l;
        best_d = std::abs(exp.zeros[l] - m);
      }
    if (exp.zeros.empty() || best_d > 10.0 * abs_tol)
      throw VerificationFailed("shared eigenvalue " + std::to_string(m) +
                               " is not a zero of Ghat");
    exp.common.push_back(best);
  }
  std::sort(exp.common.begin(), exp.common.end());
  return exp;
}

inline std::vector<PoleAssignment> enumerate_assignments(const GHatExpansion& exp,
                                                         const DataClassification& cls) {
  std::vector<std::size_t> free;
  for (std::size_t l = 0; l < exp.zeros.size(); ++l)
    if (std::find(exp.common.begin(), exp.common.end(), l) == exp.common.end())
      free.push_back(l);

  if (cls.site < exp.common.size())
    throw InfeasibleCounts("site " + std::to_string(cls.site) + " cannot hold " +
                           std::to_string(exp.common.size()) + " shared poles");
  const std::size_t minus_need = cls.site - exp.common.size();
  if (minus_need > free.size())
    throw InfeasibleCounts("left half-chain needs " + std::to_string(minus_need) +
                           " poles but only " + std::to_string(free.size()) + " zeros are free");

  // All C(|free|, minus_need) subsets in lexicographic order.
  std::vector<PoleAssignment> out;
  std::vector<std::size_t> pick(minus_need);
  for (std::size_t i = 0; i < minus_need; ++i) pick[i] = i;
  while (true) {
    PoleAssignment a;
    a.common = exp.common;
    std::vector<char> taken(free.size(), 0);
    for (std::size_t i : pick) {
      a.minus_only.push_back(free[i]);
      taken[i] = 1;
    }
    for (std::size_t i = 0; i < free.size(); ++i)
      if (!taken[i]) a.plus_only.push_back(free[i]);
    out.push_back(std::move(a));

    if (minus_need == 0) break;
    std::size_t i = minus_need;
    while (i > 0 && pick[i - 1] == free.size() - minus_need + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < minus_need; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

// Chain from a finite spectral measure by Lanczos on diag(poles) with start
// vector sqrt(residues), fully reorthogonalized. Anchor::First makes the
// measure live at site 0 of the result, Anchor::Last at the final site. The
// couplings come out negative, matching the chain sign convention.
inline JacobiMatrix reconstruct_weyl(std::span<const double> poles,
                                     std::span<const double> residues, Anchor anchor,
                                     const TolerancePolicy& tol = {}) {
  const std::size_t M = poles.size();
  if (M == 0 || residues.size() != M)
    throw MeasureDegenerate("measure needs matching, nonempty poles and residues");
  const double spread = spread_of(poles);
  double sum = 0.0;
  for (double r : residues) {
    if (!(r > 0.0)) throw MeasureDegenerate("residues must be strictly positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 100.0 * tol.rel_tol)
    throw MeasureDegenerate("residues sum to " + std::to_string(sum) + ", not 1");
  for (std::size_t i = 0; i + 1 < M; ++i)
    if (poles[i + 1] - poles[i] <= tol.abs_tol(spread))
      throw MeasureDegenerate("measure poles are not separated at tolerance");

  std::vector<std::vector<double>> V;
  std::vector<double> va(M), vb;
  std::vector<double> v(M), w(M);
  for (std::size_t i = 0; i < M; ++i) v[i] = std::sqrt(residues[i] / sum);

  const auto dot = [M](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < M; ++i) s += x[i] * y[i];
    return s;
  };

  V.push_back(v);
  for (std::size_t j = 0; j < M; ++j) {
    const auto& vj = V[j];
    double aj = 0.0;
    for (std::size_t i = 0; i < M; ++i) aj += poles[i] * vj[i] * vj[i];
    va[j] = aj;
    if (j + 1 == M) break;

    for (std::size_t i = 0; i < M; ++i) w[i] = poles[i] * vj[i] - aj * vj[i];
    if (j > 0)
      for (std::size_t i = 0; i < M; ++i) w[i] -= vb[j - 1] * V[j - 1][i];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : V) {
        const double c = dot(u, w);
        for (std::size_t i = 0; i < M; ++i) w[i] -= c * u[i];
      }
    const double beta = std::sqrt(dot(w, w));
    if (!(beta > M * 1e-14 * spread))
      throw MeasureDegenerate("Lanczos broke down: the measure has fewer than " +
                              std::to_string(M) + " effective points");
    vb.push_back(beta);
    for (std::size_t i = 0; i < M; ++i) w[i] /= beta;
    V.push_back(w);
  }

  JacobiMatrix J;
  J.a = std::move(va);
  J.b.resize(M >= 1 ? M - 1 : 0);
  for (std::size_t i = 0; i + 1 < M; ++i) J.b[i] = -vb[i];
  if (anchor == Anchor::Last) {
    std::reverse(J.a.begin(), J.a.end());
    std::reverse(J.b.begin(), J.b.end());
  }
  return J;
}

inline AssembledPair assemble_solution(const GHatExpansion& exp, const PoleAssignment& asg,
                                       std::span<const double> t, const DataClassification& cls,
                                       const SpectralData& D, const TolerancePolicy& tol = {}) {
  if (t.size() != asg.common.size())
    throw InvalidInput("need one split parameter per shared pole, got " +
                       std::to_string(t.size()) + " for " + std::to_string(asg.common.size()));
  for (double x : t)
    if (!(x > 0.0) || !(x < 1.0))
      throw InvalidInput("split parameters must lie strictly in (0,1)");
  if (!cls.theta_sq) throw MissingTheta("assembly needs a point value of theta_sq");

  const std::size_t N = cls.size;
  const std::size_t n = cls.site;
  if (asg.minus_only.size() + asg.common.size() != n ||
      asg.plus_only.size() + asg.common.size() != N - 1 - n)
    throw InfeasibleCounts("assignment sizes do not match the site");

  std::vector<double> pm, rm, pp, rp;
  for (std::size_t l : asg.minus_only) {
    pm.push_back(exp.zeros[l]);
    rm.push_back(exp.rec_residues[l]);
  }
  for (std::size_t l : asg.plus_only) {
    pp.push_back(exp.zeros[l]);
    rp.push_back(exp.rec_residues[l]);
  }
  for (std::size_t i = 0; i < asg.common.size(); ++i) {
    const std::size_t l = asg.common[i];
    pm.push_back(exp.zeros[l]);
    rm.push_back((1.0 - t[i]) * exp.rec_residues[l]);
    pp.push_back(exp.zeros[l]);
    rp.push_back(t[i] * exp.rec_residues[l]);
  }
  // reconstruct_weyl wants sorted measures; the splits above may interleave.
  const auto sort_measure = [](std::vector<double>& p, std::vector<double>& r) {
    std::vector<std::size_t> idx(p.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&p](std::size_t x, std::size_t y) { return p[x] < p[y]; });
    std::vector<double> p2(p.size()), r2(r.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      p2[i] = p[idx[i]];
      r2[i] = r[idx[i]];
    }
    p.swap(p2);
    r.swap(r2);
  };
  sort_measure(pm, rm);
  sort_measure(pp, rp);

  double bm2 = 0.0, bp2 = 0.0;
  for (double r : rm) bm2 += r;
  for (double r : rp) bp2 += r;

  JacobiMatrix J;
  J.a.reserve(N);
  J.b.reserve(N - 1);
  if (n > 0) {
    std::vector<double> rmn(rm);
    for (double& r : rmn) r /= bm2;
    const JacobiMatrix left = reconstruct_weyl(pm, rmn, Anchor::Last, tol);
    J.a = left.a;
    J.b = left.b;
    J.b.push_back(-std::sqrt(bm2));
  }
  J.a.push_back(exp.rec_a);
  if (n + 1 < N) {
    std::vector<double> rpn(rp);
    for (double& r : rpn) r /= bp2;
    const JacobiMatrix right = reconstruct_weyl(pp, rpn, Anchor::First, tol);
    J.b.push_back(-std::sqrt(bp2));
    J.a.insert(J.a.end(), right.a.begin(), right.a.end());
    J.b.insert(J.b.end(), right.b.begin(), right.b.end());
  }

  AssembledPair out;
  out.J = J;
  out.J_tilde = apply_perturbation(J, {n, *cls.theta_sq, D.K});

  const double spread = spread_of(D);
  const auto sig = eigenvalues(out.J, tol);
  const auto sig_hat = eigenvalues(out.J_tilde, tol);
  double dev = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    dev = std::max(dev, std::abs(sig[i] - D.sigma[i]));
    dev = std::max(dev, std::abs(sig_hat[i] - D.sigma_hat[i]));
  }
  out.spectral_residual = dev;
  if (dev > 100.0 * tol.abs_tol(spread))
    throw VerificationFailed("assembled chain misses the spectra by " + std::to_string(dev));
  return out;
}

inline InverseResult solve_inverse(const SpectralData& D, const SolveOptions& opts = {},
                                   const TolerancePolicy& tol = {}) {
  InverseResult res;
  res.report = check_conditions(D, tol);
  if (!res.report.pass) return res;
  if (!res.report.classification)
    throw AmbiguousClassification("conditions passed but the data resists classification");
  DataClassification cls = *res.report.classification;
  if (!cls.theta_sq)
    throw MissingTheta("the data leaves theta_sq free; supply a value to invert");

  const GHatExpansion exp = build_ghat(D, cls, tol);
  res.expansion = exp;

  std::vector<std::size_t> free_zeros;
  for (std::size_t l = 0; l < exp.zeros.size(); ++l)
    if (std::find(exp.common.begin(), exp.common.end(), l) == exp.common.end())
      free_zeros.push_back(l);
  const std::string formula = "C(" + std::to_string(free_zeros.size()) + "," +
                              std::to_string(cls.site - exp.common.size()) + ")";

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> interior(0.05, 0.95);

  for (const auto& asg : enumerate_assignments(exp, cls)) {
    SolutionFamily fam;
    fam.assignment = asg;
    fam.dimension = asg.common.size();
    fam.count_formula = formula;

    const std::size_t dim = fam.dimension;
    std::vector<std::vector<double>> grid;
    grid.emplace_back(dim, 0.5);
    const int extra = dim == 0 ? 0 : std::max(0, opts.samples - 1);
    for (int s = 0; s < extra; ++s) {
      std::vector<double> pt(dim);
      for (double& x : pt) x = interior(rng);
      grid.push_back(std::move(pt));
    }

    for (const auto& pt : grid) {
      const AssembledPair pair = assemble_solution(exp, asg, pt, cls, D, tol);
      fam.samples.push_back({pt, pair.J, pair.J_tilde, pair.spectral_residual});
    }
    fam.sampler = [exp, asg, cls, D, tol](const std::vector<double>& pt) {
      return assemble_solution(exp, asg, pt, cls, D, tol);
    };
    res.families.push_back(std::move(fam));
  }
  return res;
}

}  // namespace chainspec
