#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "detail/spectra.hpp"

// Admissibility of two-spectra data. Writing R for the reduced spectral
// ratio and mu_1..mu_q for the points shared by both spectra other than K,
// the data of a genuine perturbation pair satisfies, with nt = min(n, N-1-n):
//
//   I    the shifted interlacing partition: exactly one sigma_hat point per
//        interval, where the splitting of the gap around K depends on the
//        index p of K within sigma
//   II   R(mu_1) = ... = R(mu_q) = theta_sq, a single value in (0,1)
//   III  when K avoids both spectra: q <= nt and R(K) = theta_sq
//   IV   when K meets a spectrum it meets both, and either
//        (a) q <= nt and R(K) > theta_sq  (K stays a pole), or
//        (b) q <  nt and R(K) = theta_sq with R'(K) = 0  (K becomes a zero)
//
// These are necessary and sufficient: the checker accepts exactly the data
// the inverse solver can realize. Conditions are tested in order I..IV and
// the first failure is what gets reported.

namespace chainspec {

enum class KCase {
  // K avoids both spectra; it is a zero of neither numerator nor denominator.
  Outside,
  // K is a shared eigenvalue and remains a pole of the Green's function.
  CommonPole,
  // K is a shared eigenvalue that the Green's function is regular at; the
  // perturbed site eigenvector vanishes there.
  CommonZero,
};

inline const char* to_string(KCase c) {
  switch (c) {
    case KCase::Outside: return "k_outside";
    case KCase::CommonPole: return "k_common_pole";
    case KCase::CommonZero: return "k_common_zero";
  }
  return "?";
}

struct DataClassification {
  std::size_t size = 0;
  std::size_t site = 0;
  // Index position of K in sigma: sigma_p < K <= sigma_{p+1} in 1-based
  // terms, i.e. the number of eigenvalues strictly below K.
  std::size_t p = 0;
  std::vector<double> mu;
  std::size_t q = 0;
  std::size_t n_tilde = 0;
  KCase k_case = KCase::Outside;
  std::optional<double> theta_sq;
  // Populated instead of theta_sq when the data constrains the mass ratio
  // only to an open interval (K shared, q = 0, ratio slope at K nonzero).
  std::optional<std::pair<double, double>> theta_sq_range;
};

struct InterlacingInterval {
  double lo = 0.0, hi = 0.0;
  bool lo_closed = false, hi_closed = false;
  std::size_t count = 0;
};

struct InterlacingReport {
  bool pass = false;
  std::size_t p = 0;
  std::vector<InterlacingInterval> intervals;
  // sigma_hat points landing in no interval. A pass allows these only when
  // they sit at K itself, the one point condition IV accounts for.
  std::vector<double> unassigned;
};

struct ConditionResult {
  bool applicable = true;
  bool pass = true;
  std::string detail;
};

struct ConditionsReport {
  bool pass = false;
  ConditionResult I, II, III, IV;
  // "I".."IV", empty when all pass.
  std::string first_failed;
  InterlacingReport interlacing;
  std::optional<DataClassification> classification;
};

namespace detail {

// Everything the conditions need, computed once: coincidences, K membership,
// the index p, and the reduced ratio (with derivative) at K and at each mu.
struct ConditionContext {
  double spread = 1.0;
  double abs_tol = 0.0;
  std::size_t N = 0;
  std::size_t site = 0;
  std::size_t n_tilde = 0;
  std::size_t p = 0;
  bool k_in_sigma = false, k_in_hat = false;
  std::vector<double> mu;
  std::vector<double> r_at_mu;
  std::optional<double> r_at_k;
  std::optional<double> rd_at_k;
  double rd_scale_at_k = 1.0;
  std::vector<double> num, den;
};

inline ConditionContext condition_context(const SpectralData& D, const TolerancePolicy& tol) {
  require_valid(D, tol);
  ConditionContext c;
  c.spread = spread_of(D);
  c.abs_tol = tol.abs_tol(c.spread);
  c.N = D.sigma.size();
  c.site = D.site;
  c.n_tilde = std::min(D.site, c.N - 1 - D.site);

  const auto match = match_coincident(D.sigma, D.sigma_hat, c.abs_tol);
  std::optional<std::size_t> k_sigma_index;
  for (std::size_t i = 0; i < c.N; ++i) {
    if (std::abs(D.sigma[i] - D.K) <= c.abs_tol) {
      c.k_in_sigma = true;
      k_sigma_index = i;
    } else if (D.sigma[i] < D.K) {
      ++c.p;
    }
  }
  for (double x : D.sigma_hat)
    if (std::abs(x - D.K) <= c.abs_tol) c.k_in_hat = true;

  for (const auto& [i, j] : match.pairs)
    if (!k_sigma_index || i != *k_sigma_index) c.mu.push_back(D.sigma[i]);

  c.num = unmatched_values(D.sigma_hat, match.hat_matched);
  c.den = unmatched_values(D.sigma, match.sigma_matched);

  for (double m : c.mu) c.r_at_mu.push_back(cancelled_ratio(c.num, c.den, m, c.abs_tol));
  try {
    c.r_at_k = cancelled_ratio(c.num, c.den, D.K, c.abs_tol);
    c.rd_at_k = cancelled_ratio_derivative(c.num, c.den, D.K, c.abs_tol);
    c.rd_scale_at_k = ratio_derivative_scale(c.num, c.den, D.K, std::abs(*c.r_at_k));
  } catch (const PoleAtPoint&) {
    // K sits on a surviving point of one spectrum only; the ratio at K is
    // singular (or exactly zero) and the conditions will say so.
  }
  return c;
}

// strict = true follows the classify() contract and throws on anything the
// data does not determine. strict = false never throws past this point and
// leaves theta_sq empty (recording an interval where one exists); returns
// nothing only if K belongs to exactly one spectrum.
inline std::optional<DataClassification> classify_from_context(const ConditionContext& c,
                                                               const SpectralData& D,
                                                               const TolerancePolicy& tol,
                                                               bool strict) {
  DataClassification out;
  out.size = c.N;
  out.site = c.site;
  out.p = c.p;
  out.mu = c.mu;
  out.q = c.mu.size();
  out.n_tilde = c.n_tilde;

  std::optional<double> theta;
  if (!c.mu.empty()) {
    theta = c.r_at_mu.front();
    for (double r : c.r_at_mu)
      if (strict && std::abs(r - *theta) > tol.rel_tol)
        throw AmbiguousClassification("shared eigenvalues disagree on the mass ratio: " +
                                      std::to_string(*theta) + " vs " + std::to_string(r));
    if (D.theta_sq) {
      if (strict && std::abs(*D.theta_sq - *theta) > tol.rel_tol)
        throw AmbiguousClassification("supplied theta_sq " + std::to_string(*D.theta_sq) +
                                      " conflicts with the ratio at shared eigenvalues " +
                                      std::to_string(*theta));
      theta = D.theta_sq;
    }
    if (strict && (!(*theta > 0.0) || !(*theta < 1.0)))
      throw InvalidTheta("ratio at shared eigenvalues is " + std::to_string(*theta) +
                         ", outside (0,1)");
  } else {
    theta = D.theta_sq;
  }

  if (c.k_in_sigma != c.k_in_hat) {
    if (strict)
      throw AmbiguousClassification(
          "K belongs to exactly one spectrum; no perturbation produces such data");
    return std::nullopt;
  }

  if (!c.k_in_sigma) {
    out.k_case = KCase::Outside;
    if (strict && out.q > out.n_tilde)
      throw AmbiguousClassification("q = " + std::to_string(out.q) +
                                    " shared eigenvalues exceed min(n, N-1-n) = " +
                                    std::to_string(out.n_tilde));
    if (!theta && c.r_at_k) {
      // For data of a genuine perturbation the ratio at K is the mass ratio.
      theta = *c.r_at_k;
      if (strict && (!(*theta > 0.0) || !(*theta < 1.0)))
        throw InvalidTheta("ratio at K is " + std::to_string(*theta) + ", outside (0,1)");
    }
    out.theta_sq = theta;
    return out;
  }

  // K shared by both spectra.
  const double rK = c.r_at_k ? *c.r_at_k : 0.0;
  const double rdK = c.rd_at_k ? *c.rd_at_k : 0.0;
  const bool slope_zero = std::abs(rdK) <= tol.rel_tol * c.rd_scale_at_k;
  if (theta) {
    const bool level_match = std::abs(rK - *theta) <= tol.rel_tol;
    if (rK > *theta + tol.rel_tol) {
      out.k_case = KCase::CommonPole;
      if (strict && out.q > out.n_tilde)
        throw AmbiguousClassification("q exceeds min(n, N-1-n)");
    } else if (level_match && slope_zero) {
      out.k_case = KCase::CommonZero;
      if (strict && out.q + 1 > out.n_tilde)
        throw AmbiguousClassification("a vanishing weight at K needs q < min(n, N-1-n)");
    } else if (strict) {
      throw AmbiguousClassification(
          level_match ? "ratio matches theta_sq at K but has nonzero slope there"
                      : "ratio at K is below theta_sq; no perturbation produces such data");
    } else {
      out.k_case = rK > *theta ? KCase::CommonPole : KCase::CommonZero;
    }
    out.theta_sq = theta;
    return out;
  }

  // Mass ratio unknown and no shared eigenvalue determines it.
  if (slope_zero) {
    out.k_case = KCase::CommonZero;
    if (strict && (!(rK > 0.0) || !(rK < 1.0)))
      throw InvalidTheta("ratio at K is " + std::to_string(rK) + ", outside (0,1)");
    out.theta_sq = rK;
    return out;
  }
  if (strict)
    throw MissingTheta("the data leaves theta_sq free in (0, " + std::to_string(rK) +
                       "); supply a value");
  out.k_case = KCase::CommonPole;
  out.theta_sq_range = std::make_pair(0.0, rK);
  return out;
}

}  // namespace detail

inline DataClassification classify(const SpectralData& D, const TolerancePolicy& tol = {}) {
  const auto c = detail::condition_context(D, tol);
  return *detail::classify_from_context(c, D, tol, true);
}

inline InterlacingReport check_interlacing(const SpectralData& D, const TolerancePolicy& tol = {}) {
  const auto c = detail::condition_context(D, tol);
  const auto& s = D.sigma;
  const double at = c.abs_tol;

  InterlacingReport rep;
  rep.p = c.p;
  const std::size_t N = c.N;
  const std::size_t p = c.p;

  // Gap intervals below K close on the left, those above K close on the
  // right; the gap holding K is split around it with both new endpoints
  // open. When K coincides with sigma_{p+1} the interval (K, sigma_{p+1}]
  // degenerates and is dropped: one sigma_hat point is then expected at K.
  auto push = [&rep](double lo, double hi, bool lc, bool hc) {
    rep.intervals.push_back({lo, hi, lc, hc, 0});
  };
  for (std::size_t j = 1; j + 1 <= p; ++j) push(s[j - 1], s[j], true, false);
  if (p >= 1) push(s[p - 1], D.K, true, false);
  if (p + 1 <= N && !(std::abs(D.K - s[p]) <= at)) push(D.K, s[p], false, true);
  for (std::size_t j = p + 1; j + 1 <= N; ++j) push(s[j - 1], s[j], false, true);

  const auto inside = [at](const InterlacingInterval& iv, double x) {
    const bool above = iv.lo_closed ? x >= iv.lo - at : x > iv.lo + at;
    const bool below = iv.hi_closed ? x <= iv.hi + at : x < iv.hi - at;
    return above && below;
  };
  for (double x : D.sigma_hat) {
    bool placed = false;
    for (auto& iv : rep.intervals)
      if (inside(iv, x)) {
        ++iv.count;
        placed = true;
        break;
      }
    if (!placed) rep.unassigned.push_back(x);
  }

  rep.pass = true;
  for (const auto& iv : rep.intervals)
    if (iv.count != 1) rep.pass = false;
  for (double x : rep.unassigned)
    if (std::abs(x - D.K) > at) rep.pass = false;
  return rep;
}

inline ConditionsReport check_conditions(const SpectralData& D, const TolerancePolicy& tol = {}) {
  const auto c = detail::condition_context(D, tol);
  ConditionsReport R;

  R.interlacing = check_interlacing(D, tol);
  R.I.applicable = true;
  R.I.pass = R.interlacing.pass;
  if (!R.I.pass) {
    std::size_t bad = 0;
    for (const auto& iv : R.interlacing.intervals)
      if (iv.count != 1) ++bad;
    R.I.detail = std::to_string(bad) + " interval(s) without exactly one sigma_hat point, " +
                 std::to_string(R.interlacing.unassigned.size()) + " point(s) unassigned";
  } else {
    R.I.detail = "one sigma_hat point per interval";
  }

  const std::size_t q = c.mu.size();
  if (q == 0) {
    R.II.pass = true;
    R.II.detail = "no shared eigenvalues besides possibly K";
  } else {
    const double ref = D.theta_sq ? *D.theta_sq : c.r_at_mu.front();
    bool ok = ref > tol.rel_tol && ref < 1.0 - tol.rel_tol;
    double worst = 0.0;
    for (double r : c.r_at_mu) worst = std::max(worst, std::abs(r - ref));
    ok = ok && worst <= tol.rel_tol;
    R.II.pass = ok;
    R.II.detail = ok ? "ratio at shared eigenvalues agrees: theta_sq = " + std::to_string(ref)
                     : "ratio at shared eigenvalues off by " + std::to_string(worst) +
                           " from " + std::to_string(ref);
  }

  std::optional<double> theta = D.theta_sq;
  if (!theta && q >= 1) theta = c.r_at_mu.front();

  const bool k_shared = c.k_in_sigma || c.k_in_hat;
  if (!k_shared) {
    R.IV.applicable = false;
    R.IV.pass = true;
    R.IV.detail = "not applicable: K outside both spectra";
    R.III.applicable = true;
    if (q > c.n_tilde) {
      R.III.pass = false;
      R.III.detail = "q = " + std::to_string(q) + " exceeds min(n, N-1-n) = " +
                     std::to_string(c.n_tilde);
    } else if (!c.r_at_k) {
      R.III.pass = false;
      R.III.detail = "ratio at K is singular";
    } else if (theta) {
      const double dev = std::abs(*c.r_at_k - *theta);
      R.III.pass = dev <= tol.rel_tol;
      R.III.detail = R.III.pass
                         ? "ratio at K matches theta_sq"
                         : "ratio at K is " + std::to_string(*c.r_at_k) + ", off theta_sq = " +
                               std::to_string(*theta) + " by " + std::to_string(dev);
    } else {
      const double rK = *c.r_at_k;
      R.III.pass = rK > tol.rel_tol && rK < 1.0 - tol.rel_tol;
      R.III.detail = R.III.pass ? "theta_sq taken from the ratio at K: " + std::to_string(rK)
                                : "ratio at K is " + std::to_string(rK) + ", outside (0,1)";
    }
  } else {
    R.III.applicable = false;
    R.III.pass = true;
    R.III.detail = "not applicable: K meets a spectrum";
    R.IV.applicable = true;
    if (!(c.k_in_sigma && c.k_in_hat)) {
      R.IV.pass = false;
      R.IV.detail = std::string("IV violated: K belongs to ") +
                    (c.k_in_sigma ? "sigma" : "sigma_hat") + " only";
    } else {
      const double rK = c.r_at_k ? *c.r_at_k : 0.0;
      const bool slope_zero =
          c.rd_at_k && std::abs(*c.rd_at_k) <= tol.rel_tol * c.rd_scale_at_k;
      if (theta) {
        if (rK > *theta + tol.rel_tol) {
          R.IV.pass = q <= c.n_tilde;
          R.IV.detail = R.IV.pass ? "IV.a: K stays a pole, ratio at K exceeds theta_sq"
                                  : "IV.a violated: q exceeds min(n, N-1-n)";
        } else if (std::abs(rK - *theta) <= tol.rel_tol) {
          if (!slope_zero) {
            R.IV.pass = false;
            R.IV.detail = "IV violated: ratio meets theta_sq at K but with nonzero slope";
          } else {
            R.IV.pass = q + 1 <= c.n_tilde;
            R.IV.detail = R.IV.pass ? "IV.b: K becomes a zero of the Green's function"
                                    : "IV.b violated: needs q < min(n, N-1-n)";
          }
        } else {
          R.IV.pass = false;
          R.IV.detail = "IV violated: ratio at K is " + std::to_string(rK) +
                        ", below theta_sq = " + std::to_string(*theta);
        }
      } else {
        // q = 0 and no supplied value: the ratio level at K bounds theta_sq.
        if (slope_zero) {
          R.IV.pass = rK > tol.rel_tol && rK < 1.0 - tol.rel_tol;
          R.IV.detail = R.IV.pass
                            ? "IV.b: theta_sq taken from the ratio at K: " + std::to_string(rK)
                            : "IV violated: ratio at K outside (0,1)";
        } else {
          R.IV.pass = rK > tol.rel_tol;
          R.IV.detail = R.IV.pass ? "IV.a: theta_sq free in (0, " + std::to_string(rK) + ")"
                                  : "IV violated: ratio at K is not positive";
        }
      }
    }
  }

  R.first_failed.clear();
  const std::pair<const char*, const ConditionResult*> ordered[] = {
      {"I", &R.I}, {"II", &R.II}, {"III", &R.III}, {"IV", &R.IV}};
  for (const auto& [name, res] : ordered)
    if (res->applicable && !res->pass) {
      R.first_failed = name;
      break;
    }
  R.pass = R.first_failed.empty();
  R.classification = detail::classify_from_context(c, D, tol, false);
  return R;
}

}  // namespace chainspec
