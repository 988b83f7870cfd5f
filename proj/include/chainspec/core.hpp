#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Value types shared by the whole library: the tridiagonal chain matrix, the
// interior perturbation parameters, spectra, pole/residue expansions, and the
// tolerance policy. Every operation downstream is a pure function over these.

namespace chainspec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by sturm_count when the pivot recurrence keeps hitting exact zeros
// even after nudging the shift point.
struct BreakdownAtPivot : Error {
  using Error::Error;
};

// Eigenvalue brackets collapsed below separation tolerance.
struct NonSimpleSpectrum : Error {
  using Error::Error;
};

struct EmptyRange : Error {
  using Error::Error;
};

// Evaluation requested at (or within tolerance of) a pole.
struct PoleAtPoint : Error {
  using Error::Error;
};

// The two-spectra Green's function is singular at K unless the spectral
// ratio there equals the mass ratio; this reports the non-removable case.
struct PoleAtK : Error {
  using Error::Error;
};

struct InvalidTheta : Error {
  using Error::Error;
};

struct MissingTheta : Error {
  using Error::Error;
};

struct AmbiguousClassification : Error {
  using Error::Error;
};

struct MeasureDegenerate : Error {
  using Error::Error;
};

struct NegativeResidue : Error {
  using Error::Error;
};

struct ZeroBracketFailure : Error {
  using Error::Error;
};

struct InfeasibleCounts : Error {
  using Error::Error;
};

// A reconstructed object failed its closing consistency check.
struct VerificationFailed : Error {
  using Error::Error;
};

struct InvalidInput : Error {
  using Error::Error;
};

struct InvalidSystem : Error {
  using Error::Error;
};

// Carries the index of the first offending spring constant.
struct NotRealizable : Error {
  std::size_t index;
  NotRealizable(const std::string& msg, std::size_t idx) : Error(msg), index(idx) {}
};

// ---------------------------------------------------------------------------
// matrices and spectra

// Real symmetric tridiagonal matrix of a spring-mass chain. Diagonal a has
// size N >= 1, off-diagonal b has size N-1 and every b[i] is strictly
// negative. The sign convention is part of the type's invariant: chains with
// positive masses and springs always produce negative couplings.
struct JacobiMatrix {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t size() const noexcept { return a.size(); }
};

using Spectrum = std::vector<double>;

// Interior modification at one site: the mass there is scaled by 1/theta_sq
// and a spring of combined strength K (per unit of the old mass) is attached.
// theta_sq lies strictly inside (0,1); the unperturbed case is excluded.
struct PerturbationParams {
  std::size_t site = 0;
  double theta_sq = 0.5;
  double K = 0.0;

  // Diagonal shift applied at the site before rescaling.
  double M() const { return (1.0 / theta_sq - 1.0) * K; }
};

// The two-spectra inverse-problem input: sigma of the original chain,
// sigma_hat of the perturbed one, the spring constant K, the perturbed site,
// and optionally the mass ratio when the data alone cannot pin it down.
struct SpectralData {
  Spectrum sigma;
  Spectrum sigma_hat;
  double K = 0.0;
  std::size_t site = 0;
  std::optional<double> theta_sq;
};

// Finite Herglotz function sum residues[i] / (poles[i] - lambda). Poles are
// strictly increasing, residues strictly positive.
struct PoleResidueForm {
  std::vector<double> poles;
  std::vector<double> residues;

  std::size_t size() const noexcept { return poles.size(); }

  double value(double lambda) const {
    double s = 0.0;
    for (std::size_t i = 0; i < poles.size(); ++i) s += residues[i] / (poles[i] - lambda);
    return s;
  }

  // Always positive away from poles, so value() is strictly increasing
  // between consecutive poles.
  double derivative(double lambda) const {
    double s = 0.0;
    for (std::size_t i = 0; i < poles.size(); ++i) {
      const double d = poles[i] - lambda;
      s += residues[i] / (d * d);
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// tolerances

// Two knobs cover the whole library. rel_tol decides when two spectral
// points coincide and when an evaluation sits on a pole; eigen_tol is the
// eigenvalue bracketing width. Invariant: 0 < eigen_tol <= rel_tol < 1.
// Absolute comparisons are always taken against a spread scale derived from
// the data at hand, never against raw magnitudes.
struct TolerancePolicy {
  double rel_tol = 1e-9;
  double eigen_tol = 1e-12;

  bool valid() const noexcept {
    return eigen_tol > 0.0 && eigen_tol <= rel_tol && rel_tol < 1.0;
  }

  double abs_tol(double spread) const { return rel_tol * spread; }

  bool coincident(double x, double y, double spread) const {
    return std::abs(x - y) <= rel_tol * spread;
  }
};

inline double spread_of(std::span<const double> xs) {
  double m = 1.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

inline double spread_of(const SpectralData& data) {
  double m = std::max(spread_of(data.sigma), spread_of(data.sigma_hat));
  return std::max(m, std::abs(data.K));
}

// ---------------------------------------------------------------------------
// validation

struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const noexcept { return issues.empty(); }

  std::string joined() const {
    std::string s;
    for (const auto& line : issues) {
      if (!s.empty()) s += "; ";
      s += line;
    }
    return s;
  }
};

inline ValidationReport validate_jacobi(const JacobiMatrix& J) {
  ValidationReport r;
  const std::size_t N = J.a.size();
  if (N == 0) r.issues.push_back("matrix is empty");
  if (J.b.size() + 1 != N && N > 0)
    r.issues.push_back("off-diagonal size must be N-1, got " + std::to_string(J.b.size()));
  for (std::size_t i = 0; i < J.a.size(); ++i)
    if (!std::isfinite(J.a[i]))
      r.issues.push_back("a[" + std::to_string(i) + "] is not finite");
  for (std::size_t i = 0; i < J.b.size(); ++i) {
    if (!std::isfinite(J.b[i]))
      r.issues.push_back("b[" + std::to_string(i) + "] is not finite");
    else if (J.b[i] >= 0.0)
      r.issues.push_back("b[" + std::to_string(i) + "] must be strictly negative, got " +
                         std::to_string(J.b[i]));
  }
  return r;
}

inline void require_valid(const JacobiMatrix& J) {
  const auto r = validate_jacobi(J);
  if (!r.ok()) throw InvalidInput("invalid Jacobi matrix: " + r.joined());
}

inline ValidationReport validate_spectrum(const Spectrum& s, double spread,
                                          const TolerancePolicy& tol, const char* name) {
  ValidationReport r;
  if (s.empty()) {
    r.issues.push_back(std::string(name) + " is empty");
    return r;
  }
  for (double x : s)
    if (!std::isfinite(x)) r.issues.push_back(std::string(name) + " has a non-finite entry");
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (s[i + 1] - s[i] <= tol.abs_tol(spread)) {
      r.issues.push_back(std::string(name) + " not strictly increasing at tolerance near index " +
                         std::to_string(i));
      break;
    }
  return r;
}

inline ValidationReport validate_spectral_data(const SpectralData& data,
                                               const TolerancePolicy& tol = {}) {
  ValidationReport r;
  if (!tol.valid()) {
    r.issues.push_back("tolerance policy violates 0 < eigen_tol <= rel_tol < 1");
    return r;
  }
  const double spread = spread_of(data);
  auto rs = validate_spectrum(data.sigma, spread, tol, "sigma");
  auto rh = validate_spectrum(data.sigma_hat, spread, tol, "sigma_hat");
  r.issues.insert(r.issues.end(), rs.issues.begin(), rs.issues.end());
  r.issues.insert(r.issues.end(), rh.issues.begin(), rh.issues.end());
  if (data.sigma.size() != data.sigma_hat.size())
    r.issues.push_back("sigma and sigma_hat must have equal size");
  if (!std::isfinite(data.K)) r.issues.push_back("K is not finite");
  if (!data.sigma.empty() && data.site >= data.sigma.size())
    r.issues.push_back("site out of range");
  if (data.theta_sq) {
    const double t = *data.theta_sq;
    if (!(t > 0.0) || !(t < 1.0))
      r.issues.push_back("theta_sq must lie strictly in (0,1), got " + std::to_string(t));
  }
  return r;
}

inline void require_valid(const SpectralData& data, const TolerancePolicy& tol = {}) {
  const auto r = validate_spectral_data(data, tol);
  if (!r.ok()) throw InvalidInput("invalid spectral data: " + r.joined());
}

}  // namespace chainspec
