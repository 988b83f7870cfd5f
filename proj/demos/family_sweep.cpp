// Sweeps the one-parameter solution family of the reference chain whose
// middle eigenvalue is unmovable: every t in (0,1) yields a different chain
// with the same two spectra. Prints the couplings against t.

#include <cstdio>

#include <chainspec/chainspec.hpp>

int main() {
  using namespace chainspec;

  const auto fix = fixtures::b();
  SpectralData D{fix.sigma, fix.sigma_hat, fix.params.K, fix.params.site, fix.params.theta_sq};

  const auto result = solve_inverse(D);
  if (result.families.size() != 1 || result.families[0].dimension != 1) {
    std::fprintf(stderr, "unexpected family structure\n");
    return 1;
  }
  const auto& fam = result.families[0];

  std::printf("%6s %12s %12s %14s\n", "t", "b0", "b1", "b0^2+b1^2");
  for (int i = 1; i <= 9; ++i) {
    const double t = i / 10.0;
    const auto pair = fam.sampler({t});
    const double b0 = pair.J.b[0], b1 = pair.J.b[1];
    std::printf("%6.2f %12.8f %12.8f %14.10f\n", t, b0, b1, b0 * b0 + b1 * b1);
  }
  return 0;
}
