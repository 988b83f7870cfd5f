// Forward map, condition check, and reconstruction of one reference chain,
// printed step by step.

#include <cstdio>

#include <chainspec/chainspec.hpp>

int main() {
  using namespace chainspec;

  const auto fix = fixtures::b();
  const JacobiMatrix J = fix.J;
  const PerturbationParams p = fix.params;

  const Spectrum sigma = eigenvalues(J);
  const Spectrum sigma_hat = eigenvalues(apply_perturbation(J, p));

  std::printf("chain of %zu masses, perturbed at site %zu\n", J.size(), p.site);
  std::printf("sigma     :");
  for (double x : sigma) std::printf(" %.12g", x);
  std::printf("\nsigma_hat :");
  for (double x : sigma_hat) std::printf(" %.12g", x);
  std::printf("\n");

  SpectralData D{sigma, sigma_hat, p.K, p.site, p.theta_sq};
  const auto report = check_conditions(D);
  std::printf("conditions: %s\n", report.pass ? "pass" : report.first_failed.c_str());

  const auto result = solve_inverse(D);
  std::printf("families  : %zu\n", result.families.size());
  for (const auto& fam : result.families) {
    std::printf("  dimension %zu, %s, %zu sample(s)\n", fam.dimension,
                fam.count_formula.c_str(), fam.samples.size());
    const auto& s = fam.samples.front();
    std::printf("  sample a :");
    for (double x : s.J.a) std::printf(" %.12g", x);
    std::printf("\n  sample b :");
    for (double x : s.J.b) std::printf(" %.12g", x);
    std::printf("   (residual %.3g)\n", s.spectral_residual);
  }
  return 0;
}
