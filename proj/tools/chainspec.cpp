// Command-line front end. Subcommands cover the forward map, the data
// checker, the inverse solver, the chain/matrix conversions, and pointwise
// Green's function evaluation. All structured input and output is JSON;
// "-" reads from stdin. Exit codes: 0 success, 1 semantic failure
// (conditions fail, chain not realizable), 2 invalid input.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <chainspec/chainspec.hpp>
#include <chainspec/serialize.hpp>

namespace {

using chainspec::json;

json read_json(const std::string& path) {
  if (path == "-") return json::parse(std::cin);
  std::ifstream in(path);
  if (!in) throw chainspec::InvalidInput("cannot open " + path);
  return json::parse(in);
}

void write_json(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw chainspec::InvalidInput("cannot open " + out_path + " for writing");
  out << text;
}

chainspec::TolerancePolicy make_tol(double rel_tol) {
  chainspec::TolerancePolicy tol;
  tol.rel_tol = rel_tol;
  tol.eigen_tol = std::min(1e-12, 1e-3 * rel_tol);
  if (!tol.valid())
    throw chainspec::InvalidInput("tolerance must satisfy 0 < tol < 1");
  return tol;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral analysis of spring-mass chains with one perturbed site"};
  app.require_subcommand(1);

  std::string in_path, out_path;
  double rel_tol = 1e-9;
  std::size_t site = 0;
  double theta_sq = 0.5, K = 0.0, gamma0 = 0.0;
  std::vector<double> lambdas;
  int samples = 3;
  std::uint64_t seed = 0;
  std::string to_jacobi, to_system;

  auto* fwd = app.add_subcommand("forward", "spectra of a chain and of its perturbation");
  fwd->add_option("matrix", in_path, "Jacobi matrix JSON, - for stdin")->required();
  fwd->add_option("--site", site, "perturbed site")->required();
  fwd->add_option("--theta-sq", theta_sq, "mass ratio in (0,1)")->required();
  fwd->add_option("--K", K, "spring rate per unit added mass")->required();
  fwd->add_option("--tol", rel_tol, "relative tolerance");
  fwd->add_option("--out", out_path, "output file");

  auto* chk = app.add_subcommand("check", "test two-spectra data for admissibility");
  chk->add_option("data", in_path, "spectral data JSON, - for stdin")->required();
  chk->add_option("--tol", rel_tol, "relative tolerance");
  chk->add_option("--out", out_path, "output file");

  auto* inv = app.add_subcommand("invert", "reconstruct all chains from two-spectra data");
  inv->add_option("data", in_path, "spectral data JSON, - for stdin")->required();
  inv->add_option("--samples", samples, "samples per family");
  inv->add_option("--seed", seed, "sampling seed");
  inv->add_option("--tol", rel_tol, "relative tolerance");
  inv->add_option("--out", out_path, "output file");

  auto* cnv = app.add_subcommand("convert", "between mass-spring systems and matrices");
  auto* opt_tj = cnv->add_option("--to-jacobi", to_jacobi, "mass-spring system JSON");
  auto* opt_ts = cnv->add_option("--to-system", to_system, "Jacobi matrix JSON");
  opt_tj->excludes(opt_ts);
  opt_ts->excludes(opt_tj);
  cnv->add_option("--gamma0", gamma0, "left wall spring rate for --to-system");
  cnv->add_option("--tol", rel_tol, "relative tolerance");
  cnv->add_option("--out", out_path, "output file");

  auto* grn = app.add_subcommand("green", "Green's function at the perturbed site, three ways");
  grn->add_option("matrix", in_path, "Jacobi matrix JSON, - for stdin")->required();
  grn->add_option("--site", site, "perturbed site")->required();
  grn->add_option("--theta-sq", theta_sq, "mass ratio in (0,1)")->required();
  grn->add_option("--K", K, "spring rate per unit added mass")->required();
  grn->add_option("--lambda", lambdas, "evaluation points")->required()->expected(-1);
  grn->add_option("--tol", rel_tol, "relative tolerance");
  grn->add_option("--out", out_path, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto tol = make_tol(rel_tol);

    if (fwd->parsed()) {
      const chainspec::JacobiMatrix J = read_json(in_path).get<chainspec::JacobiMatrix>();
      const auto params = chainspec::perturbation_from(theta_sq, K, site);
      const auto Jt = chainspec::apply_perturbation(J, params);
      chainspec::SpectralData D;
      D.sigma = chainspec::eigenvalues(J, tol);
      D.sigma_hat = chainspec::eigenvalues(Jt, tol);
      D.K = K;
      D.site = site;
      D.theta_sq = theta_sq;
      // The output carries the full spectral-data object so it can be piped
      // straight into `check` or `invert`, plus the perturbed matrix and the
      // classification as extra keys.
      json out = D;
      out["J_tilde"] = Jt;
      out["classification"] = chainspec::classify(D, tol);
      write_json(out, out_path);
      return 0;
    }

    if (chk->parsed()) {
      const auto D = read_json(in_path).get<chainspec::SpectralData>();
      const auto report = chainspec::check_conditions(D, tol);
      write_json(json(report), out_path);
      return report.pass ? 0 : 1;
    }

    if (inv->parsed()) {
      const auto D = read_json(in_path).get<chainspec::SpectralData>();
      chainspec::SolveOptions opts;
      opts.samples = samples;
      opts.seed = seed;
      const auto result = chainspec::solve_inverse(D, opts, tol);
      write_json(json(result), out_path);
      return result.report.pass ? 0 : 1;
    }

    if (cnv->parsed()) {
      if (!to_jacobi.empty()) {
        const auto S = read_json(to_jacobi).get<chainspec::MassSpringSystem>();
        write_json(json(chainspec::system_to_jacobi(S)), out_path);
        return 0;
      }
      if (!to_system.empty()) {
        const auto J = read_json(to_system).get<chainspec::JacobiMatrix>();
        try {
          write_json(json(chainspec::jacobi_to_system(J, gamma0)), out_path);
        } catch (const chainspec::NotRealizable& e) {
          std::cerr << "not realizable: " << e.what() << "\n";
          return 1;
        }
        return 0;
      }
      std::cerr << "convert needs --to-jacobi or --to-system\n";
      return 2;
    }

    if (grn->parsed()) {
      const chainspec::JacobiMatrix J = read_json(in_path).get<chainspec::JacobiMatrix>();
      const auto params = chainspec::perturbation_from(theta_sq, K, site);
      const auto Jt = chainspec::apply_perturbation(J, params);
      const auto sigma = chainspec::eigenvalues(J, tol);
      const auto sigma_hat = chainspec::eigenvalues(Jt, tol);
      const auto ws = chainspec::eigenvector_weights(J, site, tol);
      json points = json::array();
      for (double lambda : lambdas) {
        const double g1 = chainspec::green_nn_poly(J, site, lambda, tol);
        const double g2 = chainspec::green_nn_spectral(ws, lambda, tol);
        const double g3 =
            chainspec::green_nn_two_spectra(sigma, sigma_hat, theta_sq, K, lambda, tol);
        const double scale = std::max({1.0, std::fabs(g1), std::fabs(g2), std::fabs(g3)});
        const double dev =
            std::max({std::fabs(g1 - g2), std::fabs(g1 - g3), std::fabs(g2 - g3)}) / scale;
        points.push_back(json{{"lambda", lambda},
                              {"poly", g1},
                              {"spectral", g2},
                              {"two_spectra", g3},
                              {"max_rel_dev", dev}});
      }
      write_json(json{{"points", points}}, out_path);
      return 0;
    }
  } catch (const json::exception& e) {
    std::cerr << "invalid JSON: " << e.what() << "\n";
    return 2;
  } catch (const chainspec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
