#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>

#include "conditions.hpp"
#include "core.hpp"
#include "eigen.hpp"
#include "inverse.hpp"
#include "massspring.hpp"

// Wire formats. Doubles go through the library default shortest round-trip
// encoding, so a value survives serialize/parse bit for bit. Optional
// theta_sq is encoded as null when absent.

namespace chainspec {

using nlohmann::json;

inline void to_json(json& j, const JacobiMatrix& J) {
  j = json{{"n", J.size()}, {"a", J.a}, {"b", J.b}};
}

inline void from_json(const json& j, JacobiMatrix& J) {
  j.at("a").get_to(J.a);
  j.at("b").get_to(J.b);
  if (j.contains("n") && j.at("n").get<std::size_t>() != J.a.size())
    throw InvalidInput("matrix field n disagrees with the diagonal length");
}

inline void to_json(json& j, const SpectralData& d) {
  j = json{{"sigma", d.sigma}, {"sigma_hat", d.sigma_hat}, {"K", d.K}, {"n", d.site}};
  if (d.theta_sq)
    j["theta_sq"] = *d.theta_sq;
  else
    j["theta_sq"] = nullptr;
}

inline void from_json(const json& j, SpectralData& d) {
  j.at("sigma").get_to(d.sigma);
  j.at("sigma_hat").get_to(d.sigma_hat);
  j.at("K").get_to(d.K);
  j.at("n").get_to(d.site);
  d.theta_sq.reset();
  if (j.contains("theta_sq") && !j.at("theta_sq").is_null())
    d.theta_sq = j.at("theta_sq").get<double>();
}

inline void to_json(json& j, const MassSpringSystem& s) {
  j = json{{"masses", s.masses}, {"gammas", s.gammas}};
}

inline void from_json(const json& j, MassSpringSystem& s) {
  j.at("masses").get_to(s.masses);
  j.at("gammas").get_to(s.gammas);
}

inline void to_json(json& j, const WeightedSpectrum& w) {
  j = json{{"values", w.values}, {"weights", w.weights}, {"n", w.site}};
}

inline void to_json(json& j, const PoleResidueForm& f) {
  j = json{{"poles", f.poles}, {"residues", f.residues}};
}

inline void to_json(json& j, const DataClassification& c) {
  j = json{{"size", c.size},       {"n", c.site}, {"p", c.p},
           {"mu", c.mu},           {"q", c.q},    {"n_tilde", c.n_tilde},
           {"k_case", to_string(c.k_case)}};
  if (c.theta_sq)
    j["theta_sq"] = *c.theta_sq;
  else
    j["theta_sq"] = nullptr;
  if (c.theta_sq_range)
    j["theta_sq_range"] = json{c.theta_sq_range->first, c.theta_sq_range->second};
}

inline void to_json(json& j, const InterlacingInterval& iv) {
  j = json{{"lo", iv.lo},
           {"hi", iv.hi},
           {"lo_closed", iv.lo_closed},
           {"hi_closed", iv.hi_closed},
           {"count", iv.count}};
}

inline void to_json(json& j, const InterlacingReport& r) {
  j = json{{"pass", r.pass}, {"p", r.p}, {"intervals", r.intervals},
           {"unassigned", r.unassigned}};
}

inline void to_json(json& j, const ConditionResult& c) {
  j = json{{"applicable", c.applicable}, {"pass", c.pass}, {"detail", c.detail}};
}

inline void to_json(json& j, const ConditionsReport& r) {
  j = json{{"pass", r.pass},
           {"first_failed", r.first_failed},
           {"conditions", json{{"I", r.I}, {"II", r.II}, {"III", r.III}, {"IV", r.IV}}},
           {"interlacing", r.interlacing}};
  if (r.classification)
    j["classification"] = *r.classification;
  else
    j["classification"] = nullptr;
}

inline void to_json(json& j, const GHatExpansion& e) {
  j = json{{"ghat", e.ghat},
           {"zeros", e.zeros},
           {"rec_a", e.rec_a},
           {"rec_residues", e.rec_residues},
           {"common", e.common}};
}

// Families are serialized with assignments resolved to zero values, which is
// what a consumer of the inverse report wants to see.
inline json families_to_json(const InverseResult& r) {
  json fams = json::array();
  for (const auto& f : r.families) {
    const auto resolve = [&r](const std::vector<std::size_t>& idx) {
      std::vector<double> v;
      for (std::size_t l : idx) v.push_back(r.expansion->zeros[l]);
      return v;
    };
    json samples = json::array();
    for (const auto& s : f.samples)
      samples.push_back(json{{"t", s.t},
                             {"J", s.J},
                             {"J_tilde", s.J_tilde},
                             {"spectral_residual", s.spectral_residual}});
    fams.push_back(json{{"assignment", json{{"minus", resolve(f.assignment.minus_only)},
                                            {"plus", resolve(f.assignment.plus_only)},
                                            {"common", resolve(f.assignment.common)}}},
                        {"dimension", f.dimension},
                        {"count_formula", f.count_formula},
                        {"samples", samples}});
  }
  return fams;
}

inline void to_json(json& j, const InverseResult& r) {
  j = json{{"report", r.report}, {"families", families_to_json(r)}};
}

}  // namespace chainspec
