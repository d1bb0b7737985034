#pragma once

#include <array>
#include <map>
#include <string>

#include "abstei/tobit.hpp"
#include "abstei/translog.hpp"

namespace abstei {

/// Frozen maximum-likelihood estimates for the 19-carrier airline panel
/// (inputs K, L, E; no squared trend). Keys are TermIndex names.
inline const std::map<std::string, double>& airline_reference_values() {
  static const std::map<std::string, double> values = {
      {"Constant", 0.297336},      {"Ln y", -0.593745},          {"Ln K", 0.204451},
      {"Ln L", 0.685113},          {"Ln E", 0.110436},           {".5 (Ln y)^2", 0.052062},
      {"ln K ln y", 0.039240},     {"ln L ln y", 0.217154},      {"ln E ln y", -0.256393},
      {".5 (ln K)^2", 0.231760},   {"ln K ln L", 0.247746},      {"ln K ln E", -0.479506},
      {".5 (ln L)^2", -0.242152},  {"ln L ln E", -0.005594},     {".5 (ln E)^2", 0.485100},
      {"t", -0.032827},            {"t ln y", 0.007825},         {"t ln K", -0.002760},
      {"t ln L", -0.012648},       {"t ln E", 0.015408},         {"Brexit", -0.042064},
      {"Covid", 0.134461},
  };
  return values;
}

/// Firm effects z1..z18 of the same estimates.
inline const std::array<double, 18>& airline_reference_firm_effects() {
  static const std::array<double, 18> z = {0.561021,  0.565005,  -0.184319, -0.113492, 0.683347,  -0.173345,
                                           -0.172615, -0.251890, 0.066778,  0.649484,  0.152897,  0.070368,
                                           -0.180902, 0.402020,  0.492576,  0.400680,  0.197729,  0.300541};
  return z;
}

/// The reference estimates laid onto `index` (three inputs named K, L, E).
/// Firm effects cycle when the index has more than 18 dummies; terms the
/// index lacks are ignored and terms it adds (e.g. squared trend) stay zero.
/// With `project`, the result is moved onto the homogeneity restrictions
/// (the frozen values satisfy them only to rounding).
inline CoefficientSet airline_reference_coefficients(const TermIndex& index, bool project = true) {
  auto c = CoefficientSet::zeros(index);
  for (const auto& [name, v] : airline_reference_values())
    if (auto p = index.find(name)) c.beta[static_cast<Eigen::Index>(*p)] = v;
  const auto& z = airline_reference_firm_effects();
  for (int i = 0;; ++i) {
    auto p = index.firm(i);
    if (!p) break;
    c.beta[static_cast<Eigen::Index>(*p)] = z[static_cast<std::size_t>(i) % z.size()];
  }
  if (project) c.beta = project_onto(homogeneity_restrictions(index), c.beta);
  return c;
}

}  // namespace abstei
