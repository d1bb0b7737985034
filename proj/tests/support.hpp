#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "abstei/abstei.hpp"

namespace abstei::fixtures {

/// Simulated panel plus its design under the generating spec.
struct Panel {
  SimDraw draw;
  std::vector<TransformedObservation> rows;
  ModelSpec spec;
  DesignMatrix design;
};

inline Panel make_panel(SimConfig cfg, std::optional<ModelSpec> fit_spec = std::nullopt) {
  Panel p;
  p.draw = generate(cfg);
  p.rows = transform(p.draw.data, p.draw.rules);
  p.spec = drop_empty_dummies(fit_spec ? *fit_spec : p.draw.spec, p.rows);
  p.design = build_design(p.rows, p.spec, p.draw.data.firms);
  return p;
}

inline SimConfig small_config(std::uint64_t seed = 11, double sigma = 0.05) {
  SimConfig c;
  c.n_firms = 6;
  c.n_years = 8;
  c.seed = seed;
  c.noise_sigma = sigma;
  return c;
}

/// Random coefficient vector moved onto the homogeneity restrictions.
inline Vector random_restricted_beta(const TermIndex& index, Rng& rng, double scale = 0.5) {
  Vector b(static_cast<Eigen::Index>(index.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-scale, scale);
  return project_onto(homogeneity_restrictions(index), b);
}

/// Random transformed observation with `n` inputs and `firms` firms.
inline TransformedObservation random_observation(Rng& rng, int n_inputs, int n_firms) {
  TransformedObservation o;
  o.firm_id = "F";
  o.year = 2015;
  o.ln_output = rng.uniform(-1.5, 1.5);
  for (int j = 0; j < n_inputs; ++j) o.ln_inputs.push_back(rng.uniform(-1.5, 1.5));
  o.trend = std::floor(rng.uniform(0.0, 10.0));
  o.firm_dummies.assign(static_cast<std::size_t>(std::max(0, n_firms - 1)), 0);
  const int f = static_cast<int>(rng.uniform(0.0, n_firms));
  if (f > 0 && f < n_firms) o.firm_dummies[static_cast<std::size_t>(f - 1)] = 1;
  o.brexit_dummy = rng.uniform() < 0.3;
  o.covid_dummy = rng.uniform() < 0.2;
  return o;
}

/// Fresh scratch directory below the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("abstei_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace abstei::fixtures
