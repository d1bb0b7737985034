#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "abstei/efficiency.hpp"
#include "abstei/error.hpp"
#include "abstei/panel.hpp"
#include "abstei/reference.hpp"
#include "abstei/tobit.hpp"
#include "abstei/translog.hpp"

namespace abstei {

// ---------------------------------------------------------------------------
// Portable random numbers: mt19937_64 (fully specified by the standard) with
// explicit transforms, so draws do not depend on the library's distributions.

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of replication `rep`: seed XOR splitmix64(rep + 1).
inline std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t rep) { return seed ^ splitmix64(rep + 1); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by the Box-Muller transform (one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------

struct SimConfig {
  int n_firms = 19;
  int n_years = 10;
  int start_year = 2012;
  ModelSpec spec;  // terms of the data-generating model
  /// Truth on TermIndex::build(spec, firm_ids(n_firms)); empty selects the airline reference values.
  std::optional<CoefficientSet> true_coefficients;
  double noise_sigma = 0.05;
  /// Optional variance equation exp(Z alpha) over the default heteroskedasticity terms; overrides noise_sigma.
  std::optional<Vector> noise_alpha;
  /// Sampling intervals (levels) of each input and of the output; values are log-uniform inside.
  std::vector<std::pair<double, double>> input_ranges{{800.0, 3000.0}, {30000.0, 110000.0}, {1000.0, 3800.0}};
  std::pair<double, double> output_range{9000.0, 35000.0};
  std::uint64_t seed = 20240501;
  /// When set, the constant is shifted so that this fraction of observations is censored.
  std::optional<double> censor_target;
  int n_european = 5;     // firms F01..F0k carry the Brexit dummy
  int brexit_offset = 5;  // first Brexit year = start_year + offset
  int brexit_length = 3;
  int covid_length = 2;   // last years of the panel
};

inline std::vector<std::string> firm_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 1; i <= n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "F%02d", i);
    ids.emplace_back(buf);
  }
  return ids;
}

inline DummyRules sim_dummy_rules(const SimConfig& cfg) {
  std::set<std::string> european;
  const auto ids = firm_ids(cfg.n_firms);
  for (int i = 0; i < std::min(cfg.n_european, cfg.n_firms); ++i) european.insert(ids[static_cast<std::size_t>(i)]);
  const int b0 = cfg.start_year + cfg.brexit_offset;
  const int last = cfg.start_year + cfg.n_years - 1;
  return make_period_rules(std::move(european), b0, b0 + cfg.brexit_length - 1, last - cfg.covid_length + 1, last);
}

/// Spec with event dummies removed when the simulated calendar never switches them on.
inline ModelSpec sim_model_spec(const SimConfig& cfg) {
  ModelSpec s = cfg.spec;
  const int b0 = cfg.start_year + cfg.brexit_offset;
  const int last = cfg.start_year + cfg.n_years - 1;
  if (cfg.n_european <= 0 || cfg.brexit_length <= 0 || b0 > last) s.include_brexit = false;
  if (cfg.covid_length <= 0) s.include_covid = false;
  if (cfg.n_years <= cfg.covid_length) s.include_covid = false;
  return s;
}

inline TermIndex sim_term_index(const SimConfig& cfg) {
  return TermIndex::build(sim_model_spec(cfg), firm_ids(cfg.n_firms));
}

struct SimDraw {
  PanelDataset data;
  Vector true_ln_distance;  // translog value without noise
  Vector latent;            // with noise; censored where <= 0
  Vector true_tei;          // exp(-true_ln_distance)
  CoefficientSet truth;     // constant includes any censoring calibration shift
  DummyRules rules;
  ModelSpec spec;
};

/// Reference values with every second-order output/input term removed (a Cobb-Douglas
/// technology with neutral technical change), projected back onto homogeneity.
inline CoefficientSet cobb_douglas_truth(const TermIndex& index) {
  auto c = airline_reference_coefficients(index, false);
  const int n = static_cast<int>(index.n_inputs());
  auto zero = [&](std::size_t p) { c.beta[static_cast<Eigen::Index>(p)] = 0.0; };
  for (int j = 0; j < n; ++j) {
    zero(index.input_output(j));
    for (int k = j; k < n; ++k) zero(index.input_input(j, k));
  }
  zero(index.output_sq());
  zero(index.trend_output());
  if (auto p = index.trend_sq()) zero(*p);
  c.beta = project_onto(homogeneity_restrictions(index), c.beta);
  return c;
}

inline SimDraw generate(const SimConfig& cfg) {
  if (cfg.n_firms < 1 || cfg.n_years < 1) throw Error(ErrorCode::InvalidConfig, "need at least one firm and year");
  const ModelSpec spec = sim_model_spec(cfg);
  const auto ids = firm_ids(cfg.n_firms);
  const TermIndex index = TermIndex::build(spec, ids);
  if (cfg.input_ranges.size() != spec.input_names.size())
    throw Error(ErrorCode::InvalidConfig, "one sampling range per input is required");

  SimDraw out;
  out.spec = spec;
  out.rules = sim_dummy_rules(cfg);
  out.truth = cfg.true_coefficients ? *cfg.true_coefficients : airline_reference_coefficients(index);
  if (!(out.truth.index == index))
    throw Error(ErrorCode::InvalidTruth, "true coefficients do not match the simulated model terms");
  if (spec.impose_homogeneity && homogeneity_restrictions(index).residual(out.truth.beta) > 1e-10)
    throw Error(ErrorCode::InvalidTruth, "true coefficients violate linear homogeneity");
  if (cfg.censor_target && (*cfg.censor_target < 0.0 || *cfg.censor_target >= 1.0))
    throw Error(ErrorCode::InvalidConfig, "censor_target must lie in [0, 1)");

  Rng rng(cfg.seed);
  std::vector<PanelObservation> rows;
  for (const auto& id : ids) {
    for (int t = 0; t < cfg.n_years; ++t) {
      PanelObservation o;
      o.firm_id = id;
      o.year = cfg.start_year + t;
      for (const auto& [lo, hi] : cfg.input_ranges) o.inputs.push_back(std::exp(rng.uniform(std::log(lo), std::log(hi))));
      o.output = std::exp(rng.uniform(std::log(cfg.output_range.first), std::log(cfg.output_range.second)));
      rows.push_back(std::move(o));
    }
  }
  PanelDataset ds = finalize_dataset(rows, "y", spec.input_names);
  const auto transformed = transform(ds, out.rules);
  const auto n = static_cast<Eigen::Index>(transformed.size());

  Vector mu(n);
  Matrix Z;
  if (cfg.noise_alpha) {
    ModelSpec het = spec;
    het.heteroskedastic = true;
    het.het_regressors.clear();
    Z = build_design(transformed, het, ids).Z;
    if (Z.cols() != cfg.noise_alpha->size())
      throw Error(ErrorCode::InvalidConfig, "noise_alpha length does not match the variance terms");
  }
  for (Eigen::Index i = 0; i < n; ++i) mu[i] = ln_distance(out.truth.beta, transformed[static_cast<std::size_t>(i)], index);
  Vector noise(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sd = cfg.noise_alpha ? std::exp(0.5 * Z.row(i).dot(*cfg.noise_alpha)) : cfg.noise_sigma;
    noise[i] = sd * rng.normal();
  }

  if (cfg.censor_target) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = mu[i] + noise[i];
    std::sort(s.begin(), s.end());
    const auto k = static_cast<std::size_t>(std::lround(*cfg.censor_target * static_cast<double>(n)));
    double shift = 0.0;
    if (k == 0)
      shift = s.front() > 0.0 ? 0.0 : -s.front() + 1e-6;
    else
      shift = -0.5 * (s[k - 1] + s[k]);
    mu.array() += shift;
    out.truth.beta[static_cast<Eigen::Index>(index.constant())] += shift;
  }

  out.true_ln_distance = mu;
  out.latent = mu + noise;
  out.true_tei = (-mu.array()).exp().matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& o = ds.observations[static_cast<std::size_t>(i)];
    o.load_factor = out.latent[i] <= 0.0 ? 1.0 : std::exp(-out.latent[i]);
  }
  out.data = finalize_dataset(std::move(ds.observations), "y", spec.input_names);
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo recovery harness.

struct CoefficientRecovery {
  std::string name;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = std::numeric_limits<double>::quiet_NaN();  // share of 95% intervals containing the truth
};

struct MonteCarloReport {
  int reps = 0;
  int failed = 0;          // generate/fit threw
  int not_converged = 0;
  int without_vcov = 0;
  std::vector<CoefficientRecovery> coefficients;
  std::vector<std::string> first_order;
  double median_abs_bias_first_order = std::numeric_limits<double>::quiet_NaN();
  double coverage_first_order = std::numeric_limits<double>::quiet_NaN();
  double mean_tei_correlation = std::numeric_limits<double>::quiet_NaN();
  double min_tei_correlation = std::numeric_limits<double>::quiet_NaN();
  double mean_censored_share = 0.0;
};

struct McReplication {
  bool ok = false;
  bool converged = false;
  bool vcov = false;
  Vector error;    // beta_hat - truth
  Vector covered;  // 1 / 0, NaN when no std error
  double tei_corr = std::numeric_limits<double>::quiet_NaN();
  double censored_share = 0.0;
};

inline McReplication run_replication(const SimConfig& cfg, const ModelSpec& fit_spec, const OptimOptions& opts,
                                     std::uint64_t rep) {
  McReplication r;
  try {
    SimConfig c = cfg;
    c.seed = replication_seed(cfg.seed, rep);
    const SimDraw draw = generate(c);
    const auto rows = transform(draw.data, draw.rules);
    ModelSpec spec = fit_spec;
    spec.include_brexit = spec.include_brexit && draw.spec.include_brexit;
    spec.include_covid = spec.include_covid && draw.spec.include_covid;
    spec = drop_empty_dummies(spec, rows);
    const DesignMatrix design = build_design(rows, spec, draw.data.firms);
    if (!(design.index == draw.truth.index))
      throw Error(ErrorCode::InvalidConfig, "fitted model terms differ from the simulated truth");
    const FitResult f = fit(design, spec, opts);
    r.converged = f.converged;
    r.vcov = f.vcov_available;
    r.error = f.coefficients.beta - draw.truth.beta;
    r.covered = Vector::Constant(r.error.size(), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 0; i < r.error.size(); ++i)
      if (std::isfinite(f.std_errors[i]) && f.std_errors[i] > 0.0)
        r.covered[i] = std::abs(r.error[i]) <= 1.959963984540054 * f.std_errors[i] ? 1.0 : 0.0;
    const Vector mu = predict_linear(f, design);
    std::vector<double> est(static_cast<std::size_t>(mu.size())), truth(est.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      est[static_cast<std::size_t>(i)] = std::exp(-mu[i]);
      truth[static_cast<std::size_t>(i)] = draw.true_tei[i];
    }
    r.tei_corr = pearson(truth, est);
    r.censored_share = static_cast<double>(design.n_censored()) / static_cast<double>(design.n_obs());
    r.ok = true;
  } catch (const std::exception&) {
    r.ok = false;
  }
  return r;
}

/// Runs `reps` generate-then-fit replications. Replication r uses
/// replication_seed(cfg.seed, r); results are reduced in replication order,
/// so the report does not depend on `threads`.
inline MonteCarloReport monte_carlo(const SimConfig& cfg, int reps, std::optional<ModelSpec> fit_spec = std::nullopt,
                                    const OptimOptions& opts = {}, unsigned threads = 0) {
  if (reps < 1) throw Error(ErrorCode::InvalidConfig, "reps must be >= 1");
  const ModelSpec spec = fit_spec ? *fit_spec : cfg.spec;
  const TermIndex index = sim_term_index(cfg);

  std::vector<McReplication> results(static_cast<std::size_t>(reps));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < reps; i = next++)
      results[static_cast<std::size_t>(i)] = run_replication(cfg, spec, opts, static_cast<std::uint64_t>(i));
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  MonteCarloReport rep;
  rep.reps = reps;
  const auto p = static_cast<Eigen::Index>(index.size());
  Vector sum = Vector::Zero(p), sumsq = Vector::Zero(p), cov_hits = Vector::Zero(p), cov_n = Vector::Zero(p);
  double corr_sum = 0.0, corr_min = std::numeric_limits<double>::infinity(), cens = 0.0;
  int ok = 0, corr_n = 0;
  for (const auto& r : results) {
    if (!r.ok || r.error.size() != p) {
      ++rep.failed;
      continue;
    }
    ++ok;
    if (!r.converged) ++rep.not_converged;
    if (!r.vcov) ++rep.without_vcov;
    sum += r.error;
    sumsq += r.error.cwiseProduct(r.error);
    for (Eigen::Index i = 0; i < p; ++i)
      if (std::isfinite(r.covered[i])) {
        cov_hits[i] += r.covered[i];
        cov_n[i] += 1.0;
      }
    if (std::isfinite(r.tei_corr)) {
      corr_sum += r.tei_corr;
      corr_min = std::min(corr_min, r.tei_corr);
      ++corr_n;
    }
    cens += r.censored_share;
  }
  if (ok == 0) return rep;

  for (Eigen::Index i = 0; i < p; ++i) {
    CoefficientRecovery c;
    c.name = index.name(static_cast<std::size_t>(i));
    c.bias = sum[i] / ok;
    c.rmse = std::sqrt(sumsq[i] / ok);
    if (cov_n[i] > 0) c.coverage = cov_hits[i] / cov_n[i];
    rep.coefficients.push_back(c);
  }
  rep.first_order.push_back(index.name(index.output()));
  for (std::size_t j = 0; j < index.n_inputs(); ++j) rep.first_order.push_back(index.name(index.input(static_cast<int>(j))));
  rep.first_order.push_back(index.name(index.trend()));

  std::vector<double> abs_bias;
  double hits = 0.0, trials = 0.0;
  for (const auto& name : rep.first_order) {
    const auto i = static_cast<Eigen::Index>(index.position(name));
    abs_bias.push_back(std::abs(sum[i] / ok));
    hits += cov_hits[i];
    trials += cov_n[i];
  }
  std::sort(abs_bias.begin(), abs_bias.end());
  const std::size_t m = abs_bias.size();
  rep.median_abs_bias_first_order = m % 2 ? abs_bias[m / 2] : 0.5 * (abs_bias[m / 2 - 1] + abs_bias[m / 2]);
  if (trials > 0) rep.coverage_first_order = hits / trials;
  if (corr_n > 0) {
    rep.mean_tei_correlation = corr_sum / corr_n;
    rep.min_tei_correlation = corr_min;
  }
  rep.mean_censored_share = cens / ok;
  return rep;
}

}  // namespace abstei
