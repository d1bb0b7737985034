#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abstei/error.hpp"
#include "abstei/panel.hpp"
#include "abstei/tobit.hpp"
#include "abstei/translog.hpp"

namespace abstei {

struct Elasticities {
  std::vector<double> inputs;  // d ln TEI / d ln x_j
  double output = 0.0;         // d ln TEI / d ln y
  double eps_dy = 0.0;         // -d ln D / d ln y
  double rts = std::numeric_limits<double>::quiet_NaN();
};

struct TechnicalChange {
  double dtc = 0.0;
  double etc = 0.0;
  double stc = 0.0;
  double tc = 0.0;
};

struct EfficiencyRecord {
  std::string firm_id;
  int year = 0;
  double fitted_ln_distance = 0.0;
  double tei = 1.0;
  bool clamped = false;
  std::vector<double> elasticity_inputs;
  double elasticity_output = 0.0;
  double eps_dy = 0.0;
  double rts = std::numeric_limits<double>::quiet_NaN();
};

struct TfpgRecord {
  std::string firm_id;
  int year = 0;
  double dtc = 0.0;
  double etc = 0.0;
  double stc = 0.0;
  double tc = 0.0;
  double eps_dy = 0.0;
  std::optional<double> se;
  std::optional<double> tfpg;
  std::optional<double> delta_ln_y;
  bool year_gap = false;  // predecessor is more than one year earlier
};

/// d ln D / d ln x_j at an observation.
inline double distance_input_derivative(const CoefficientSet& c, const TransformedObservation& o, int j) {
  double d = c.input(j) + c.input_output(j) * o.ln_output + c.trend_input(j) * o.trend;
  for (int k = 0; k < static_cast<int>(o.ln_inputs.size()); ++k) d += c.input_input(j, k) * o.ln_inputs[k];
  return d;
}

/// d ln D / d ln y at an observation.
inline double distance_output_derivative(const CoefficientSet& c, const TransformedObservation& o) {
  double d = c.output() + c.output_sq() * o.ln_output + c.trend_output() * o.trend;
  for (int j = 0; j < static_cast<int>(o.ln_inputs.size()); ++j) d += c.input_output(j) * o.ln_inputs[j];
  return d;
}

namespace detail {
inline Elasticities elasticities_unchecked(const CoefficientSet& c, const TransformedObservation& o) {
  if (o.ln_inputs.size() != c.index.n_inputs())
    throw Error(ErrorCode::DimensionMismatch, "observation input count does not match the coefficients");
  Elasticities e;
  for (int j = 0; j < static_cast<int>(o.ln_inputs.size()); ++j)
    e.inputs.push_back(-distance_input_derivative(c, o, j));
  e.eps_dy = -distance_output_derivative(c, o);
  e.output = e.eps_dy;
  if (std::abs(e.eps_dy) >= 1e-10) e.rts = 1.0 / e.eps_dy;
  return e;
}
}  // namespace detail

/// Elasticities of ln TEI and returns to scale. Throws DegenerateScale when eps_Dy ~ 0.
inline Elasticities elasticities(const CoefficientSet& c, const TransformedObservation& o) {
  auto e = detail::elasticities_unchecked(c, o);
  if (std::abs(e.eps_dy) < 1e-10)
    throw Error(ErrorCode::DegenerateScale, "output elasticity of distance is zero; returns to scale undefined");
  return e;
}

inline Elasticities elasticities(const FitResult& f, const TransformedObservation& o) {
  return elasticities(f.coefficients, o);
}

inline TechnicalChange technical_change(const CoefficientSet& c, const TransformedObservation& o) {
  TechnicalChange t;
  t.dtc = c.trend() + c.trend_sq() * o.trend;
  for (int j = 0; j < static_cast<int>(o.ln_inputs.size()); ++j) t.etc += c.trend_input(j) * o.ln_inputs[j];
  t.stc = c.trend_output() * o.ln_output;
  t.tc = t.dtc + t.etc + t.stc;
  return t;
}

inline TechnicalChange technical_change(const FitResult& f, const TransformedObservation& o) {
  return technical_change(f.coefficients, o);
}

/// TEI = exp(-fitted ln D). With `clamp`, indices above one are reported as one and flagged.
inline std::vector<EfficiencyRecord> compute_tei(const CoefficientSet& c, const DesignMatrix& design,
                                                 bool clamp = false) {
  const Vector mu = predict_linear(c, design);
  std::vector<EfficiencyRecord> out;
  out.reserve(design.rows.size());
  for (std::size_t i = 0; i < design.rows.size(); ++i) {
    const auto& o = design.rows[i];
    EfficiencyRecord r;
    r.firm_id = o.firm_id;
    r.year = o.year;
    r.fitted_ln_distance = mu[static_cast<Eigen::Index>(i)];
    r.tei = std::exp(-r.fitted_ln_distance);
    if (clamp && r.tei > 1.0) {
      r.tei = 1.0;
      r.clamped = true;
    }
    const auto e = detail::elasticities_unchecked(c, o);
    r.elasticity_inputs = e.inputs;
    r.elasticity_output = e.output;
    r.eps_dy = e.eps_dy;
    r.rts = e.rts;
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<EfficiencyRecord> compute_tei(const FitResult& f, const DesignMatrix& design, bool clamp = false) {
  return compute_tei(f.coefficients, design, clamp);
}

/// Per firm-year TC components and, where a previous year exists for the firm,
/// SE = (1 - eps_Dy) * (ln y_t - ln y_prev) with the current-period eps_Dy.
inline std::vector<TfpgRecord> tfpg_decompose(const CoefficientSet& c, const std::vector<TransformedObservation>& rows) {
  std::vector<TfpgRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& o = rows[i];
    const bool has_prev = i > 0 && rows[i - 1].firm_id == o.firm_id;
    if (i > 0 && (rows[i - 1].firm_id > o.firm_id || (has_prev && rows[i - 1].year >= o.year)))
      throw Error(ErrorCode::InvalidSpec, "observations must be sorted by (firm, year)");
    TfpgRecord r;
    r.firm_id = o.firm_id;
    r.year = o.year;
    const auto t = technical_change(c, o);
    r.dtc = t.dtc;
    r.etc = t.etc;
    r.stc = t.stc;
    r.tc = t.tc;
    r.eps_dy = -distance_output_derivative(c, o);
    if (has_prev) {
      const auto& p = rows[i - 1];
      r.delta_ln_y = o.ln_output - p.ln_output;
      r.se = (1.0 - r.eps_dy) * *r.delta_ln_y;
      r.tfpg = r.tc + *r.se;
      r.year_gap = o.year - p.year > 1;
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TfpgRecord> tfpg_decompose(const FitResult& f, const std::vector<TransformedObservation>& rows) {
  return tfpg_decompose(f.coefficients, rows);
}

// ---------------------------------------------------------------------------
// Summaries

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = a.size();
  if (n < 2 || b.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

struct EfficiencySummary {
  std::map<std::string, double> firm_mean_tei;
  // Elasticity averages two ways: over all observations, and mean of per-firm means.
  std::vector<double> input_elasticity_obs_mean;
  std::vector<double> input_elasticity_firm_mean;
  double output_elasticity_obs_mean = 0.0;
  double output_elasticity_firm_mean = 0.0;
};

inline EfficiencySummary summarize(const std::vector<EfficiencyRecord>& recs) {
  EfficiencySummary s;
  if (recs.empty()) return s;
  const std::size_t n_in = recs.front().elasticity_inputs.size();
  struct Acc {
    double tei = 0, out = 0;
    std::vector<double> in;
    int n = 0;
  };
  std::map<std::string, Acc> by_firm;
  s.input_elasticity_obs_mean.assign(n_in, 0.0);
  for (const auto& r : recs) {
    auto& a = by_firm[r.firm_id];
    if (a.in.empty()) a.in.assign(n_in, 0.0);
    a.tei += r.tei;
    a.out += r.elasticity_output;
    for (std::size_t j = 0; j < n_in; ++j) {
      a.in[j] += r.elasticity_inputs[j];
      s.input_elasticity_obs_mean[j] += r.elasticity_inputs[j];
    }
    s.output_elasticity_obs_mean += r.elasticity_output;
    ++a.n;
  }
  const double n = static_cast<double>(recs.size());
  for (auto& v : s.input_elasticity_obs_mean) v /= n;
  s.output_elasticity_obs_mean /= n;
  s.input_elasticity_firm_mean.assign(n_in, 0.0);
  for (const auto& [firm, a] : by_firm) {
    s.firm_mean_tei[firm] = a.tei / a.n;
    s.output_elasticity_firm_mean += a.out / a.n;
    for (std::size_t j = 0; j < n_in; ++j) s.input_elasticity_firm_mean[j] += a.in[j] / a.n;
  }
  const double nf = static_cast<double>(by_firm.size());
  for (auto& v : s.input_elasticity_firm_mean) v /= nf;
  s.output_elasticity_firm_mean /= nf;
  return s;
}

/// Per-firm correlation between the SE component and TFPG (years where both exist).
inline std::map<std::string, double> se_tfpg_correlation(const std::vector<TfpgRecord>& recs) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const auto& r : recs) {
    if (!r.se || !r.tfpg) continue;
    series[r.firm_id].first.push_back(*r.se);
    series[r.firm_id].second.push_back(*r.tfpg);
  }
  std::map<std::string, double> out;
  for (const auto& [firm, s] : series) out[firm] = pearson(s.first, s.second);
  return out;
}

}  // namespace abstei
