#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "abstei/efficiency.hpp"
#include "abstei/error.hpp"
#include "abstei/inference.hpp"
#include "abstei/panel.hpp"
#include "abstei/simulate.hpp"
#include "abstei/tobit.hpp"

namespace abstei {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

namespace detail {
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }
}  // namespace detail

// ---------------------------------------------------------------------------
// fit.json

/// Document layout:
///   schema, model{inputs, trend_squared, firm_dummies, brexit, covid, heteroskedastic,
///   homogeneity, reference_firm, dummy_firms{z1: id, ...}, het_terms}, n_obs, n_censored,
///   coefficients[{name, estimate, std_error, z, p_value}], variance_equation[{name, estimate, std_error}],
///   loglik, convergence{converged, iterations, gradient_norm, vcov_available, degenerate, message},
///   restrictions[{label, weights{name: w}, rhs}]
/// Non-finite numbers are written as null.
inline Json fit_to_json(const FitResult& fit, const ModelSpec& spec) {
  const auto& ix = fit.coefficients.index;
  Json model;
  model["inputs"] = ix.input_names();
  model["trend_squared"] = spec.include_trend_squared;
  model["firm_dummies"] = spec.include_firm_dummies;
  model["brexit"] = spec.include_brexit;
  model["covid"] = spec.include_covid;
  model["heteroskedastic"] = spec.heteroskedastic;
  model["homogeneity"] = spec.impose_homogeneity;
  model["reference_firm"] = ix.reference_firm();
  Json dummies = Json::object();
  for (std::size_t i = 0; i < ix.dummy_firms().size(); ++i) dummies["z" + std::to_string(i + 1)] = ix.dummy_firms()[i];
  model["dummy_firms"] = dummies;
  model["het_terms"] = fit.coefficients.het_names;

  Json coefs = Json::array();
  for (std::size_t i = 0; i < ix.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    coefs.push_back({{"name", ix.name(i)},
                     {"estimate", detail::num(fit.coefficients.beta[k])},
                     {"std_error", detail::num(fit.std_errors.size() > k ? fit.std_errors[k] : NAN)},
                     {"z", detail::num(fit.z_stats.size() > k ? fit.z_stats[k] : NAN)},
                     {"p_value", detail::num(fit.p_values.size() > k ? fit.p_values[k] : NAN)}});
  }
  Json het = Json::array();
  const auto q = fit.theta.size();
  for (std::size_t i = 0; i < fit.coefficients.het_names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    double se = NAN;
    if (fit.vcov_available) se = std::sqrt(std::max(0.0, fit.free_vcov(q + k, q + k)));
    het.push_back({{"name", fit.coefficients.het_names[i]},
                   {"estimate", detail::num(fit.coefficients.alpha[k])},
                   {"std_error", detail::num(se)}});
  }
  Json restr = Json::array();
  for (Eigen::Index r = 0; r < fit.restrictions.R.rows(); ++r) {
    Json w = Json::object();
    for (Eigen::Index c = 0; c < fit.restrictions.R.cols(); ++c)
      if (fit.restrictions.R(r, c) != 0.0) w[ix.name(static_cast<std::size_t>(c))] = fit.restrictions.R(r, c);
    restr.push_back({{"label", fit.restrictions.labels.at(static_cast<std::size_t>(r))},
                     {"weights", w},
                     {"rhs", fit.restrictions.r[r]}});
  }
  Json doc;
  doc["schema"] = "abstei.fit/1";
  doc["model"] = model;
  doc["n_obs"] = fit.n_obs;
  doc["n_censored"] = fit.n_censored;
  doc["coefficients"] = coefs;
  doc["variance_equation"] = het;
  doc["loglik"] = detail::num(fit.loglik);
  doc["convergence"] = {{"converged", fit.converged},
                        {"iterations", fit.iterations},
                        {"gradient_norm", detail::num(fit.gradient_norm)},
                        {"vcov_available", fit.vcov_available},
                        {"degenerate", fit.degenerate},
                        {"message", fit.message}};
  doc["restrictions"] = restr;
  return doc;
}

/// Coefficients of a fit.json laid onto `index`; names must match one to one.
inline CoefficientSet coefficients_from_json(const Json& doc, const TermIndex& index) {
  if (!doc.contains("coefficients") || !doc["coefficients"].is_array())
    throw Error(ErrorCode::InvalidConfig, "fit document has no coefficient array");
  const auto& arr = doc["coefficients"];
  if (arr.size() != index.size())
    throw Error(ErrorCode::DimensionMismatch, "fit document has " + std::to_string(arr.size()) +
                                                  " coefficients, the data's model has " +
                                                  std::to_string(index.size()));
  auto c = CoefficientSet::zeros(index);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string name = arr[i].at("name").get<std::string>();
    if (name != index.name(i))
      throw Error(ErrorCode::DimensionMismatch, "fit coefficient '" + name + "' does not match model term '" +
                                                    index.name(i) + "'");
    const auto& est = arr[i].at("estimate");
    if (!est.is_number()) throw Error(ErrorCode::InvalidConfig, "fit coefficient '" + name + "' is not a number");
    c.beta[static_cast<Eigen::Index>(i)] = est.get<double>();
  }
  if (doc.contains("model") && doc["model"].contains("dummy_firms")) {
    for (std::size_t i = 0; i < index.dummy_firms().size(); ++i) {
      const auto key = "z" + std::to_string(i + 1);
      const auto& m = doc["model"]["dummy_firms"];
      if (!m.contains(key) || m[key].get<std::string>() != index.dummy_firms()[i])
        throw Error(ErrorCode::DimensionMismatch, "firm dummy " + key + " refers to a different firm in the fit");
    }
  }
  return c;
}

/// Model toggles recorded in a fit.json.
inline ModelSpec spec_from_json(const Json& doc, ModelSpec base) {
  const auto& m = doc.at("model");
  base.input_names = m.at("inputs").get<std::vector<std::string>>();
  base.include_trend_squared = m.at("trend_squared").get<bool>();
  base.include_firm_dummies = m.at("firm_dummies").get<bool>();
  base.include_brexit = m.at("brexit").get<bool>();
  base.include_covid = m.at("covid").get<bool>();
  base.heteroskedastic = m.at("heteroskedastic").get<bool>();
  base.impose_homogeneity = m.at("homogeneity").get<bool>();
  return base;
}

inline Json tests_to_json(const std::vector<SpecificationTest>& tests) {
  Json arr = Json::array();
  for (const auto& t : tests) {
    arr.push_back({{"null_hypothesis", t.result.name},
                   {"key", hypothesis_key(t.hypothesis)},
                   {"statistic", t.result.stat},
                   {"df", t.result.df},
                   {"p_value", t.result.p_value},
                   {"decision", t.result.reject ? "Reject" : "Fail to reject"},
                   {"loglik_unrestricted", detail::num(t.result.loglik_unrestricted)},
                   {"loglik_restricted", detail::num(t.result.loglik_restricted)},
                   {"clamped", t.result.clamped},
                   {"restricted_converged", t.restricted_fit.converged},
                   {"implied_rows", t.implied_rows}});
  }
  Json doc;
  doc["schema"] = "abstei.tests/1";
  doc["specification_tests"] = arr;
  return doc;
}

inline Json monte_carlo_json(const MonteCarloReport& r) {
  Json coefs = Json::array();
  for (const auto& c : r.coefficients)
    coefs.push_back({{"name", c.name}, {"bias", c.bias}, {"rmse", c.rmse}, {"coverage", detail::num(c.coverage)}});
  return {{"schema", "abstei.monte_carlo/1"},
          {"reps", r.reps},
          {"failed", r.failed},
          {"not_converged", r.not_converged},
          {"without_vcov", r.without_vcov},
          {"first_order", r.first_order},
          {"median_abs_bias_first_order", detail::num(r.median_abs_bias_first_order)},
          {"coverage_first_order", detail::num(r.coverage_first_order)},
          {"mean_tei_correlation", detail::num(r.mean_tei_correlation)},
          {"min_tei_correlation", detail::num(r.min_tei_correlation)},
          {"mean_censored_share", r.mean_censored_share},
          {"coefficients", coefs}};
}

// ---------------------------------------------------------------------------
// Text tables

inline std::string format_p(double p) {
  if (!std::isfinite(p)) return "-";
  if (p < 1e-4) return "<.0001";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", p);
  return buf;
}

inline std::string coefficient_table(const FitResult& fit) {
  std::ostringstream os;
  const auto& ix = fit.coefficients.index;
  os << std::left << std::setw(16) << "Parameter" << std::right << std::setw(14) << "Coefficient" << std::setw(12)
     << "Std.Err." << std::setw(10) << "P-Value" << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ix.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    os << std::left << std::setw(16) << ix.name(i) << std::right;
    std::snprintf(buf, sizeof(buf), "%14.6f", fit.coefficients.beta[k]);
    os << buf;
    const double se = fit.std_errors.size() > k ? fit.std_errors[k] : NAN;
    if (std::isfinite(se)) {
      std::snprintf(buf, sizeof(buf), "%12.6f", se);
      os << buf;
    } else {
      os << std::setw(12) << "-";
    }
    os << std::setw(10) << format_p(fit.p_values.size() > k ? fit.p_values[k] : NAN) << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%.6f", fit.loglik);
  os << "Log-likelihood: " << buf << "   Observations: " << fit.n_obs << " (" << fit.n_censored << " censored)\n";
  os << "Convergence: " << fit.message << '\n';
  return os.str();
}

inline std::string tests_table(const std::vector<SpecificationTest>& tests) {
  std::ostringstream os;
  os << std::left << std::setw(40) << "Null hypothesis" << std::right << std::setw(12) << "Statistic" << std::setw(5)
     << "df" << std::setw(16) << "Pr>Chi-square" << "  Decision\n";
  char buf[32];
  int i = 1;
  for (const auto& t : tests) {
    std::snprintf(buf, sizeof(buf), "%.2f", t.result.stat);
    os << std::left << std::setw(40) << ("Test " + std::to_string(i++) + ": " + t.result.name) << std::right
       << std::setw(12) << buf << std::setw(5) << t.result.df << std::setw(16) << format_p(t.result.p_value) << "  "
       << (t.result.reject ? "Reject" : "Fail to reject") << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// CSV outputs. Column order is fixed:
//   efficiency.csv: firm,year,tei,clamped,elas_<input>...,elas_y,rts,ln_distance
//   tfpg.csv:       firm,year,dtc,etc,stc,tc,se,tfpg,delta_ln_y,year_gap
// Missing values are empty fields.

inline void write_efficiency_csv(std::ostream& os, const std::vector<EfficiencyRecord>& recs,
                                 const std::vector<std::string>& input_names) {
  os << "firm,year,tei,clamped";
  for (const auto& n : input_names) os << ",elas_" << n;
  os << ",elas_y,rts,ln_distance\n";
  for (const auto& r : recs) {
    os << r.firm_id << ',' << r.year << ',' << format_double(r.tei) << ',' << (r.clamped ? 1 : 0);
    for (double e : r.elasticity_inputs) os << ',' << format_double(e);
    os << ',' << format_double(r.elasticity_output) << ',' << (std::isfinite(r.rts) ? format_double(r.rts) : "")
       << ',' << format_double(r.fitted_ln_distance) << '\n';
  }
}

inline void write_tfpg_csv(std::ostream& os, const std::vector<TfpgRecord>& recs) {
  os << "firm,year,dtc,etc,stc,tc,se,tfpg,delta_ln_y,year_gap\n";
  for (const auto& r : recs) {
    os << r.firm_id << ',' << r.year << ',' << format_double(r.dtc) << ',' << format_double(r.etc) << ','
       << format_double(r.stc) << ',' << format_double(r.tc) << ',' << detail::opt_text(r.se) << ','
       << detail::opt_text(r.tfpg) << ',' << detail::opt_text(r.delta_ln_y) << ',' << (r.year_gap ? 1 : 0) << '\n';
  }
}

inline Json efficiency_summary_json(const EfficiencySummary& s, const std::vector<std::string>& input_names) {
  Json firms = Json::object();
  for (const auto& [f, v] : s.firm_mean_tei) firms[f] = v;
  Json obs = Json::object(), fm = Json::object();
  for (std::size_t j = 0; j < input_names.size(); ++j) {
    obs[input_names[j]] = s.input_elasticity_obs_mean[j];
    fm[input_names[j]] = s.input_elasticity_firm_mean[j];
  }
  obs["y"] = s.output_elasticity_obs_mean;
  fm["y"] = s.output_elasticity_firm_mean;
  return {{"schema", "abstei.efficiency_summary/1"},
          {"average_tei_by_firm", firms},
          {"mean_elasticities_over_observations", obs},
          {"mean_elasticities_over_firm_means", fm}};
}

inline Json tfpg_summary_json(const std::vector<TfpgRecord>& recs) {
  Json corr = Json::object();
  for (const auto& [f, c] : se_tfpg_correlation(recs)) corr[f] = detail::num(c);
  return {{"schema", "abstei.tfpg_summary/1"}, {"se_tfpg_correlation_by_firm", corr}};
}

// ---------------------------------------------------------------------------
// CSV tables read back for charts

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCode::MissingColumn, "missing column '" + name + "'");
  }
};

inline CsvTable parse_table(std::istream& in) {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cells;
    for (auto c : detail::split_commas(line)) cells.emplace_back(c);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline CsvTable read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path);
  return parse_table(in);
}

// ---------------------------------------------------------------------------
// SVG line charts. Every plotted point is also listed in a leading comment,
// copied verbatim from the CSV cell it came from.

namespace svg {

struct Series {
  std::string label;
  std::string color;
  std::string dash;  // stroke-dasharray, empty = solid
  double width = 1.5;
  std::vector<std::pair<int, std::string>> points;  // (year, csv text); empty text = missing
};

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
                                 "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39",
                                 "#7b4173", "#3182bd", "#e6550d", "#31a354", "#756bb1", "#636363"};
  return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline double to_value(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

/// Renders a multi-series chart. `highlight_at` marks points whose value is >= it (NaN disables).
inline std::string line_chart(const std::string& title, const std::string& y_label, const std::vector<Series>& series,
                              double highlight_at = std::numeric_limits<double>::quiet_NaN()) {
  const double W = 820, H = 480, left = 70, right = 170, top = 40, bottom = 50;
  int x0 = std::numeric_limits<int>::max(), x1 = std::numeric_limits<int>::min();
  double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const auto& s : series)
    for (const auto& [yr, txt] : s.points) {
      if (txt.empty()) continue;
      x0 = std::min(x0, yr);
      x1 = std::max(x1, yr);
      const double v = to_value(txt);
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  if (x0 > x1) {
    x0 = 0;
    x1 = 1;
  }
  if (x0 == x1) x1 = x0 + 1;
  if (!(y0 < y1)) {
    const double c = std::isfinite(y0) ? y0 : 0.0;
    y0 = c - 0.5;
    y1 = c + 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](int yr) { return left + (W - left - right) * (yr - x0) / double(x1 - x0); };
  auto py = [&](double v) { return top + (H - top - bottom) * (y1 - v) / (y1 - y0); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  for (const auto& s : series) {
    os << "<!-- data series=\"" << s.label << "\"";
    for (const auto& [yr, txt] : s.points) os << ' ' << yr << '=' << (txt.empty() ? "NA" : txt);
    os << " -->\n";
  }
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  for (int yr = x0; yr <= x1; ++yr)
    os << "<text x=\"" << fmt(px(yr)) << "\" y=\"" << H - bottom + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << yr << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(v) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << std::setprecision(3) << v
       << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << W - right << "\" y2=\"" << fmt(py(v))
       << "\" stroke=\"#dddddd\"/>\n";
  }
  os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << y_label << "</text>\n";
  if (y0 < 0.0 && y1 > 0.0)
    os << "<line x1=\"" << left << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << W - right << "\" y2=\"" << fmt(py(0))
       << "\" stroke=\"#888888\"/>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    // Missing values split the polyline.
    std::vector<std::string> segments(1);
    for (const auto& [yr, txt] : s.points) {
      if (txt.empty()) {
        if (!segments.back().empty()) segments.emplace_back();
        continue;
      }
      segments.back() += fmt(px(yr)) + "," + fmt(py(to_value(txt))) + " ";
    }
    for (const auto& seg : segments) {
      if (seg.empty()) continue;
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width << "\"";
      if (!s.dash.empty()) os << " stroke-dasharray=\"" << s.dash << "\"";
      os << " points=\"" << seg << "\"/>\n";
    }
    if (std::isfinite(highlight_at))
      for (const auto& [yr, txt] : s.points)
        if (!txt.empty() && to_value(txt) >= highlight_at)
          os << "<circle cx=\"" << fmt(px(yr)) << "\" cy=\"" << fmt(py(to_value(txt)))
             << "\" r=\"4\" fill=\"red\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(i) + 6;
    os << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 40 << "\" y2=\"" << ly
       << "\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width << "\"";
    if (!s.dash.empty()) os << " stroke-dasharray=\"" << s.dash << "\"";
    os << "/>\n<text x=\"" << W - right + 46 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace svg

/// TEI time series, one line per firm; indices >= 1 are marked.
inline std::string tei_chart(const CsvTable& eff) {
  const auto cf = eff.column("firm"), cy = eff.column("year"), ct = eff.column("tei");
  std::vector<svg::Series> series;
  for (const auto& row : eff.rows) {
    if (series.empty() || series.back().label != row[cf]) {
      series.push_back({row[cf], svg::palette(series.size()), "", 1.5, {}});
    }
    series.back().points.emplace_back(std::stoi(row[cy]), row[ct]);
  }
  return svg::line_chart("Estimated technical efficiency", "TEI", series, 1.0);
}

/// DTC, ETC, SE, STC and TFPG for one firm.
inline std::string tfpg_chart(const CsvTable& tfpg, const std::string& firm) {
  const auto cf = tfpg.column("firm"), cy = tfpg.column("year");
  struct Spec {
    const char* col;
    const char* label;
    const char* color;
    const char* dash;
    double width;
  };
  const Spec specs[] = {{"dtc", "DTC", "#1f77b4", "10,4", 1.5},
                        {"etc", "ETC", "#2ca02c", "2,3", 1.5},
                        {"se", "SE", "#d62728", "5,4", 1.5},
                        {"stc", "STC", "#9467bd", "", 1.0},
                        {"tfpg", "TFPG", "#000000", "", 2.5}};
  std::vector<svg::Series> series;
  for (const auto& s : specs) {
    svg::Series ser{s.label, s.color, s.dash, s.width, {}};
    const auto c = tfpg.column(s.col);
    for (const auto& row : tfpg.rows)
      if (row[cf] == firm) ser.points.emplace_back(std::stoi(row[cy]), row[c]);
    series.push_back(std::move(ser));
  }
  return svg::line_chart("TFP growth decomposition: " + firm, "rate", series);
}

// ---------------------------------------------------------------------------

/// FNV-1a 64-bit hash, hex encoded.
inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path);
  out << content;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace abstei
