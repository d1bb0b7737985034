#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "abstei/error.hpp"

namespace abstei {

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct PanelObservation {
  std::string firm_id;
  int year = 0;
  double load_factor = 1.0;
  double output = 1.0;
  std::vector<double> inputs;  // aligned with PanelDataset::input_names
};

struct PanelDataset {
  std::vector<PanelObservation> observations;  // sorted by (firm, year)
  std::vector<std::string> firms;              // lexicographic
  std::vector<int> years;                      // distinct, ascending
  std::string output_name = "y";
  std::vector<std::string> input_names;
  std::map<std::string, double> variable_means;

  std::size_t size() const { return observations.size(); }
  double mean_output() const { return variable_means.at(output_name); }
  double mean_input(std::size_t j) const { return variable_means.at(input_names.at(j)); }
};

/// Maps model roles onto CSV header names.
struct ColumnSchema {
  std::string firm = "firm";
  std::string year = "year";
  std::string lf = "lf";
  std::string output = "y";
  // (model input name, csv column)
  std::vector<std::pair<std::string, std::string>> inputs = {{"K", "K"}, {"L", "L"}, {"E", "E"}};
};

inline constexpr double kLoadFactorTolerance = 1e-12;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

inline std::string where(std::size_t line_no, const std::string& column) {
  return "line " + std::to_string(line_no) + ", column '" + column + "'";
}

inline double parse_real(std::string_view text, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v))
    throw Error(ErrorCode::ParseError,
                where(line_no, column) + ": cannot parse '" + std::string(text) + "' as a real number");
  return v;
}

inline int parse_int(std::string_view text, std::size_t line_no, const std::string& column) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error(ErrorCode::ParseError,
                where(line_no, column) + ": cannot parse '" + std::string(text) + "' as an integer");
  return v;
}

}  // namespace detail

/// Sorts, checks invariants and fills firms/years/means. Throws on violation.
inline PanelDataset finalize_dataset(std::vector<PanelObservation> rows, std::string output_name,
                                     std::vector<std::string> input_names) {
  PanelDataset ds;
  ds.output_name = std::move(output_name);
  ds.input_names = std::move(input_names);
  if (ds.input_names.empty()) throw Error(ErrorCode::InvalidSpec, "dataset needs at least one input");
  if (rows.empty()) throw Error(ErrorCode::InvalidSpec, "dataset has no observations");

  for (auto& r : rows) {
    if (r.inputs.size() != ds.input_names.size())
      throw Error(ErrorCode::DimensionMismatch, "observation " + r.firm_id + "/" + std::to_string(r.year) +
                                                    " has wrong number of inputs");
    if (!(r.load_factor > 0.0) || r.load_factor > 1.0 + kLoadFactorTolerance)
      throw Error(ErrorCode::LoadFactorOutOfRange,
                  r.firm_id + "/" + std::to_string(r.year) + ": load factor " + format_double(r.load_factor) +
                      " outside (0, 1]");
    r.load_factor = std::min(r.load_factor, 1.0);
    if (!(r.output > 0.0))
      throw Error(ErrorCode::NonPositiveValue, r.firm_id + "/" + std::to_string(r.year) + ": output must be > 0");
    for (std::size_t j = 0; j < r.inputs.size(); ++j)
      if (!(r.inputs[j] > 0.0))
        throw Error(ErrorCode::NonPositiveValue, r.firm_id + "/" + std::to_string(r.year) + ": input " +
                                                     ds.input_names[j] + " must be > 0");
  }

  std::sort(rows.begin(), rows.end(), [](const PanelObservation& a, const PanelObservation& b) {
    return std::tie(a.firm_id, a.year) < std::tie(b.firm_id, b.year);
  });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].firm_id == rows[i - 1].firm_id && rows[i].year == rows[i - 1].year)
      throw Error(ErrorCode::DuplicateKey,
                  "duplicate (firm, year) = (" + rows[i].firm_id + ", " + std::to_string(rows[i].year) + ")");

  std::set<int> years;
  for (const auto& r : rows) {
    if (ds.firms.empty() || ds.firms.back() != r.firm_id) ds.firms.push_back(r.firm_id);
    years.insert(r.year);
  }
  ds.years.assign(years.begin(), years.end());

  const double n = static_cast<double>(rows.size());
  double lf = 0.0, y = 0.0;
  std::vector<double> x(ds.input_names.size(), 0.0);
  for (const auto& r : rows) {
    lf += r.load_factor;
    y += r.output;
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += r.inputs[j];
  }
  ds.variable_means["lf"] = lf / n;
  ds.variable_means[ds.output_name] = y / n;
  for (std::size_t j = 0; j < x.size(); ++j) ds.variable_means[ds.input_names[j]] = x[j] / n;
  ds.observations = std::move(rows);
  return ds;
}

inline PanelDataset parse_csv(std::istream& in, const ColumnSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw Error(ErrorCode::MissingColumn, "CSV input is empty (header required)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto cell : detail::split_commas(line)) header.emplace_back(cell);
  auto column_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCode::MissingColumn, "line " + std::to_string(line_no) + ": missing column '" + name + "'");
  };
  const std::size_t c_firm = column_of(schema.firm);
  const std::size_t c_year = column_of(schema.year);
  const std::size_t c_lf = column_of(schema.lf);
  const std::size_t c_y = column_of(schema.output);
  std::vector<std::size_t> c_x;
  std::vector<std::string> input_names;
  for (const auto& [name, col] : schema.inputs) {
    c_x.push_back(column_of(col));
    input_names.push_back(name);
  }

  std::vector<PanelObservation> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " fields, found " +
                                             std::to_string(cells.size()));
    PanelObservation obs;
    obs.firm_id = std::string(cells[c_firm]);
    if (obs.firm_id.empty()) throw Error(ErrorCode::ParseError, detail::where(line_no, schema.firm) + ": empty firm id");
    obs.year = detail::parse_int(cells[c_year], line_no, schema.year);
    obs.load_factor = detail::parse_real(cells[c_lf], line_no, schema.lf);
    if (!(obs.load_factor > 0.0) || obs.load_factor > 1.0 + kLoadFactorTolerance)
      throw Error(ErrorCode::LoadFactorOutOfRange, detail::where(line_no, schema.lf) + ": load factor " +
                                                       std::string(cells[c_lf]) + " outside (0, 1]");
    obs.output = detail::parse_real(cells[c_y], line_no, schema.output);
    if (!(obs.output > 0.0))
      throw Error(ErrorCode::NonPositiveValue, detail::where(line_no, schema.output) + ": value " +
                                                   std::string(cells[c_y]) + " must be > 0");
    for (std::size_t j = 0; j < c_x.size(); ++j) {
      const auto& col = schema.inputs[j].second;
      double v = detail::parse_real(cells[c_x[j]], line_no, col);
      if (!(v > 0.0))
        throw Error(ErrorCode::NonPositiveValue,
                    detail::where(line_no, col) + ": value " + std::string(cells[c_x[j]]) + " must be > 0");
      obs.inputs.push_back(v);
    }
    rows.push_back(std::move(obs));
  }
  return finalize_dataset(std::move(rows), schema.output, std::move(input_names));
}

inline PanelDataset load_csv(const std::string& path, const ColumnSchema& schema = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path);
  return parse_csv(in, schema);
}

/// Writes the dataset with the schema's column names; load_csv reads it back unchanged.
inline void write_csv(std::ostream& out, const PanelDataset& ds, const ColumnSchema& schema) {
  if (schema.inputs.size() != ds.input_names.size())
    throw Error(ErrorCode::DimensionMismatch, "schema and dataset disagree on input count");
  out << schema.firm << ',' << schema.year << ',' << schema.lf << ',' << schema.output;
  for (const auto& [name, col] : schema.inputs) out << ',' << col;
  out << '\n';
  for (const auto& o : ds.observations) {
    out << o.firm_id << ',' << o.year << ',' << format_double(o.load_factor) << ',' << format_double(o.output);
    for (double v : o.inputs) out << ',' << format_double(v);
    out << '\n';
  }
}

/// Schema whose column names equal the dataset's own variable names.
inline ColumnSchema schema_for(const PanelDataset& ds) {
  ColumnSchema s;
  s.output = ds.output_name;
  s.inputs.clear();
  for (const auto& n : ds.input_names) s.inputs.emplace_back(n, n);
  return s;
}

inline void write_csv_file(const std::string& path, const PanelDataset& ds, const ColumnSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path);
  write_csv(out, ds, schema);
}

// ---------------------------------------------------------------------------
// Transformation into the log / mean-scaled form used by the model.

struct TransformedObservation {
  std::string firm_id;
  int year = 0;
  double ln_distance = 0.0;  // -ln(lf) >= 0
  bool is_censored = false;
  double ln_output = 0.0;
  std::vector<double> ln_inputs;
  double trend = 0.0;
  std::vector<int> firm_dummies;  // n_firms - 1 entries; first firm is the reference
  int brexit_dummy = 0;
  int covid_dummy = 0;
};

/// Indicator rules for the two event dummies.
struct DummyRules {
  std::function<bool(const std::string& firm, int year)> brexit = [](const std::string&, int) { return false; };
  std::function<bool(int year)> covid = [](int) { return false; };
};

/// Brexit = firm in `brexit_firms` and year in [brexit_first, brexit_last];
/// Covid = year in [covid_first, covid_last].
inline DummyRules make_period_rules(std::set<std::string> brexit_firms, int brexit_first, int brexit_last,
                                    int covid_first, int covid_last) {
  DummyRules rules;
  rules.brexit = [firms = std::move(brexit_firms), brexit_first, brexit_last](const std::string& f, int y) {
    return y >= brexit_first && y <= brexit_last && firms.count(f) > 0;
  };
  rules.covid = [covid_first, covid_last](int y) { return y >= covid_first && y <= covid_last; };
  return rules;
}

inline std::vector<TransformedObservation> transform(const PanelDataset& ds, const DummyRules& rules = {},
                                                     double censor_tol = 1e-12) {
  const int base_year = ds.years.front();
  const double mean_y = ds.mean_output();
  std::vector<double> mean_x(ds.input_names.size());
  for (std::size_t j = 0; j < mean_x.size(); ++j) mean_x[j] = ds.mean_input(j);

  std::map<std::string, std::size_t> firm_pos;
  for (std::size_t i = 0; i < ds.firms.size(); ++i) firm_pos[ds.firms[i]] = i;

  std::vector<TransformedObservation> out;
  out.reserve(ds.size());
  for (const auto& o : ds.observations) {
    TransformedObservation t;
    t.firm_id = o.firm_id;
    t.year = o.year;
    t.is_censored = o.load_factor >= 1.0 - censor_tol;
    t.ln_distance = t.is_censored ? 0.0 : -std::log(o.load_factor);
    t.ln_output = std::log(o.output / mean_y);
    t.ln_inputs.resize(o.inputs.size());
    for (std::size_t j = 0; j < o.inputs.size(); ++j) t.ln_inputs[j] = std::log(o.inputs[j] / mean_x[j]);
    t.trend = static_cast<double>(o.year - base_year);
    t.firm_dummies.assign(ds.firms.size() - 1, 0);
    const std::size_t fp = firm_pos.at(o.firm_id);
    if (fp > 0) t.firm_dummies[fp - 1] = 1;
    t.brexit_dummy = rules.brexit(o.firm_id, o.year) ? 1 : 0;
    t.covid_dummy = rules.covid(o.year) ? 1 : 0;
    out.push_back(std::move(t));
  }
  return out;
}

/// Stable text form of transformed rows (used for determinism checks and debugging dumps).
inline std::string serialize(const std::vector<TransformedObservation>& rows) {
  std::ostringstream os;
  for (const auto& t : rows) {
    os << t.firm_id << ',' << t.year << ',' << format_double(t.ln_distance) << ',' << (t.is_censored ? 1 : 0) << ','
       << format_double(t.ln_output);
    for (double v : t.ln_inputs) os << ',' << format_double(v);
    os << ',' << format_double(t.trend);
    for (int d : t.firm_dummies) os << ',' << d;
    os << ',' << t.brexit_dummy << ',' << t.covid_dummy << '\n';
  }
  return os.str();
}

}  // namespace abstei
