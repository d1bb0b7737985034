#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "abstei/error.hpp"
#include "abstei/panel.hpp"
#include "abstei/tobit.hpp"
#include "abstei/translog.hpp"

namespace abstei {

/// Flat key-value text:
///
///   # comment
///   key = value        (whitespace around '=' and the value is trimmed)
///
/// Keys are unique; a repeated key is an error. Values are raw strings.
using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in, const std::string& origin = "config") {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto text = detail::trim(line);
    if (text.empty()) continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key(detail::trim(text.substr(0, eq)));
    std::string value(detail::trim(text.substr(eq + 1)));
    if (key.empty()) throw Error(ErrorCode::InvalidConfig, origin + ":" + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw Error(ErrorCode::InvalidConfig, origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return kv;
}

inline KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path);
  return parse_key_values(in, path);
}

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::InvalidConfig, key + ": expected a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw Error(ErrorCode::InvalidConfig, key + ": cannot parse '" + v + "'");
  return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  for (auto part : split_commas(v)) out.emplace_back(part);
  return out;
}

/// "2017-2019" or "2020".
inline std::pair<int, int> parse_year_range(const std::string& key, const std::string& v) {
  auto dash = v.find('-', 1);
  if (dash == std::string::npos) {
    int y = parse_number<int>(key, std::string(trim(v)));
    return {y, y};
  }
  return {parse_number<int>(key, std::string(trim(std::string_view(v).substr(0, dash)))),
          parse_number<int>(key, std::string(trim(std::string_view(v).substr(dash + 1))))};
}

}  // namespace detail

/// Everything a CLI run needs, resolved from config file + flags.
struct RunConfig {
  std::string input;
  std::string out_dir = "out";
  std::string fit_path;  // efficiency/tfpg: prior fit.json (default <out_dir>/fit.json)
  ColumnSchema columns;
  ModelSpec spec;
  OptimOptions optim;
  bool clamp_tei = false;
  bool charts = false;
  std::set<std::string> brexit_firms;
  std::pair<int, int> brexit_years{2017, 2019};
  std::pair<int, int> covid_years{2020, 2021};
  std::uint64_t seed = 20240501;
  int reps = 0;
  unsigned threads = 0;
  // simulate
  int sim_firms = 19;
  int sim_years = 10;
  int sim_start_year = 2012;
  double sim_sigma = 0.05;
  std::optional<double> sim_censor_target;
  int sim_european = 5;
  std::string sim_truth = "reference";  // reference | cobb-douglas

  DummyRules dummy_rules() const {
    return make_period_rules(brexit_firms, brexit_years.first, brexit_years.second, covid_years.first,
                             covid_years.second);
  }

  /// Canonical key-value form (sorted), used in manifests. The output directory is
  /// left out so that runs into different directories produce the same manifest.
  KeyValues to_key_values() const {
    KeyValues kv;
    kv["input"] = input;
    kv["firm_col"] = columns.firm;
    kv["year_col"] = columns.year;
    kv["lf_col"] = columns.lf;
    kv["output_col"] = columns.output;
    std::string ins;
    for (const auto& [name, col] : columns.inputs) ins += (ins.empty() ? "" : ",") + name + "=" + col;
    kv["inputs"] = ins;
    kv["heteroskedastic"] = spec.heteroskedastic ? "true" : "false";
    kv["trend_squared"] = spec.include_trend_squared ? "true" : "false";
    kv["firm_dummies"] = spec.include_firm_dummies ? "true" : "false";
    kv["brexit_dummy"] = spec.include_brexit ? "true" : "false";
    kv["covid_dummy"] = spec.include_covid ? "true" : "false";
    kv["homogeneity"] = spec.impose_homogeneity ? "true" : "false";
    kv["clamp_tei"] = clamp_tei ? "true" : "false";
    kv["max_iterations"] = std::to_string(optim.bfgs.max_iterations);
    kv["newton_steps"] = std::to_string(optim.newton_polish);
    std::string bf;
    for (const auto& f : brexit_firms) bf += (bf.empty() ? "" : ",") + f;
    kv["brexit_firms"] = bf;
    kv["brexit_years"] = std::to_string(brexit_years.first) + "-" + std::to_string(brexit_years.second);
    kv["covid_years"] = std::to_string(covid_years.first) + "-" + std::to_string(covid_years.second);
    kv["seed"] = std::to_string(seed);
    return kv;
  }

  KeyValues simulation_key_values() const {
    KeyValues kv;
    kv["seed"] = std::to_string(seed);
    kv["reps"] = std::to_string(reps);
    kv["sim.n_firms"] = std::to_string(sim_firms);
    kv["sim.n_years"] = std::to_string(sim_years);
    kv["sim.start_year"] = std::to_string(sim_start_year);
    kv["sim.sigma"] = format_double(sim_sigma);
    kv["sim.censor_target"] = sim_censor_target ? format_double(*sim_censor_target) : "";
    kv["sim.n_european"] = std::to_string(sim_european);
    kv["sim.truth"] = sim_truth;
    kv["heteroskedastic"] = spec.heteroskedastic ? "true" : "false";
    kv["trend_squared"] = spec.include_trend_squared ? "true" : "false";
    kv["firm_dummies"] = spec.include_firm_dummies ? "true" : "false";
    kv["brexit_dummy"] = spec.include_brexit ? "true" : "false";
    kv["covid_dummy"] = spec.include_covid ? "true" : "false";
    return kv;
  }
};

/// Applies recognised keys onto `cfg`; unknown keys are an error.
inline void apply_key_values(RunConfig& cfg, const KeyValues& kv) {
  using namespace detail;
  for (const auto& [key, v] : kv) {
    if (key == "input") cfg.input = v;
    else if (key == "out_dir") cfg.out_dir = v;
    else if (key == "fit") cfg.fit_path = v;
    else if (key == "firm_col") cfg.columns.firm = v;
    else if (key == "year_col") cfg.columns.year = v;
    else if (key == "lf_col") cfg.columns.lf = v;
    else if (key == "output_col") cfg.columns.output = v;
    else if (key == "inputs") {
      // "K,L,E" or "K=capital,L=labor,E=fuel"
      cfg.columns.inputs.clear();
      cfg.spec.input_names.clear();
      for (const auto& item : split_list(v)) {
        auto eq = item.find('=');
        std::string name = eq == std::string::npos ? item : std::string(trim(std::string_view(item).substr(0, eq)));
        std::string col = eq == std::string::npos ? item : std::string(trim(std::string_view(item).substr(eq + 1)));
        cfg.columns.inputs.emplace_back(name, col);
        cfg.spec.input_names.push_back(name);
      }
      if (cfg.spec.input_names.empty()) throw Error(ErrorCode::InvalidConfig, "inputs: at least one input required");
    }
    else if (key == "heteroskedastic") cfg.spec.heteroskedastic = parse_bool(key, v);
    else if (key == "het_terms") cfg.spec.het_regressors = split_list(v);
    else if (key == "trend_squared") cfg.spec.include_trend_squared = parse_bool(key, v);
    else if (key == "dummies") cfg.spec.set_dummies(parse_bool(key, v));
    else if (key == "firm_dummies") cfg.spec.include_firm_dummies = parse_bool(key, v);
    else if (key == "brexit_dummy") cfg.spec.include_brexit = parse_bool(key, v);
    else if (key == "covid_dummy") cfg.spec.include_covid = parse_bool(key, v);
    else if (key == "homogeneity") cfg.spec.impose_homogeneity = parse_bool(key, v);
    else if (key == "clamp_tei") cfg.clamp_tei = parse_bool(key, v);
    else if (key == "max_iterations") cfg.optim.bfgs.max_iterations = parse_number<int>(key, v);
    else if (key == "newton_steps") cfg.optim.newton_polish = parse_number<int>(key, v);
    else if (key == "charts") cfg.charts = parse_bool(key, v);
    else if (key == "brexit_firms") {
      cfg.brexit_firms.clear();
      for (const auto& f : split_list(v)) cfg.brexit_firms.insert(f);
    }
    else if (key == "brexit_years") cfg.brexit_years = parse_year_range(key, v);
    else if (key == "covid_years") cfg.covid_years = parse_year_range(key, v);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "reps") cfg.reps = parse_number<int>(key, v);
    else if (key == "threads") cfg.threads = parse_number<unsigned>(key, v);
    else if (key == "sim.n_firms") cfg.sim_firms = parse_number<int>(key, v);
    else if (key == "sim.n_years") cfg.sim_years = parse_number<int>(key, v);
    else if (key == "sim.start_year") cfg.sim_start_year = parse_number<int>(key, v);
    else if (key == "sim.sigma") cfg.sim_sigma = parse_number<double>(key, v);
    else if (key == "sim.censor_target") cfg.sim_censor_target = parse_number<double>(key, v);
    else if (key == "sim.n_european") cfg.sim_european = parse_number<int>(key, v);
    else if (key == "sim.truth") {
      if (v != "reference" && v != "cobb-douglas")
        throw Error(ErrorCode::InvalidConfig, "sim.truth: expected 'reference' or 'cobb-douglas'");
      cfg.sim_truth = v;
    }
    else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }
}

}  // namespace abstei
