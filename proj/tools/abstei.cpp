// abstei: fit, test, efficiency, tfpg, simulate, report.
//
// Exit codes: 0 ok, 1 input/validation error, 2 optimizer did not converge
// (results are still written and flagged).

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "abstei/abstei.hpp"

namespace fs = std::filesystem;
using namespace abstei;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

struct Flags {
  std::string config, input, out_dir, fit;
  bool no_het = false, trend_squared = false, clamp_tei = false, charts = false, quiet = false;
  std::uint64_t seed = 0;
  int reps = 0;
  unsigned threads = 0;
};

// config file first, flags on top
RunConfig resolve(const Flags& f, const CLI::App& sub) {
  auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  RunConfig cfg;
  if (!f.config.empty()) apply_key_values(cfg, load_key_values(f.config));
  if (given("--input")) cfg.input = f.input;
  if (given("--out-dir")) cfg.out_dir = f.out_dir;
  if (given("--fit")) cfg.fit_path = f.fit;
  if (f.no_het) cfg.spec.heteroskedastic = false;
  if (f.trend_squared) cfg.spec.include_trend_squared = true;
  if (f.clamp_tei) cfg.clamp_tei = true;
  if (f.charts) cfg.charts = true;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--reps")) cfg.reps = f.reps;
  if (given("--threads")) cfg.threads = f.threads;
  cfg.spec.validate();
  return cfg;
}

struct Run {
  RunConfig cfg;
  std::string command;
  bool quiet = false;
  Json inputs = Json::array();
  std::vector<std::string> outputs;

  fs::path path(const std::string& name) const { return fs::path(cfg.out_dir) / name; }

  void write(const std::string& name, const std::string& content) {
    write_file(path(name).string(), content);
    outputs.push_back(name);
  }

  void note_input(const std::string& p, const std::string& bytes) {
    inputs.push_back({{"path", p}, {"bytes", bytes.size()}, {"fnv1a64", fnv1a64_hex(bytes)}});
  }

  void print(const std::string& text) const {
    if (!quiet) std::cout << text;
  }

  void manifest(const KeyValues& kv) {
    Json config = Json::object();
    for (const auto& [k, v] : kv) config[k] = v;
    Json m;
    m["schema"] = "abstei.manifest/1";
    m["version"] = kVersion;
    m["command"] = command;
    m["inputs"] = inputs;
    m["config"] = config;
    m["outputs"] = outputs;
    write_file(path("manifest-" + command + ".json").string(), dump(m));
  }
};

struct Prepared {
  PanelDataset data;
  std::vector<TransformedObservation> rows;
  ModelSpec spec;
  DesignMatrix design;
};

Prepared prepare(Run& run, const ModelSpec& spec) {
  if (run.cfg.input.empty()) throw Error(ErrorCode::InvalidConfig, "no input file given (--input or 'input =')");
  const std::string bytes = read_file(run.cfg.input);
  run.note_input(run.cfg.input, bytes);
  std::istringstream in(bytes);
  Prepared p;
  p.data = parse_csv(in, run.cfg.columns);
  p.rows = transform(p.data, run.cfg.dummy_rules());
  p.spec = drop_empty_dummies(spec, p.rows);
  p.design = build_design(p.rows, p.spec, p.data.firms);
  return p;
}

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (auto& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return out;
}

// ---------------------------------------------------------------------------

FitResult do_fit(Run& run, const Prepared& p) {
  FitResult f = fit(p.design, p.spec, run.cfg.optim);
  run.write("fit.json", dump(fit_to_json(f, p.spec)));
  const std::string table = coefficient_table(f);
  run.write("coefficients.txt", table);
  run.print(table);
  if (!f.converged) std::cerr << "warning: optimizer did not converge: " << f.message << '\n';
  return f;
}

bool do_test(Run& run, const Prepared& p, const FitResult& unrestricted) {
  const auto tests = specification_tests(p.design, p.spec, unrestricted, run.cfg.optim);
  run.write("tests.json", dump(tests_to_json(tests)));
  const std::string table = tests_table(tests);
  run.write("tests.txt", table);
  run.print(table);
  bool ok = unrestricted.converged;
  for (const auto& t : tests)
    if (!t.restricted_fit.converged) {
      std::cerr << "warning: restricted fit '" << t.result.name << "' did not converge\n";
      ok = false;
    }
  return ok;
}

void do_efficiency(Run& run, const Prepared& p, const CoefficientSet& c) {
  const auto recs = compute_tei(c, p.design, run.cfg.clamp_tei);
  std::ostringstream csv;
  write_efficiency_csv(csv, recs, p.data.input_names);
  run.write("efficiency.csv", csv.str());
  run.write("efficiency_summary.json", dump(efficiency_summary_json(summarize(recs), p.data.input_names)));
  if (run.cfg.charts) run.write("tei.svg", tei_chart(read_table(run.path("efficiency.csv").string())));
  run.print("wrote " + std::to_string(recs.size()) + " efficiency records\n");
}

void do_tfpg(Run& run, const Prepared& p, const CoefficientSet& c) {
  const auto recs = tfpg_decompose(c, p.rows);
  std::ostringstream csv;
  write_tfpg_csv(csv, recs);
  run.write("tfpg.csv", csv.str());
  run.write("tfpg_summary.json", dump(tfpg_summary_json(recs)));
  if (run.cfg.charts) {
    const auto table = read_table(run.path("tfpg.csv").string());
    for (const auto& firm : p.data.firms) run.write("tfpg_" + safe_name(firm) + ".svg", tfpg_chart(table, firm));
  }
  run.print("wrote " + std::to_string(recs.size()) + " TFP growth records\n");
}

/// Coefficients from an earlier `fit` run, checked against the current data.
std::pair<Prepared, CoefficientSet> load_prior_fit(Run& run) {
  const std::string fit_path = run.cfg.fit_path.empty() ? run.path("fit.json").string() : run.cfg.fit_path;
  if (!fs::exists(fit_path))
    throw Error(ErrorCode::FileNotFound, "file not found: " + fit_path + " (fit artifacts missing; run 'fit' first)");
  const std::string bytes = read_file(fit_path);
  run.note_input(run.cfg.fit_path.empty() ? "fit.json" : fit_path, bytes);
  Json doc;
  try {
    doc = Json::parse(bytes);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, fit_path + ": " + e.what());
  }
  Prepared p = prepare(run, spec_from_json(doc, run.cfg.spec));
  CoefficientSet c = coefficients_from_json(doc, p.design.index);
  return {std::move(p), std::move(c)};
}

// ---------------------------------------------------------------------------

int cmd_fit(Run& run) {
  const Prepared p = prepare(run, run.cfg.spec);
  const FitResult f = do_fit(run, p);
  run.manifest(run.cfg.to_key_values());
  return f.converged ? kOk : kNotConverged;
}

int cmd_test(Run& run) {
  const Prepared p = prepare(run, run.cfg.spec);
  const FitResult f = fit(p.design, p.spec, run.cfg.optim);
  const bool ok = do_test(run, p, f);
  run.manifest(run.cfg.to_key_values());
  return ok ? kOk : kNotConverged;
}

int cmd_efficiency(Run& run) {
  const auto [p, c] = load_prior_fit(run);
  do_efficiency(run, p, c);
  run.manifest(run.cfg.to_key_values());
  return kOk;
}

int cmd_tfpg(Run& run) {
  const auto [p, c] = load_prior_fit(run);
  do_tfpg(run, p, c);
  run.manifest(run.cfg.to_key_values());
  return kOk;
}

int cmd_report(Run& run) {
  const Prepared p = prepare(run, run.cfg.spec);
  const FitResult f = do_fit(run, p);
  const bool ok = do_test(run, p, f);
  do_efficiency(run, p, f.coefficients);
  do_tfpg(run, p, f.coefficients);
  run.manifest(run.cfg.to_key_values());
  return ok ? kOk : kNotConverged;
}

int cmd_simulate(Run& run) {
  const RunConfig& cfg = run.cfg;
  SimConfig sc;
  sc.n_firms = cfg.sim_firms;
  sc.n_years = cfg.sim_years;
  sc.start_year = cfg.sim_start_year;
  sc.noise_sigma = cfg.sim_sigma;
  sc.censor_target = cfg.sim_censor_target;
  sc.n_european = cfg.sim_european;
  sc.seed = cfg.seed;
  sc.spec = cfg.spec;
  if (sc.spec.input_names.size() != sc.input_ranges.size())
    throw Error(ErrorCode::InvalidConfig, "simulation supports exactly three inputs (K, L, E)");
  const TermIndex index = sim_term_index(sc);
  sc.true_coefficients = cfg.sim_truth == "cobb-douglas" ? cobb_douglas_truth(index)
                                                         : airline_reference_coefficients(index);
  const SimDraw draw = generate(sc);

  std::ostringstream csv;
  write_csv(csv, draw.data, schema_for(draw.data));
  run.write("simulated.csv", csv.str());

  // Config that fits the simulated panel with the same dummy calendar.
  std::ostringstream sim_cfg;
  const int b0 = sc.start_year + sc.brexit_offset;
  const int last = sc.start_year + sc.n_years - 1;
  sim_cfg << "# generated by 'abstei simulate'\n";
  sim_cfg << "input = " << run.path("simulated.csv").generic_string() << '\n';
  std::string firms;
  const auto ids = firm_ids(sc.n_firms);
  for (int i = 0; i < std::min(sc.n_european, sc.n_firms); ++i)
    firms += (firms.empty() ? "" : ",") + ids[static_cast<std::size_t>(i)];
  sim_cfg << "brexit_firms = " << firms << '\n';
  sim_cfg << "brexit_years = " << b0 << '-' << b0 + sc.brexit_length - 1 << '\n';
  sim_cfg << "covid_years = " << last - sc.covid_length + 1 << '-' << last << '\n';
  sim_cfg << "trend_squared = " << (draw.spec.include_trend_squared ? "true" : "false") << '\n';
  sim_cfg << "firm_dummies = " << (draw.spec.include_firm_dummies ? "true" : "false") << '\n';
  sim_cfg << "brexit_dummy = " << (draw.spec.include_brexit ? "true" : "false") << '\n';
  sim_cfg << "covid_dummy = " << (draw.spec.include_covid ? "true" : "false") << '\n';
  run.write("simulated.cfg", sim_cfg.str());

  Json truth = Json::object();
  for (std::size_t i = 0; i < draw.truth.index.size(); ++i)
    truth[draw.truth.index.name(i)] = draw.truth.beta[static_cast<Eigen::Index>(i)];
  run.write("truth.json", dump({{"schema", "abstei.truth/1"},
                                {"noise_sigma", sc.noise_sigma},
                                {"seed", std::to_string(sc.seed)},
                                {"coefficients", truth}}));

  std::ostringstream tei;
  tei << "firm,year,true_ln_distance,latent,true_tei,censored\n";
  for (std::size_t i = 0; i < draw.data.observations.size(); ++i) {
    const auto& o = draw.data.observations[i];
    const auto k = static_cast<Eigen::Index>(i);
    tei << o.firm_id << ',' << o.year << ',' << format_double(draw.true_ln_distance[k]) << ','
        << format_double(draw.latent[k]) << ',' << format_double(draw.true_tei[k]) << ','
        << (draw.latent[k] <= 0.0 ? 1 : 0) << '\n';
  }
  run.write("truth_tei.csv", tei.str());
  run.print("simulated " + std::to_string(draw.data.observations.size()) + " observations\n");

  if (cfg.reps >= 1) {
    const MonteCarloReport rep = monte_carlo(sc, cfg.reps, cfg.spec, cfg.optim, cfg.threads);
    run.write("monte_carlo.json", dump(monte_carlo_json(rep)));
    std::ostringstream os;
    os << "Monte Carlo: " << rep.reps << " replications, " << rep.failed << " failed, median |bias| "
       << rep.median_abs_bias_first_order << ", coverage " << rep.coverage_first_order << ", TEI correlation "
       << rep.mean_tei_correlation << '\n';
    run.print(os.str());
  }
  run.manifest(cfg.simulation_key_values());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-step technical efficiency estimation with a restricted translog input-distance Tobit model"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "key = value config file");
    sub->add_option("--out-dir", flags.out_dir, "output directory (default: out)");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--reps", flags.reps, "Monte Carlo replications (simulate)");
    sub->add_option("--threads", flags.threads, "worker threads (simulate, 0 = all cores)");
    sub->add_option("--input", flags.input, "panel CSV");
    sub->add_option("--fit", flags.fit, "prior fit.json (efficiency, tfpg)");
    sub->add_flag("--no-het", flags.no_het, "homoskedastic errors");
    sub->add_flag("--trend-squared", flags.trend_squared, "add the .5 t^2 term");
    sub->add_flag("--clamp-tei", flags.clamp_tei, "clamp TEI at 1");
    sub->add_flag("--charts", flags.charts, "write SVG charts");
    sub->add_flag("-q,--quiet", flags.quiet, "no table output");
  };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fit", "estimate the model; writes fit.json and the coefficient table"},
      {"test", "likelihood-ratio specification tests; writes tests.json"},
      {"efficiency", "TEI and elasticities from a prior fit; writes efficiency.csv"},
      {"tfpg", "TFP growth decomposition from a prior fit; writes tfpg.csv"},
      {"simulate", "synthetic panel (and Monte Carlo with --reps)"},
      {"report", "fit, test, efficiency and tfpg in one run"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    Run run{resolve(flags, *sub), command, flags.quiet, Json::array(), {}};
    fs::create_directories(run.cfg.out_dir);
    if (command == "fit") return cmd_fit(run);
    if (command == "test") return cmd_test(run);
    if (command == "efficiency") return cmd_efficiency(run);
    if (command == "tfpg") return cmd_tfpg(run);
    if (command == "simulate") return cmd_simulate(run);
    return cmd_report(run);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}
