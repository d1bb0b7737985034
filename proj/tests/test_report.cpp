#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "support.hpp"

using namespace abstei;

namespace {

struct Fitted {
  fixtures::Panel panel;
  FitResult fit;
};

const Fitted& fitted() {
  static const Fitted f = [] {
    Fitted out{fixtures::make_panel(fixtures::small_config(21)), {}};
    out.fit = fit(out.panel.design, out.panel.spec);
    return out;
  }();
  return f;
}

std::map<std::string, std::string> svg_points(const std::string& svg, const std::string& series) {
  std::map<std::string, std::string> out;
  const std::string key = "<!-- data series=\"" + series + "\"";
  const auto start = svg.find(key);
  if (start == std::string::npos) return out;
  const auto end = svg.find("-->", start);
  std::istringstream in(svg.substr(start + key.size(), end - start - key.size()));
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

}  // namespace

TEST(Config, KeyValueGrammar) {
  std::istringstream in("# header\n  input = data/x.csv  # trailing\n\nseed=42\n");
  const auto kv = parse_key_values(in);
  EXPECT_EQ(kv.at("input"), "data/x.csv");
  EXPECT_EQ(kv.at("seed"), "42");
  EXPECT_EQ(kv.size(), 2u);

  std::istringstream dup("a = 1\na = 2\n");
  EXPECT_THROW(parse_key_values(dup), Error);
  std::istringstream bad("just text\n");
  EXPECT_THROW(parse_key_values(bad), Error);
  EXPECT_THROW(load_key_values("/nonexistent.cfg"), Error);
}

TEST(Config, ApplyKeys) {
  RunConfig cfg;
  apply_key_values(cfg, {{"inputs", "K=fleet, L=staff"},
                         {"heteroskedastic", "false"},
                         {"trend_squared", "yes"},
                         {"dummies", "off"},
                         {"brexit_firms", "BA,VS"},
                         {"brexit_years", "2017-2019"},
                         {"covid_years", "2020"},
                         {"seed", "18446744073709551615"},
                         {"sim.truth", "cobb-douglas"},
                         {"sim.censor_target", "0.05"}});
  EXPECT_EQ(cfg.spec.input_names, (std::vector<std::string>{"K", "L"}));
  EXPECT_EQ(cfg.columns.inputs[1], (std::pair<std::string, std::string>{"L", "staff"}));
  EXPECT_FALSE(cfg.spec.heteroskedastic);
  EXPECT_TRUE(cfg.spec.include_trend_squared);
  EXPECT_FALSE(cfg.spec.include_firm_dummies);
  EXPECT_FALSE(cfg.spec.include_covid);
  EXPECT_EQ(cfg.brexit_firms.size(), 2u);
  EXPECT_EQ(cfg.covid_years, (std::pair<int, int>{2020, 2020}));
  EXPECT_EQ(cfg.seed, 18446744073709551615ULL);
  EXPECT_EQ(cfg.sim_truth, "cobb-douglas");
  EXPECT_EQ(*cfg.sim_censor_target, 0.05);
  const auto rules = cfg.dummy_rules();
  EXPECT_TRUE(rules.brexit("BA", 2018));
  EXPECT_FALSE(rules.brexit("BA", 2020));
  EXPECT_FALSE(rules.brexit("LH", 2018));
  EXPECT_TRUE(rules.covid(2020));
  EXPECT_FALSE(rules.covid(2021));

  EXPECT_THROW(apply_key_values(cfg, {{"colour", "red"}}), Error);
  EXPECT_THROW(apply_key_values(cfg, {{"charts", "maybe"}}), Error);
  EXPECT_THROW(apply_key_values(cfg, {{"seed", "-3"}}), Error);
  EXPECT_THROW(apply_key_values(cfg, {{"sim.truth", "leontief"}}), Error);
}

TEST(Report, FitJsonRoundTrip) {
  const auto& f = fitted();
  const Json doc = fit_to_json(f.fit, f.panel.spec);
  const Json parsed = Json::parse(dump(doc));
  const auto c = coefficients_from_json(parsed, f.panel.design.index);
  EXPECT_EQ(c.beta, f.fit.coefficients.beta);  // shortest round-trip printing is exact
  EXPECT_EQ(parsed["coefficients"][0]["name"], "Constant");
  EXPECT_EQ(parsed["model"]["dummy_firms"]["z1"], f.panel.draw.data.firms[1]);
  EXPECT_EQ(parsed["restrictions"].size(), 6u);
  EXPECT_EQ(parsed["variance_equation"].size(), 6u);
  const auto spec = spec_from_json(parsed, ModelSpec{});
  EXPECT_EQ(spec.include_brexit, f.panel.spec.include_brexit);
  EXPECT_EQ(spec.heteroskedastic, f.panel.spec.heteroskedastic);
}

TEST(Report, NonFiniteValuesBecomeNull) {
  auto f = fitted().fit;
  f.p_values[0] = std::numeric_limits<double>::quiet_NaN();
  const Json doc = fit_to_json(f, fitted().panel.spec);
  EXPECT_TRUE(doc["coefficients"][0]["p_value"].is_null());
  EXPECT_NE(dump(doc).find("null"), std::string::npos);
}

TEST(Report, ForeignFitRejected) {
  const auto& f = fitted();
  Json doc = fit_to_json(f.fit, f.panel.spec);
  ModelSpec t2 = f.panel.spec;
  t2.include_trend_squared = true;
  EXPECT_THROW(coefficients_from_json(doc, TermIndex::build(t2, f.panel.draw.data.firms)), Error);
  doc["model"]["dummy_firms"]["z1"] = "nobody";
  EXPECT_THROW(coefficients_from_json(doc, f.panel.design.index), Error);
}

TEST(Report, CoefficientTableLayout) {
  const auto table = coefficient_table(fitted().fit);
  std::istringstream in(table);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_NE(header.find("Parameter"), std::string::npos);
  EXPECT_NE(header.find("Coefficient"), std::string::npos);
  EXPECT_NE(header.find("P-Value"), std::string::npos);
  EXPECT_EQ(first.rfind("Constant", 0), 0u);
  EXPECT_NE(table.find("Ln y"), std::string::npos);
  EXPECT_EQ(format_p(1e-7), "<.0001");
  EXPECT_EQ(format_p(0.04321), "0.0432");
  EXPECT_EQ(format_p(std::numeric_limits<double>::quiet_NaN()), "-");
}

TEST(Report, TestsJsonAndTable) {
  const auto& f = fitted();
  const auto tests = specification_tests(f.panel.design, f.panel.spec, f.fit);
  const Json doc = tests_to_json(tests);
  ASSERT_EQ(doc["specification_tests"].size(), 3u);
  const auto& t0 = doc["specification_tests"][0];
  EXPECT_EQ(t0["null_hypothesis"], "Cobb-Douglas Functional Form");
  EXPECT_EQ(t0["df"], 7);
  EXPECT_TRUE(t0["decision"] == "Reject" || t0["decision"] == "Fail to reject");
  const auto table = tests_table(tests);
  for (const char* col : {"Null hypothesis", "Statistic", "Pr>Chi-square", "Decision"})
    EXPECT_NE(table.find(col), std::string::npos) << col;
}

TEST(Report, CsvColumnOrder) {
  const auto& f = fitted();
  std::ostringstream eff, tfpg;
  write_efficiency_csv(eff, compute_tei(f.fit, f.panel.design), {"K", "L", "E"});
  write_tfpg_csv(tfpg, tfpg_decompose(f.fit, f.panel.rows));
  EXPECT_EQ(eff.str().substr(0, eff.str().find('\n')), "firm,year,tei,clamped,elas_K,elas_L,elas_E,elas_y,rts,ln_distance");
  EXPECT_EQ(tfpg.str().substr(0, tfpg.str().find('\n')), "firm,year,dtc,etc,stc,tc,se,tfpg,delta_ln_y,year_gap");
  std::istringstream in(tfpg.str());
  const auto table = parse_table(in);
  // first year of each firm: se, tfpg and delta empty
  EXPECT_EQ(table.rows[0][table.column("se")], "");
  EXPECT_EQ(table.rows[0][table.column("tfpg")], "");
  EXPECT_NE(table.rows[1][table.column("tfpg")], "");
}

TEST(Charts, TeiChartIsAViewOfTheCsv) {
  const auto& f = fitted();
  std::ostringstream eff;
  write_efficiency_csv(eff, compute_tei(f.fit, f.panel.design), {"K", "L", "E"});
  std::istringstream in(eff.str());
  const auto table = parse_table(in);
  const auto svg = tei_chart(table);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 0, true);
  std::size_t polylines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  EXPECT_EQ(polylines, f.panel.draw.data.firms.size());
  for (const auto& row : table.rows) {
    const auto pts = svg_points(svg, row[0]);
    EXPECT_EQ(pts.at(row[1]), row[table.column("tei")]);
  }
}

TEST(Charts, TfpgChartSeriesAndStyles) {
  const auto& f = fitted();
  std::ostringstream csv;
  write_tfpg_csv(csv, tfpg_decompose(f.fit, f.panel.rows));
  std::istringstream in(csv.str());
  const auto table = parse_table(in);
  const std::string firm = f.panel.draw.data.firms[0];
  const auto svg = tfpg_chart(table, firm);
  for (const char* s : {"DTC", "ETC", "SE", "STC", "TFPG"}) EXPECT_FALSE(svg_points(svg, s).empty()) << s;
  EXPECT_NE(svg.find("stroke-dasharray=\"10,4\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray=\"2,3\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray=\"5,4\""), std::string::npos);
  for (const auto& row : table.rows) {
    if (row[0] != firm) continue;
    const auto tf = svg_points(svg, "TFPG").at(row[1]);
    const auto& cell = row[table.column("tfpg")];
    EXPECT_EQ(tf, cell.empty() ? "NA" : cell);
  }
}

TEST(Charts, FlatSeriesIsHorizontal) {
  CsvTable t;
  t.header = {"firm", "year", "tei"};
  for (int y = 2010; y < 2015; ++y) t.rows.push_back({"A", std::to_string(y), "0.75"});
  const auto svg = tei_chart(t);
  const std::regex pts("points=\"([^\"]*)\"");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, pts));
  std::istringstream in(m[1].str());
  std::string p, y0;
  while (in >> p) {
    const auto y = p.substr(p.find(',') + 1);
    if (y0.empty()) y0 = y;
    EXPECT_EQ(y, y0);
  }
}

TEST(Manifest, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a64_hex("foobar"), "85944171f73967e8");
}
