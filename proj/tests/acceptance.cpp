// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "abstei/abstei.hpp"

using namespace abstei;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;  // runtime limit, 0 = none
  std::function<Verdict()> check;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

struct Panel {
  SimDraw draw;
  std::vector<TransformedObservation> rows;
  ModelSpec spec;
  DesignMatrix design;
};

Panel make_panel(const SimConfig& cfg, std::optional<ModelSpec> fit_spec = std::nullopt) {
  Panel p;
  p.draw = generate(cfg);
  p.rows = transform(p.draw.data, p.draw.rules);
  p.spec = drop_empty_dummies(fit_spec ? *fit_spec : p.draw.spec, p.rows);
  p.design = build_design(p.rows, p.spec, p.draw.data.firms);
  return p;
}

TransformedObservation mean_point(std::size_t n_inputs, std::size_t n_firms) {
  TransformedObservation o;
  o.firm_id = "reference";
  o.ln_inputs.assign(n_inputs, 0.0);
  o.firm_dummies.assign(n_firms - 1, 0);
  return o;
}

// ---------------------------------------------------------------------------

Verdict fixed_coefficients() {
  SimConfig cfg;
  const auto p = make_panel(cfg);
  const auto c = airline_reference_coefficients(p.design.index, false);
  double dtc_err = 0.0;
  for (const auto& o : p.rows) dtc_err = std::max(dtc_err, std::abs(technical_change(c, o).dtc + 0.032827));
  const auto o = mean_point(3, p.draw.data.firms.size());
  const double tei = std::exp(-ln_distance(c.beta, o, p.design.index));
  const auto e = elasticities(c, o);
  const bool ok = dtc_err == 0.0 && std::abs(tei - std::exp(-0.297336)) <= 1e-6 &&
                  std::abs(e.eps_dy - 0.593745) <= 1e-12 && std::abs(e.rts - 1.6842) <= 1e-3;
  return {ok, "max|DTC+0.032827|=" + fmt("%.1e", dtc_err) + " TEI=" + fmt("%.7f", tei) +
                  " eps_Dy=" + fmt("%.6f", e.eps_dy) + " RTS=" + fmt("%.5f", e.rts)};
}

Verdict homogeneity() {
  Rng rng(2024);
  ModelSpec spec;
  const std::vector<std::string> firms = {"A", "B", "C", "D"};
  const auto ix = TermIndex::build(spec, firms);
  const auto rs = homogeneity_restrictions(ix);
  double worst_scale = 0.0, worst_sum = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    Vector b(static_cast<Eigen::Index>(ix.size()));
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-1.0, 1.0);
    b = project_onto(rs, b);
    auto c = CoefficientSet::zeros(ix);
    c.beta = b;
    TransformedObservation o = mean_point(3, firms.size());
    o.ln_output = rng.uniform(-2, 2);
    for (auto& v : o.ln_inputs) v = rng.uniform(-2, 2);
    o.trend = std::floor(rng.uniform(0, 10));
    o.firm_dummies[static_cast<std::size_t>(rep % 3)] = 1;
    o.brexit_dummy = rep % 2;
    const double base = ln_distance(b, o, ix);
    for (double lambda : {0.5, 2.0, 10.0}) {
      auto s = o;
      for (auto& v : s.ln_inputs) v += std::log(lambda);
      worst_scale = std::max(worst_scale, std::abs(ln_distance(b, s, ix) - base - std::log(lambda)));
    }
    double sum = 0.0;
    for (double v : elasticities(c, o).inputs) sum += v;
    worst_sum = std::max(worst_sum, std::abs(sum + 1.0));
  }
  return {worst_scale < 1e-10 && worst_sum < 1e-10,
          "max|lnD(y,lx)-lnD(y,x)-ln l|=" + fmt("%.1e", worst_scale) + " max|sum elas+1|=" + fmt("%.1e", worst_sum)};
}

Verdict gradient() {
  double worst = 0.0, max_censored = 0.0;
  int points = 0;
  for (double target : {0.10, 0.35}) {
    SimConfig cfg;
    cfg.seed = 31;
    cfg.censor_target = target;
    const auto p = make_panel(cfg);
    const double share = static_cast<double>(p.design.n_censored()) / static_cast<double>(p.design.n_obs());
    max_censored = std::max(max_censored, share);
    const auto rp = reparameterize(build_restrictions(p.spec, p.design.index), p.design.X.cols());
    TobitLikelihood like(p.design, rp);
    const Vector theta0 = rp.free_coordinates(p.draw.truth.beta);
    Rng rng(target > 0.2 ? 7 : 8);
    for (int k = 0; k < 10; ++k, ++points) {
      Vector x(rp.free_dim() + p.design.Z.cols());
      for (Eigen::Index i = 0; i < rp.free_dim(); ++i) x[i] = theta0[i] + rng.uniform(-0.1, 0.1);
      for (Eigen::Index i = rp.free_dim(); i < x.size(); ++i) x[i] = rng.uniform(-0.3, 0.3);
      x[rp.free_dim()] = std::log(0.0025) + rng.uniform(-1, 1);
      Vector g;
      like.value_and_gradient(x, g);
      Vector fd(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = 1e-6 * (1 + std::abs(x[j]));
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        fd[j] = (like.value(xp) - like.value(xm)) / (2 * h);
      }
      worst = std::max(worst, (g - fd).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>()));
    }
  }
  return {worst < 1e-6 && max_censored >= 0.30 && points == 20,
          std::to_string(points) + " points, max relative error " + fmt("%.1e", worst) + ", censored share up to " +
              fmt("%.2f", max_censored)};
}

Verdict noiseless_recovery() {
  SimConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.censor_target = 0.0;
  const auto p = make_panel(cfg);
  const auto f = fit(p.design, p.spec);
  const double err = (f.coefficients.beta - p.draw.truth.beta).lpNorm<Eigen::Infinity>();

  // nested fits on noisy panels
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SimConfig noisy;
    noisy.seed = seed;
    noisy.censor_target = 0.05;
    const auto q = make_panel(noisy);
    const auto fu = fit(q.design, q.spec);
    for (auto h : {Hypothesis::CobbDouglas, Hypothesis::ConstantReturns, Hypothesis::NoTechnicalChange}) {
      const auto nested = nest(q.spec, q.design.index, hypothesis_restrictions(h, q.spec));
      worst_gap = std::max(worst_gap, fit(q.design, nested.spec).loglik - fu.loglik);
    }
  }
  return {f.converged && err <= 1e-6 && p.design.n_censored() == 0 && worst_gap <= 1e-6,
          "19x10 sigma=0: max|beta-truth|=" + fmt("%.1e", err) + "; max(ll_r - ll_u) over 9 nested fits=" +
              fmt("%.2e", worst_gap)};
}

Verdict monte_carlo_recovery() {
  SimConfig cfg;
  cfg.noise_sigma = 0.05;
  cfg.censor_target = 0.05;
  const auto r = monte_carlo(cfg, 100);
  const bool ok = r.failed == 0 && r.median_abs_bias_first_order < 0.02 && r.coverage_first_order >= 0.85 &&
                  r.coverage_first_order <= 0.99 && r.mean_tei_correlation > 0.95;
  return {ok, "100 reps: median|bias|=" + fmt("%.4f", r.median_abs_bias_first_order) + " coverage=" +
                  fmt("%.3f", r.coverage_first_order) + " TEI corr mean=" + fmt("%.4f", r.mean_tei_correlation) +
                  " min=" + fmt("%.4f", r.min_tei_correlation) + " censored=" + fmt("%.3f", r.mean_censored_share) +
                  " failed=" + std::to_string(r.failed)};
}

Verdict decomposition() {
  double worst_tc = 0.0, worst_tfpg = 0.0, worst_se = 0.0;
  std::size_t records = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.spec.include_trend_squared = seed % 2 == 0;
    const auto p = make_panel(cfg);
    const auto f = fit(p.design, p.spec);
    for (const auto& c : {f.coefficients, p.draw.truth})
      for (const auto& r : tfpg_decompose(c, p.rows)) {
        ++records;
        worst_tc = std::max(worst_tc, std::abs(r.tc - (r.dtc + r.etc + r.stc)));
        if (r.tfpg) worst_tfpg = std::max(worst_tfpg, std::abs(*r.tfpg - (r.tc + *r.se)));
      }
  }
  // eps_Dy = 1 and flat output
  ModelSpec spec;
  spec.set_dummies(false);
  const auto ix = TermIndex::build(spec, {"A"});
  auto c = airline_reference_coefficients(ix, false);
  std::vector<TransformedObservation> rows(4, mean_point(3, 1));
  for (int t = 0; t < 4; ++t) {
    rows[t].firm_id = "A";
    rows[t].year = 2010 + t;
    rows[t].trend = t;
    rows[t].ln_output = 0.3;
    rows[t].ln_inputs = {0.2 * t, -0.1, 0.05 * t};
  }
  for (const auto& r : tfpg_decompose(c, rows))
    if (r.se) worst_se = std::max(worst_se, std::abs(*r.se));
  c = CoefficientSet::zeros(ix);
  c.beta[static_cast<Eigen::Index>(ix.output())] = -1.0;
  c.beta[static_cast<Eigen::Index>(ix.input(0))] = 1.0;
  for (int t = 0; t < 4; ++t) rows[t].ln_output = 0.1 * t * t;
  for (const auto& r : tfpg_decompose(c, rows))
    if (r.se) worst_se = std::max(worst_se, std::abs(*r.se));
  return {worst_tc <= 1e-12 && worst_tfpg <= 1e-12 && worst_se == 0.0,
          std::to_string(records) + " records: max|tc-sum|=" + fmt("%.1e", worst_tc) + " max|tfpg-tc-se|=" +
              fmt("%.1e", worst_tfpg) + " max|se| at eps_Dy=1 or dlny=0: " + fmt("%.1e", worst_se)};
}

Verdict lr_calibration() {
  SimConfig cfg;
  cfg.n_firms = 20;
  cfg.n_years = 25;
  cfg.censor_target = 0.05;
  cfg.spec.include_firm_dummies = false;
  const auto ix = sim_term_index(cfg);

  auto rejection_rate = [&](const CoefficientSet& truth) {
    int rejected = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      SimConfig c = cfg;
      c.seed = replication_seed(777, s);
      c.true_coefficients = truth;
      const auto p = make_panel(c);
      const auto fu = fit(p.design, p.spec);
      const auto t = specification_tests(p.design, p.spec, fu, {}, {Hypothesis::CobbDouglas});
      rejected += t.front().result.reject;
    }
    return rejected / 100.0;
  };
  const double size = rejection_rate(cobb_douglas_truth(ix));
  const double power = rejection_rate(airline_reference_coefficients(ix));
  double chi_err = 0.0;
  for (double x = 0.0; x <= 80.0; x += 0.01) chi_err = std::max(chi_err, std::abs(chisq_sf(x, 2) - std::exp(-x / 2)));
  return {size >= 0.01 && size <= 0.12 && power > 0.9 && chi_err <= 1e-10,
          "20x25 panel: size=" + fmt("%.2f", size) + " power=" + fmt("%.2f", power) +
              " max|chisq_sf(x,2)-exp(-x/2)|=" + fmt("%.1e", chi_err)};
}

Verdict ols_degeneracy() {
  SimConfig cfg;
  cfg.censor_target = 0.0;
  ModelSpec spec;
  spec.heteroskedastic = false;
  const auto p = make_panel(cfg, spec);
  const auto f = fit(p.design, p.spec);
  const auto rs = build_restrictions(p.spec, p.design.index);
  const auto np = p.design.X.cols(), m = rs.R.rows();
  Matrix K = Matrix::Zero(np + m, np + m);
  K.topLeftCorner(np, np) = p.design.X.transpose() * p.design.X;
  K.topRightCorner(np, m) = rs.R.transpose();
  K.bottomLeftCorner(m, np) = rs.R;
  Vector rhs(np + m);
  rhs << p.design.X.transpose() * p.design.y, rs.r;
  const Vector ls = K.fullPivLu().solve(rhs).head(np);
  const double err = (f.coefficients.beta - ls).lpNorm<Eigen::Infinity>();
  return {p.design.n_censored() == 0 && f.converged && err <= 1e-8,
          "0 censored, homoskedastic: max|beta_ML - beta_RLS|=" + fmt("%.1e", err)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext != ".csv" && ext != ".json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = os.str();
  }
  return out;
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "abstei_acceptance_determinism";
  const std::string cli = ABSTEI_CLI;
  std::vector<std::map<std::string, std::string>> runs;
  for (int k = 0; k < 2; ++k) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string sim = (dir / "sim").string(), out = (dir / "out").string();
    const std::string cmds[] = {cli + " simulate -q --seed 99 --reps 4 --out-dir " + sim,
                                cli + " report -q --charts --config " + sim + "/simulated.cfg --out-dir " + out,
                                cli + " efficiency -q --config " + sim + "/simulated.cfg --out-dir " + out,
                                cli + " tfpg -q --config " + sim + "/simulated.cfg --out-dir " + out};
    for (const auto& c : cmds) {
      const int st = std::system((c + " > /dev/null 2>&1").c_str());
      if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) return {false, "command failed: " + c};
    }
    runs.push_back(snapshot(dir));
  }
  // library path too
  SimConfig cfg;
  cfg.seed = 99;
  const auto a = make_panel(cfg), b = make_panel(cfg);
  const bool lib = dump(fit_to_json(fit(a.design, a.spec), a.spec)) == dump(fit_to_json(fit(b.design, b.spec), b.spec));
  fs::remove_all(dir);
  return {runs[0] == runs[1] && runs[0].size() >= 12 && lib,
          std::to_string(runs[0].size()) + " CSV/JSON files compared across two runs; in-process fit.json " +
              (lib ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "fixed-coefficient reproduction", 1.0, fixed_coefficients},
      {2, "linear homogeneity", 0.0, homogeneity},
      {3, "Tobit score vs finite differences", 0.0, gradient},
      {4, "noiseless recovery and nesting", 10.0, noiseless_recovery},
      {5, "Monte Carlo recovery", 300.0, monte_carlo_recovery},
      {6, "decomposition identities", 0.0, decomposition},
      {7, "LR test calibration", 0.0, lr_calibration},
      {8, "Tobit vs restricted least squares", 0.0, ols_degeneracy},
      {9, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      v.pass = false;
      v.detail += " (over the " + fmt("%.0f", c.budget_s) + " s budget)";
    }
    failed += !v.pass;
    std::printf("[%s] criterion %d: %s (%.2f s) %s\n", v.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
