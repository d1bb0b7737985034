#include <gtest/gtest.h>

#include "support.hpp"

using namespace abstei;

namespace {

// Literal translog: full symmetric second-order matrix, no folding.
double literal_ln_distance(const CoefficientSet& c, const TransformedObservation& o) {
  const int n = static_cast<int>(o.ln_inputs.size());
  const double ly = o.ln_output, t = o.trend;
  double v = c.constant() + c.output() * ly + 0.5 * c.output_sq() * ly * ly;
  for (int j = 0; j < n; ++j) {
    const double lx = o.ln_inputs[static_cast<std::size_t>(j)];
    v += c.input(j) * lx + c.input_output(j) * lx * ly + c.trend_input(j) * t * lx;
    for (int k = 0; k < n; ++k) v += 0.5 * c.input_input(j, k) * lx * o.ln_inputs[static_cast<std::size_t>(k)];
  }
  v += c.trend() * t + c.trend_output() * t * ly + 0.5 * c.trend_sq() * t * t;
  for (std::size_t i = 0; i < o.firm_dummies.size(); ++i)
    if (auto p = c.index.firm(static_cast<int>(i))) v += c.at(*p) * o.firm_dummies[i];
  v += c.brexit() * o.brexit_dummy + c.covid() * o.covid_dummy;
  return v;
}

std::vector<std::string> three_firms() { return {"A", "B", "C"}; }

}  // namespace

TEST(TermIndex, NamingContract) {
  ModelSpec spec;
  const auto ix = TermIndex::build(spec, three_firms());
  const std::vector<std::string> expected = {
      "Constant",    "Ln y",        "Ln K",       "Ln L",      "Ln E",        ".5 (Ln y)^2", "ln K ln y",
      "ln L ln y",   "ln E ln y",   ".5 (ln K)^2", "ln K ln L", "ln K ln E",   ".5 (ln L)^2", "ln L ln E",
      ".5 (ln E)^2", "t",           "t ln y",     "t ln K",    "t ln L",      "t ln E",      "z1",
      "z2",          "Brexit",      "Covid"};
  EXPECT_EQ(ix.names(), expected);
  EXPECT_EQ(ix.reference_firm(), "A");
  EXPECT_EQ(ix.dummy_firms(), (std::vector<std::string>{"B", "C"}));
  EXPECT_EQ(ix.input_input(2, 0), ix.input_input(0, 2));
}

TEST(TermIndex, OptionalTerms) {
  ModelSpec spec;
  spec.include_trend_squared = true;
  spec.set_dummies(false);
  const auto ix = TermIndex::build(spec, three_firms());
  EXPECT_EQ(ix.size(), 21u);
  EXPECT_EQ(ix.names().back(), ".5 t^2");
  EXPECT_FALSE(ix.brexit());
  EXPECT_FALSE(ix.firm(0));
  EXPECT_THROW(ix.position("Covid"), Error);
}

TEST(TermIndex, DuplicateInputsRejected) {
  ModelSpec spec;
  spec.input_names = {"K", "K"};
  EXPECT_THROW(TermIndex::build(spec, {}), Error);
}

TEST(Translog, MatchesLiteralFormula) {
  Rng rng(5);
  for (bool t2 : {false, true}) {
    ModelSpec spec;
    spec.include_trend_squared = t2;
    const auto ix = TermIndex::build(spec, three_firms());
    for (int rep = 0; rep < 50; ++rep) {
      auto c = CoefficientSet::zeros(ix);
      for (Eigen::Index i = 0; i < c.beta.size(); ++i) c.beta[i] = rng.uniform(-1, 1);
      const auto o = fixtures::random_observation(rng, 3, 3);
      EXPECT_NEAR(ln_distance(c.beta, o, ix), literal_ln_distance(c, o), 1e-12);
    }
  }
}

TEST(Translog, DesignRowsAreExpandedObservations) {
  auto p = fixtures::make_panel(fixtures::small_config());
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    EXPECT_TRUE(p.design.X.row(k).transpose().isApprox(expand_row(p.rows[i], p.design.index)));
    EXPECT_EQ(p.design.y[k], p.rows[i].ln_distance);
    EXPECT_EQ(p.design.censored[i] != 0, p.rows[i].is_censored);
  }
  EXPECT_EQ(p.design.Z.cols(), 6);  // constant, 3 inputs, output, trend
  EXPECT_EQ(p.design.het_names.front(), "Constant");
}

TEST(Translog, HomoskedasticVarianceHasOnlyConstant) {
  auto cfg = fixtures::small_config();
  ModelSpec spec;
  spec.heteroskedastic = false;
  auto p = fixtures::make_panel(cfg, spec);
  EXPECT_EQ(p.design.Z.cols(), 1);
  EXPECT_TRUE((p.design.Z.array() == 1.0).all());
}

TEST(Restrictions, HomogeneityRowsAndReparameterization) {
  ModelSpec spec;
  const auto ix = TermIndex::build(spec, three_firms());
  const auto rs = build_restrictions(spec, ix);
  EXPECT_EQ(rs.rows(), 6);
  const auto rp = reparameterize(rs, static_cast<Eigen::Index>(ix.size()));
  EXPECT_EQ(rp.free_dim(), static_cast<Eigen::Index>(ix.size()) - 6);
  EXPECT_TRUE((rp.basis.transpose() * rp.basis).isIdentity(1e-12));
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    Vector theta(rp.free_dim());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-3, 3);
    const Vector beta = rp.structural(theta);
    EXPECT_LT(rs.residual(beta), 1e-12);
    EXPECT_TRUE(rp.free_coordinates(beta).isApprox(theta, 1e-12));
  }
}

TEST(Restrictions, NoRestrictionsGivesIdentity) {
  ModelSpec spec;
  spec.impose_homogeneity = false;
  const auto ix = TermIndex::build(spec, {});
  const auto rs = build_restrictions(spec, ix);
  const auto rp = reparameterize(rs, static_cast<Eigen::Index>(ix.size()));
  EXPECT_EQ(rp.free_dim(), static_cast<Eigen::Index>(ix.size()));
  EXPECT_TRUE(rp.particular.isZero());
}

TEST(Restrictions, RankDeficientExtraRowsRejected) {
  ModelSpec spec;
  // implied by homogeneity: sum of trend-input terms = 0
  spec.extra_restrictions.push_back({{{"t ln K", 1}, {"t ln L", 1}, {"t ln E", 1}}, 0.0, "dup"});
  const auto ix = TermIndex::build(spec, {});
  try {
    build_restrictions(spec, ix);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficientRestrictions);
  }
}

TEST(Restrictions, ProjectionIsClosestFeasiblePoint) {
  ModelSpec spec;
  const auto ix = TermIndex::build(spec, three_firms());
  const auto rs = homogeneity_restrictions(ix);
  Rng rng(2);
  Vector b(static_cast<Eigen::Index>(ix.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-1, 1);
  const Vector p = project_onto(rs, b);
  EXPECT_LT(rs.residual(p), 1e-12);
  // b - p lies in the row space of R
  const Vector lambda = rs.R.transpose().colPivHouseholderQr().solve(b - p);
  EXPECT_LT((rs.R.transpose() * lambda - (b - p)).norm(), 1e-10);
}

TEST(Restrictions, HomogeneityHoldsForRestrictedCoefficients) {
  Rng rng(77);
  ModelSpec spec;
  spec.include_trend_squared = true;
  const auto ix = TermIndex::build(spec, three_firms());
  for (int rep = 0; rep < 30; ++rep) {
    const Vector b = fixtures::random_restricted_beta(ix, rng);
    auto o = fixtures::random_observation(rng, 3, 3);
    const double base = ln_distance(b, o, ix);
    for (double lambda : {0.5, 2.0, 10.0}) {
      auto s = o;
      for (auto& v : s.ln_inputs) v += std::log(lambda);
      EXPECT_NEAR(ln_distance(b, s, ix) - base, std::log(lambda), 1e-10);
    }
  }
}

TEST(Translog, EmptyEventDummiesDropped) {
  auto cfg = fixtures::small_config();
  cfg.n_european = 0;
  const auto draw = generate(cfg);
  const auto rows = transform(draw.data, {});
  const auto spec = drop_empty_dummies(ModelSpec{}, rows);
  EXPECT_FALSE(spec.include_brexit);
  EXPECT_FALSE(spec.include_covid);
  EXPECT_TRUE(spec.include_firm_dummies);
}
