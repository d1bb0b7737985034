#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "abstei/error.hpp"
#include "abstei/tobit.hpp"
#include "abstei/translog.hpp"

namespace abstei {

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
inline double chisq_sf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::InvalidSpec, "chi-square needs df >= 1");
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

enum class Hypothesis { CobbDouglas, ConstantReturns, NoTechnicalChange };

inline Hypothesis parse_hypothesis(const std::string& name) {
  if (name == "CobbDouglas" || name == "cobb-douglas") return Hypothesis::CobbDouglas;
  if (name == "CRS" || name == "crs") return Hypothesis::ConstantReturns;
  if (name == "NoTechChange" || name == "no-tech-change") return Hypothesis::NoTechnicalChange;
  throw Error(ErrorCode::UnknownHypothesis, "unknown hypothesis '" + name + "'");
}

inline std::string hypothesis_key(Hypothesis h) {
  switch (h) {
    case Hypothesis::CobbDouglas: return "CobbDouglas";
    case Hypothesis::ConstantReturns: return "CRS";
    case Hypothesis::NoTechnicalChange: return "NoTechChange";
  }
  return "";
}

inline std::string hypothesis_title(Hypothesis h) {
  switch (h) {
    case Hypothesis::CobbDouglas: return "Cobb-Douglas Functional Form";
    case Hypothesis::ConstantReturns: return "Constant Returns to Scale";
    case Hypothesis::NoTechnicalChange: return "No Technical Change";
  }
  return "";
}

/// Restriction rows of a null hypothesis, in structural coordinates. Terms the
/// spec does not carry (trend squared, event dummies) are skipped.
inline std::vector<LinearRestriction> hypothesis_restrictions(Hypothesis h, const ModelSpec& spec) {
  const TermIndex ix = TermIndex::build(spec, {});
  const int n = static_cast<int>(ix.n_inputs());
  std::vector<LinearRestriction> rows;
  auto zero = [&](std::size_t pos) { rows.push_back({{{ix.name(pos), 1.0}}, 0.0, ix.name(pos) + " = 0"}); };
  auto zero_opt = [&](std::optional<std::size_t> pos) {
    if (pos) zero(*pos);
  };

  switch (h) {
    case Hypothesis::CobbDouglas:
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) zero(ix.input_input(j, k));
      for (int j = 0; j < n; ++j) zero(ix.input_output(j));
      zero(ix.output_sq());
      zero(ix.trend_output());
      zero_opt(ix.trend_sq());
      break;
    case Hypothesis::ConstantReturns:
      rows.push_back({{{ix.name(ix.output()), 1.0}}, -1.0, ix.name(ix.output()) + " = -1"});
      for (int j = 0; j < n; ++j) zero(ix.input_output(j));
      zero(ix.output_sq());
      zero(ix.trend_output());
      break;
    case Hypothesis::NoTechnicalChange:
      zero(ix.trend());
      for (int j = 0; j < n; ++j) zero(ix.trend_input(j));
      zero(ix.trend_output());
      zero_opt(ix.trend_sq());
      zero_opt(ix.brexit());
      zero_opt(ix.covid());
      break;
  }
  return rows;
}

namespace detail {
inline Matrix augmented(const RestrictionSet& rs) {
  Matrix A(rs.R.rows(), rs.R.cols() + 1);
  if (rs.R.rows() > 0) A << rs.R, rs.r;
  return A;
}
}  // namespace detail

struct NestedSpec {
  ModelSpec spec;
  int df = 0;
  std::vector<std::string> dropped;  // hypothesis rows already implied by the base restrictions
};

/// Appends the hypothesis rows that are independent of the base restrictions.
/// df is the resulting rank increase.
inline NestedSpec nest(const ModelSpec& base, const TermIndex& index, const std::vector<LinearRestriction>& rows) {
  NestedSpec out;
  out.spec = base;
  RestrictionSet rs = build_restrictions(base, index);
  const auto base_rank = rs.rows();
  for (const auto& lr : rows) {
    const Vector row = restriction_row(lr, index);
    RestrictionSet trial = rs;
    append_row(trial, row, lr.rhs, lr.label);
    if (numerical_rank(trial.R) > numerical_rank(rs.R)) {
      rs = std::move(trial);
      out.spec.extra_restrictions.push_back(lr);
    } else if (numerical_rank(detail::augmented(trial)) > numerical_rank(detail::augmented(rs))) {
      throw Error(ErrorCode::InconsistentRestrictions, "restriction '" + lr.label + "' contradicts the others");
    } else {
      out.dropped.push_back(lr.label);
    }
  }
  out.df = static_cast<int>(rs.rows() - base_rank);
  return out;
}

struct LrTestResult {
  std::string name;
  double stat = 0.0;
  int df = 1;
  double p_value = 1.0;
  bool reject = false;  // at the 5% level
  double loglik_unrestricted = 0.0;
  double loglik_restricted = 0.0;
  bool clamped = false;  // raw statistic was slightly negative and set to zero
};

inline LrTestResult lr_test(const std::string& name, double loglik_u, double loglik_r, int df) {
  if (df < 1) throw Error(ErrorCode::InvalidSpec, "likelihood-ratio test needs df >= 1");
  LrTestResult t;
  t.name = name;
  t.df = df;
  t.loglik_unrestricted = loglik_u;
  t.loglik_restricted = loglik_r;
  const double raw = 2.0 * (loglik_u - loglik_r);
  if (raw < -1e-6)
    throw Error(ErrorCode::NotNested, "restricted fit has a higher log-likelihood than the unrestricted one (" +
                                          format_double(raw) + "): optimizer failure");
  t.clamped = raw < 0.0;
  t.stat = t.clamped ? 0.0 : raw;
  t.p_value = chisq_sf(t.stat, df);
  t.reject = t.p_value < 0.05;
  return t;
}

/// True when every restriction of `inner` is implied by `outer` and `outer` is strictly larger.
inline bool strictly_contains(const RestrictionSet& outer, const RestrictionSet& inner) {
  if (outer.R.cols() != inner.R.cols() && inner.rows() > 0 && outer.rows() > 0) return false;
  const auto a_out = detail::augmented(outer);
  if (inner.rows() > 0) {
    Matrix stacked(a_out.rows() + inner.rows(), a_out.cols());
    stacked << a_out, detail::augmented(inner);
    if (numerical_rank(stacked) > numerical_rank(a_out)) return false;
  }
  return numerical_rank(outer.R) > (inner.rows() > 0 ? numerical_rank(inner.R) : 0);
}

inline LrTestResult lr_test(const FitResult& fit_u, const FitResult& fit_r, int df, const std::string& name = "") {
  if (!strictly_contains(fit_r.restrictions, fit_u.restrictions))
    throw Error(ErrorCode::NotNested, "restricted model's restrictions do not contain the unrestricted model's");
  return lr_test(name, fit_u.loglik, fit_r.loglik, df);
}

struct SpecificationTest {
  Hypothesis hypothesis;
  LrTestResult result;
  FitResult restricted_fit;
  std::vector<std::string> implied_rows;
};

/// Fits each null model and tests it against `unrestricted`.
inline std::vector<SpecificationTest> specification_tests(const DesignMatrix& design, const ModelSpec& spec,
                                                          const FitResult& unrestricted,
                                                          const OptimOptions& opts = {},
                                                          std::vector<Hypothesis> hypotheses = {
                                                              Hypothesis::CobbDouglas, Hypothesis::ConstantReturns,
                                                              Hypothesis::NoTechnicalChange}) {
  std::vector<SpecificationTest> out;
  for (auto h : hypotheses) {
    const NestedSpec nested = nest(spec, design.index, hypothesis_restrictions(h, spec));
    SpecificationTest t{h, {}, fit(design, nested.spec, opts), nested.dropped};
    t.result = lr_test(unrestricted, t.restricted_fit, nested.df, hypothesis_title(h));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace abstei
