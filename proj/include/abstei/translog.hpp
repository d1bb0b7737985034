#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abstei/error.hpp"
#include "abstei/panel.hpp"

namespace abstei {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A linear restriction sum_i w_i * beta[name_i] = rhs, addressed by term name.
struct LinearRestriction {
  std::vector<std::pair<std::string, double>> weights;
  double rhs = 0.0;
  std::string label;
};

/// Declarative description of the translog distance model.
struct ModelSpec {
  std::vector<std::string> input_names{"K", "L", "E"};
  bool include_trend_squared = false;
  bool include_firm_dummies = true;
  bool include_brexit = true;
  bool include_covid = true;
  bool heteroskedastic = true;
  bool impose_homogeneity = true;
  /// Term names of the variance equation; empty selects constant, ln inputs, ln output, trend.
  std::vector<std::string> het_regressors;
  std::vector<LinearRestriction> extra_restrictions;

  void set_dummies(bool on) { include_firm_dummies = include_brexit = include_covid = on; }

  void validate() const {
    if (input_names.empty()) throw Error(ErrorCode::InvalidSpec, "model needs at least one input");
    auto sorted = input_names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorCode::InvalidSpec, "duplicate input name");
  }
};

enum class TermKind {
  Constant,
  Output,
  Input,
  OutputSq,
  InputOutput,
  InputInput,
  Trend,
  TrendOutput,
  TrendInput,
  TrendSq,
  Firm,
  Brexit,
  Covid,
};

struct Term {
  TermKind kind;
  int a = -1;  // input index, or firm-dummy index
  int b = -1;  // second input index for InputInput (a <= b)
  std::string name;
};

/// Named positions of every coefficient. Ordering follows the usual
/// estimates table: constant, first order, output block, input block, trend block, dummies.
class TermIndex {
 public:
  TermIndex() = default;

  static TermIndex build(const ModelSpec& spec, const std::vector<std::string>& firms) {
    spec.validate();
    TermIndex ix;
    ix.input_names_ = spec.input_names;
    const int n = static_cast<int>(spec.input_names.size());
    const auto& in = spec.input_names;
    ix.add({TermKind::Constant, -1, -1, "Constant"});
    ix.add({TermKind::Output, -1, -1, "Ln y"});
    for (int j = 0; j < n; ++j) ix.add({TermKind::Input, j, -1, "Ln " + in[j]});
    ix.add({TermKind::OutputSq, -1, -1, ".5 (Ln y)^2"});
    for (int j = 0; j < n; ++j) ix.add({TermKind::InputOutput, j, -1, "ln " + in[j] + " ln y"});
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k)
        ix.add({TermKind::InputInput, j, k,
                j == k ? ".5 (ln " + in[j] + ")^2" : "ln " + in[j] + " ln " + in[k]});
    ix.add({TermKind::Trend, -1, -1, "t"});
    ix.add({TermKind::TrendOutput, -1, -1, "t ln y"});
    for (int j = 0; j < n; ++j) ix.add({TermKind::TrendInput, j, -1, "t ln " + in[j]});
    if (spec.include_trend_squared) ix.add({TermKind::TrendSq, -1, -1, ".5 t^2"});
    if (!firms.empty()) ix.reference_firm_ = firms.front();
    if (spec.include_firm_dummies) {
      for (std::size_t i = 1; i < firms.size(); ++i) {
        ix.add({TermKind::Firm, static_cast<int>(i - 1), -1, "z" + std::to_string(i)});
        ix.dummy_firms_.push_back(firms[i]);
      }
    }
    if (spec.include_brexit) ix.add({TermKind::Brexit, -1, -1, "Brexit"});
    if (spec.include_covid) ix.add({TermKind::Covid, -1, -1, "Covid"});
    return ix;
  }

  std::size_t size() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }
  const Term& term(std::size_t i) const { return terms_.at(i); }
  const std::string& name(std::size_t i) const { return terms_.at(i).name; }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& t : terms_) out.push_back(t.name);
    return out;
  }
  std::size_t n_inputs() const { return input_names_.size(); }
  const std::vector<std::string>& input_names() const { return input_names_; }
  /// Firm ids carried by z1, z2, ... (all firms except the reference).
  const std::vector<std::string>& dummy_firms() const { return dummy_firms_; }
  const std::string& reference_firm() const { return reference_firm_; }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (terms_[i].name == name) return i;
    return std::nullopt;
  }
  std::size_t position(const std::string& name) const {
    auto p = find(name);
    if (!p) throw Error(ErrorCode::InvalidSpec, "unknown model term '" + name + "'");
    return *p;
  }

  std::optional<std::size_t> find(TermKind kind, int a = -1, int b = -1) const {
    if (kind == TermKind::InputInput && a > b) std::swap(a, b);
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (terms_[i].kind == kind && terms_[i].a == a && terms_[i].b == b) return i;
    return std::nullopt;
  }

  std::size_t constant() const { return *find(TermKind::Constant); }
  std::size_t output() const { return *find(TermKind::Output); }
  std::size_t input(int j) const { return *find(TermKind::Input, j); }
  std::size_t output_sq() const { return *find(TermKind::OutputSq); }
  std::size_t input_output(int j) const { return *find(TermKind::InputOutput, j); }
  std::size_t input_input(int j, int k) const { return *find(TermKind::InputInput, j, k); }
  std::size_t trend() const { return *find(TermKind::Trend); }
  std::size_t trend_output() const { return *find(TermKind::TrendOutput); }
  std::size_t trend_input(int j) const { return *find(TermKind::TrendInput, j); }
  std::optional<std::size_t> trend_sq() const { return find(TermKind::TrendSq); }
  std::optional<std::size_t> firm(int i) const { return find(TermKind::Firm, i); }
  std::optional<std::size_t> brexit() const { return find(TermKind::Brexit); }
  std::optional<std::size_t> covid() const { return find(TermKind::Covid); }

  friend bool operator==(const TermIndex& a, const TermIndex& b) { return a.names() == b.names(); }

 private:
  void add(Term t) { terms_.push_back(std::move(t)); }

  std::vector<Term> terms_;
  std::vector<std::string> input_names_;
  std::vector<std::string> dummy_firms_;
  std::string reference_firm_;
};

/// Regressor value of one term at one observation.
inline double term_value(const Term& t, const TransformedObservation& o) {
  switch (t.kind) {
    case TermKind::Constant: return 1.0;
    case TermKind::Output: return o.ln_output;
    case TermKind::Input: return o.ln_inputs[t.a];
    case TermKind::OutputSq: return 0.5 * o.ln_output * o.ln_output;
    case TermKind::InputOutput: return o.ln_inputs[t.a] * o.ln_output;
    case TermKind::InputInput:
      return t.a == t.b ? 0.5 * o.ln_inputs[t.a] * o.ln_inputs[t.a] : o.ln_inputs[t.a] * o.ln_inputs[t.b];
    case TermKind::Trend: return o.trend;
    case TermKind::TrendOutput: return o.trend * o.ln_output;
    case TermKind::TrendInput: return o.trend * o.ln_inputs[t.a];
    case TermKind::TrendSq: return 0.5 * o.trend * o.trend;
    case TermKind::Firm: return static_cast<double>(o.firm_dummies.at(t.a));
    case TermKind::Brexit: return static_cast<double>(o.brexit_dummy);
    case TermKind::Covid: return static_cast<double>(o.covid_dummy);
  }
  return 0.0;
}

/// Translog regressor row; symmetric cross terms appear once, squares carry the 0.5.
inline Vector expand_row(const TransformedObservation& obs, const TermIndex& index) {
  if (obs.ln_inputs.size() != index.n_inputs())
    throw Error(ErrorCode::DimensionMismatch, "observation input count does not match the model");
  Vector row(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) row[i] = term_value(index.term(i), obs);
  return row;
}

inline double ln_distance(const Vector& beta, const TransformedObservation& obs, const TermIndex& index) {
  return expand_row(obs, index).dot(beta);
}

/// Variance-equation term names selected by the spec.
inline std::vector<std::string> het_term_names(const ModelSpec& spec, const TermIndex& index) {
  if (!spec.het_regressors.empty()) {
    for (const auto& n : spec.het_regressors) index.position(n);
    return spec.het_regressors;
  }
  std::vector<std::string> names{index.name(index.constant())};
  for (std::size_t j = 0; j < index.n_inputs(); ++j) names.push_back(index.name(index.input(static_cast<int>(j))));
  names.push_back(index.name(index.output()));
  names.push_back(index.name(index.trend()));
  return names;
}

struct DesignMatrix {
  TermIndex index;
  Matrix X;                            // n x p regressors
  Vector y;                            // observed ln D (0 where censored)
  std::vector<unsigned char> censored; // 1 where lf == 1
  Matrix Z;                            // n x h variance regressors (one constant column if homoskedastic)
  std::vector<std::string> het_names;
  std::vector<TransformedObservation> rows;

  std::size_t n_obs() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t n_censored() const {
    return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1));
  }
};

inline DesignMatrix build_design(const std::vector<TransformedObservation>& rows, const ModelSpec& spec,
                                 const std::vector<std::string>& firms) {
  if (rows.empty()) throw Error(ErrorCode::InvalidSpec, "design needs at least one observation");
  DesignMatrix d;
  d.index = TermIndex::build(spec, firms);
  for (const auto& r : rows)
    if (r.firm_dummies.size() + 1 != firms.size())
      throw Error(ErrorCode::DimensionMismatch, "firm dummy width does not match the firm list");
  d.het_names = spec.heteroskedastic ? het_term_names(spec, d.index) : std::vector<std::string>{"Constant"};
  std::vector<std::size_t> het_pos;
  for (const auto& n : d.het_names) het_pos.push_back(d.index.position(n));

  const auto n = static_cast<Eigen::Index>(rows.size());
  d.X.resize(n, static_cast<Eigen::Index>(d.index.size()));
  d.y.resize(n);
  d.Z.resize(n, static_cast<Eigen::Index>(het_pos.size()));
  d.censored.resize(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    Vector row = expand_row(r, d.index);
    d.X.row(i) = row.transpose();
    d.y[i] = r.ln_distance;
    d.censored[static_cast<std::size_t>(i)] = r.is_censored ? 1 : 0;
    for (std::size_t k = 0; k < het_pos.size(); ++k) d.Z(i, static_cast<Eigen::Index>(k)) = row[het_pos[k]];
  }
  d.rows = rows;
  return d;
}

/// Turns off event dummies that never switch on in the data (their columns would be all zero).
inline ModelSpec drop_empty_dummies(ModelSpec spec, const std::vector<TransformedObservation>& rows) {
  bool any_b = false, any_c = false;
  for (const auto& r : rows) {
    any_b = any_b || r.brexit_dummy != 0;
    any_c = any_c || r.covid_dummy != 0;
  }
  if (!any_b) spec.include_brexit = false;
  if (!any_c) spec.include_covid = false;
  return spec;
}

// ---------------------------------------------------------------------------
// Linear restrictions R * beta = r.

inline double default_rank_tolerance(const Eigen::JacobiSVD<Matrix>& svd, Eigen::Index rows, Eigen::Index cols) {
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s[0] : 0.0;
  return std::max<double>(static_cast<double>(std::max(rows, cols)) * smax * 1e-12, 1e-14);
}

inline Eigen::Index numerical_rank(const Matrix& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const double tol = default_rank_tolerance(svd, A.rows(), A.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

struct RestrictionSet {
  Matrix R;  // m x p
  Vector r;  // m
  std::vector<std::string> labels;

  Eigen::Index rows() const { return R.rows(); }
  double residual(const Vector& beta) const {
    if (R.rows() == 0) return 0.0;
    return (R * beta - r).lpNorm<Eigen::Infinity>();
  }
};

inline void append_row(RestrictionSet& rs, const Vector& row, double rhs, std::string label) {
  const auto m = rs.R.rows();
  Matrix R(m + 1, row.size());
  if (m > 0) R.topRows(m) = rs.R;
  R.row(m) = row.transpose();
  Vector r(m + 1);
  if (m > 0) r.head(m) = rs.r;
  r[m] = rhs;
  rs.R = std::move(R);
  rs.r = std::move(r);
  rs.labels.push_back(std::move(label));
}

inline Vector restriction_row(const LinearRestriction& lr, const TermIndex& index) {
  Vector row = Vector::Zero(static_cast<Eigen::Index>(index.size()));
  for (const auto& [name, w] : lr.weights) row[static_cast<Eigen::Index>(index.position(name))] += w;
  return row;
}

/// Linear homogeneity of degree one in inputs: sum b_j = 1, sum_j b_jk = 0 for every k,
/// sum_j b_jy = 0, sum_j b_jt = 0.
inline RestrictionSet homogeneity_restrictions(const TermIndex& index) {
  RestrictionSet rs;
  rs.R.resize(0, static_cast<Eigen::Index>(index.size()));
  const int n = static_cast<int>(index.n_inputs());
  const auto p = static_cast<Eigen::Index>(index.size());
  Vector row = Vector::Zero(p);
  for (int j = 0; j < n; ++j) row[static_cast<Eigen::Index>(index.input(j))] = 1.0;
  append_row(rs, row, 1.0, "sum of input coefficients = 1");
  for (int k = 0; k < n; ++k) {
    row.setZero();
    for (int j = 0; j < n; ++j) row[static_cast<Eigen::Index>(index.input_input(j, k))] = 1.0;
    append_row(rs, row, 0.0, "sum_j " + index.input_names()[k] + " cross terms = 0");
  }
  row.setZero();
  for (int j = 0; j < n; ++j) row[static_cast<Eigen::Index>(index.input_output(j))] = 1.0;
  append_row(rs, row, 0.0, "sum of input-output terms = 0");
  row.setZero();
  for (int j = 0; j < n; ++j) row[static_cast<Eigen::Index>(index.trend_input(j))] = 1.0;
  append_row(rs, row, 0.0, "sum of input-trend terms = 0");
  return rs;
}

inline void require_full_row_rank(const RestrictionSet& rs) {
  if (rs.rows() == 0) return;
  const auto rank = numerical_rank(rs.R);
  if (rank < rs.rows())
    throw Error(ErrorCode::RankDeficientRestrictions, "restriction matrix has rank " + std::to_string(rank) +
                                                          " but " + std::to_string(rs.rows()) + " rows");
}

inline RestrictionSet build_restrictions(const ModelSpec& spec, const TermIndex& index) {
  RestrictionSet rs;
  if (spec.impose_homogeneity) {
    rs = homogeneity_restrictions(index);
  } else {
    rs.R.resize(0, static_cast<Eigen::Index>(index.size()));
    rs.r.resize(0);
  }
  for (const auto& lr : spec.extra_restrictions) append_row(rs, restriction_row(lr, index), lr.rhs, lr.label);
  require_full_row_rank(rs);
  return rs;
}

/// beta = particular + basis * theta satisfies the restrictions for every theta.
struct Reparameterization {
  Vector particular;
  Matrix basis;  // p x q, orthonormal columns spanning null(R)

  Eigen::Index free_dim() const { return basis.cols(); }
  Vector structural(const Vector& theta) const { return particular + basis * theta; }
  /// Free coordinates of a beta that already satisfies the restrictions.
  Vector free_coordinates(const Vector& beta) const { return basis.transpose() * (beta - particular); }
};

inline Reparameterization reparameterize(const RestrictionSet& rs, Eigen::Index dim) {
  if (rs.rows() > 0 && rs.R.cols() != dim)
    throw Error(ErrorCode::DimensionMismatch, "restriction matrix width does not match the coefficient count");
  Reparameterization rp;
  if (rs.rows() == 0) {
    rp.particular = Vector::Zero(dim);
    rp.basis = Matrix::Identity(dim, dim);
    return rp;
  }
  Eigen::JacobiSVD<Matrix> svd(rs.R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double tol = default_rank_tolerance(svd, rs.R.rows(), rs.R.cols());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++rank;
  if (rank < rs.rows())
    throw Error(ErrorCode::RankDeficientRestrictions, "restriction matrix is rank deficient");
  const Matrix& V = svd.matrixV();
  const Matrix& U = svd.matrixU();
  Vector coef = (U.leftCols(rank).transpose() * rs.r).cwiseQuotient(svd.singularValues().head(rank));
  rp.particular = V.leftCols(rank) * coef;
  rp.basis = V.rightCols(dim - rank);
  return rp;
}

/// Closest point (Euclidean) to beta satisfying the restrictions.
inline Vector project_onto(const RestrictionSet& rs, const Vector& beta) {
  if (rs.rows() == 0) return beta;
  Vector gap = rs.R * beta - rs.r;
  Vector mult = (rs.R * rs.R.transpose()).ldlt().solve(gap);
  return beta - rs.R.transpose() * mult;
}

}  // namespace abstei
