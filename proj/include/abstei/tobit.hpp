#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abstei/bfgs.hpp"
#include "abstei/error.hpp"
#include "abstei/normal.hpp"
#include "abstei/translog.hpp"

namespace abstei {

/// Structural coefficients (TermIndex order) plus the variance-equation vector.
struct CoefficientSet {
  TermIndex index;
  Vector beta;
  std::vector<std::string> het_names;
  Vector alpha;

  static CoefficientSet zeros(const TermIndex& index) {
    CoefficientSet c;
    c.index = index;
    c.beta = Vector::Zero(static_cast<Eigen::Index>(index.size()));
    return c;
  }

  /// Unlisted terms are zero; unknown names throw.
  static CoefficientSet from_named(const TermIndex& index, const std::map<std::string, double>& values) {
    auto c = zeros(index);
    for (const auto& [name, v] : values) c.beta[static_cast<Eigen::Index>(index.position(name))] = v;
    return c;
  }

  double operator[](const std::string& name) const {
    return beta[static_cast<Eigen::Index>(index.position(name))];
  }
  double at(std::size_t pos) const { return beta[static_cast<Eigen::Index>(pos)]; }
  double at(std::optional<std::size_t> pos) const { return pos ? at(*pos) : 0.0; }

  double constant() const { return at(index.constant()); }
  double output() const { return at(index.output()); }
  double input(int j) const { return at(index.input(j)); }
  double output_sq() const { return at(index.output_sq()); }
  double input_output(int j) const { return at(index.input_output(j)); }
  double input_input(int j, int k) const { return at(index.input_input(j, k)); }
  double trend() const { return at(index.trend()); }
  double trend_output() const { return at(index.trend_output()); }
  double trend_input(int j) const { return at(index.trend_input(j)); }
  double trend_sq() const { return at(index.trend_sq()); }
  double brexit() const { return at(index.brexit()); }
  double covid() const { return at(index.covid()); }
};

/// Type-I Tobit log-likelihood, left-censored at ln D = 0, with
/// sigma_i^2 = exp(Z_i alpha). Parameters are stacked as (theta, alpha).
class TobitLikelihood {
 public:
  TobitLikelihood(const DesignMatrix& design, const Reparameterization& reparam)
      : XN_(design.X * reparam.basis),
        offset_(design.X * reparam.particular),
        y_(design.y),
        censored_(design.censored),
        Z_(design.Z) {
    if (design.X.cols() != reparam.particular.size())
      throw Error(ErrorCode::DimensionMismatch, "design and restrictions disagree on coefficient count");
    if (design.X.rows() == 0) throw Error(ErrorCode::InvalidSpec, "empty design");
  }

  Eigen::Index n_theta() const { return XN_.cols(); }
  Eigen::Index n_alpha() const { return Z_.cols(); }
  Eigen::Index n_params() const { return n_theta() + n_alpha(); }

  double value(const Vector& params) const { return evaluate(params, nullptr); }

  double value_and_gradient(const Vector& params, Vector& grad) const { return evaluate(params, &grad); }

 private:
  double evaluate(const Vector& params, Vector* grad) const {
    if (params.size() != n_params())
      throw Error(ErrorCode::DimensionMismatch, "parameter vector has the wrong length");
    const auto theta = params.head(n_theta());
    const auto alpha = params.tail(n_alpha());
    const Vector mu = offset_ + XN_ * theta;
    const Vector h = Z_ * alpha;
    const auto n = y_.size();

    Vector d_mu, d_h;
    if (grad) {
      d_mu.resize(n);
      d_h.resize(n);
    }
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double var = std::exp(h[i]);
      if (!std::isfinite(h[i]) || !(var > 0.0) || !std::isfinite(var) || !std::isfinite(mu[i]))
        throw Error(ErrorCode::NonFiniteLikelihood, "variance or index not finite");
      if (censored_[static_cast<std::size_t>(i)]) {
        const double sigma = std::sqrt(var);
        const double c = -mu[i] / sigma;
        ll += normal::log_cdf(c);
        if (grad) {
          const double lam = normal::mills(c);
          d_mu[i] = -lam / sigma;
          d_h[i] = -0.5 * lam * c;
        }
      } else {
        const double e = y_[i] - mu[i];
        ll += -0.5 * (std::log(2.0 * std::numbers::pi) + h[i]) - 0.5 * e * e / var;
        if (grad) {
          d_mu[i] = e / var;
          d_h[i] = -0.5 + 0.5 * e * e / var;
        }
      }
    }
    if (!std::isfinite(ll)) throw Error(ErrorCode::NonFiniteLikelihood, "log-likelihood not finite");
    if (grad) {
      grad->resize(n_params());
      grad->head(n_theta()) = XN_.transpose() * d_mu;
      grad->tail(n_alpha()) = Z_.transpose() * d_h;
    }
    return ll;
  }

  Matrix XN_;
  Vector offset_;
  Vector y_;
  std::vector<unsigned char> censored_;
  Matrix Z_;
};

inline double loglik(const Vector& params, const DesignMatrix& design, const Reparameterization& reparam) {
  return TobitLikelihood(design, reparam).value(params);
}

inline Vector loglik_grad(const Vector& params, const DesignMatrix& design, const Reparameterization& reparam) {
  Vector g;
  TobitLikelihood(design, reparam).value_and_gradient(params, g);
  return g;
}

/// Central differences of an analytic gradient, symmetrized.
template <typename Gradient>
Matrix numerical_hessian(Gradient&& grad, const Vector& x, double rel_step = 1e-5) {
  const auto n = x.size();
  Matrix H(n, n);
  Vector xp = x, xm = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = rel_step * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    H.col(j) = (grad(xp) - grad(xm)) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return 0.5 * (H + H.transpose());
}

struct OptimOptions {
  BfgsOptions bfgs;
  int newton_polish = 5;       // Newton refinements with the numerical Hessian after BFGS
  double hessian_step = 1e-5;  // relative step of the central-difference Hessian
  /// Residual variance (relative to max(1, var y)) under which the data are
  /// treated as interpolated exactly and the likelihood maximum does not exist.
  double degenerate_variance = 1e-20;
  /// Largest score component accepted at a reported optimum, relative to max(1, |loglik|).
  double gradient_acceptance = 1e-4;
};

struct FitResult {
  CoefficientSet coefficients;
  RestrictionSet restrictions;
  Reparameterization reparam;
  Vector theta;
  double loglik = -std::numeric_limits<double>::infinity();
  Matrix free_vcov;        // over (theta, alpha)
  Matrix structural_vcov;  // over beta
  Vector std_errors, z_stats, p_values;
  bool converged = false;
  bool vcov_available = false;
  bool degenerate = false;
  int iterations = 0;
  double gradient_norm = std::numeric_limits<double>::infinity();
  std::string message;
  std::size_t n_obs = 0;
  std::size_t n_censored = 0;

  Vector params() const {
    Vector p(theta.size() + coefficients.alpha.size());
    p << theta, coefficients.alpha;
    return p;
  }
};

namespace detail {

inline void fill_inference(FitResult& fit, const Matrix& neg_hessian) {
  const auto p = fit.coefficients.beta.size();
  fit.std_errors = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
  fit.z_stats = fit.std_errors;
  fit.p_values = fit.std_errors;
  fit.vcov_available = false;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(neg_hessian);
  if (eig.info() != Eigen::Success) {
    fit.message += (fit.message.empty() ? "" : "; ") + std::string("Hessian eigen-decomposition failed");
    return;
  }
  const double emax = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-10 * emax)) {
    fit.message += (fit.message.empty() ? "" : "; ") + std::string("singular Hessian: covariance unavailable");
    return;
  }
  const Matrix& Q = eig.eigenvectors();
  fit.free_vcov = Q * eig.eigenvalues().cwiseInverse().asDiagonal() * Q.transpose();
  const auto q = fit.theta.size();
  const Matrix& N = fit.reparam.basis;
  fit.structural_vcov = N * fit.free_vcov.topLeftCorner(q, q) * N.transpose();
  fit.vcov_available = true;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double var = fit.structural_vcov(i, i);
    const double se = var > 0.0 ? std::sqrt(var) : 0.0;
    fit.std_errors[i] = se;
    // Coefficients pinned by restrictions have no sampling variance.
    if (se > 1e-10 * (1.0 + std::abs(fit.coefficients.beta[i]))) {
      fit.z_stats[i] = fit.coefficients.beta[i] / se;
      fit.p_values[i] = normal::two_sided_p(fit.z_stats[i]);
    }
  }
}

}  // namespace detail

/// Maximum-likelihood fit under explicit restrictions and null-space basis.
inline FitResult fit(const DesignMatrix& design, const RestrictionSet& restrictions, const Reparameterization& reparam,
                     const OptimOptions& opts = {}) {
  const std::size_t n_unc = design.n_obs() - design.n_censored();
  if (n_unc == 0) throw Error(ErrorCode::InvalidSpec, "fit needs at least one uncensored observation");
  const TobitLikelihood like(design, reparam);
  if (static_cast<Eigen::Index>(design.n_obs()) <= like.n_params())
    throw Error(ErrorCode::InvalidSpec, "fewer observations than free parameters");

  FitResult fit;
  fit.restrictions = restrictions;
  fit.reparam = reparam;
  fit.coefficients.index = design.index;
  fit.coefficients.het_names = design.het_names;
  fit.n_obs = design.n_obs();
  fit.n_censored = design.n_censored();

  // Warm start: restricted least squares on uncensored rows.
  const auto q = like.n_theta();
  const auto h = like.n_alpha();
  Matrix A(static_cast<Eigen::Index>(n_unc), q);
  Vector b(static_cast<Eigen::Index>(n_unc));
  Matrix Zu(static_cast<Eigen::Index>(n_unc), h);
  {
    const Matrix XN = design.X * reparam.basis;
    const Vector off = design.X * reparam.particular;
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < design.X.rows(); ++i) {
      if (design.censored[static_cast<std::size_t>(i)]) continue;
      A.row(k) = XN.row(i);
      b[k] = design.y[i] - off[i];
      Zu.row(k) = design.Z.row(i);
      ++k;
    }
  }
  Vector theta0 = q > 0 ? Vector(A.completeOrthogonalDecomposition().solve(b)) : Vector(0);
  const Vector resid = b - A * theta0;
  const double s2 = resid.squaredNorm() / static_cast<double>(n_unc);
  const Vector yu_centered = b.array() - b.mean();
  const double var_y = yu_centered.squaredNorm() / static_cast<double>(n_unc);
  const double floor = opts.degenerate_variance * std::max(1.0, var_y);
  const bool degenerate = s2 <= floor;
  Vector alpha0 = design.Z.completeOrthogonalDecomposition().solve(
      Vector::Constant(design.Z.rows(), std::log(std::max(s2, floor))));

  Vector x0(q + h);
  x0 << theta0, alpha0;

  auto finish = [&](const Vector& x) {
    fit.theta = x.head(q);
    fit.coefficients.alpha = x.tail(h);
    fit.coefficients.beta = reparam.structural(fit.theta);
  };

  if (degenerate) {
    finish(x0);
    fit.loglik = like.value(x0);
    fit.gradient_norm = std::numeric_limits<double>::quiet_NaN();
    fit.degenerate = true;
    fit.converged = true;
    fit.message = "zero residual variance: least-squares interpolation returned, covariance unavailable";
    const auto p = fit.coefficients.beta.size();
    fit.std_errors = fit.z_stats = fit.p_values = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
    return fit;
  }

  auto objective = [&](const Vector& x, Vector& g) -> double {
    try {
      const double v = like.value_and_gradient(x, g);
      g = -g;
      return -v;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonFiniteLikelihood) return std::numeric_limits<double>::infinity();
      throw;
    }
  };
  {
    Vector g0;
    if (!std::isfinite(objective(x0, g0)))
      throw Error(ErrorCode::NonFiniteLikelihood, "log-likelihood not finite at the starting values");
  }

  BfgsResult opt = minimize_bfgs(objective, x0, opts.bfgs);
  Vector x = opt.x;
  double value = opt.value;
  Vector grad = opt.gradient;
  fit.iterations = opt.iterations;

  auto neg_grad = [&](const Vector& p) {
    Vector g;
    like.value_and_gradient(p, g);
    return Vector(-g);
  };

  Matrix H = numerical_hessian(neg_grad, x, opts.hessian_step);
  for (int it = 0; it < opts.newton_polish; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() < 1e-11) break;
    Matrix A = H;
    double ridge = 0.0;
    Eigen::LLT<Matrix> llt(A);
    for (int k = 0; llt.info() != Eigen::Success && k < 20; ++k) {
      ridge = ridge == 0.0 ? 1e-8 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff()) : ridge * 10;
      A = H + ridge * Matrix::Identity(H.rows(), H.cols());
      llt.compute(A);
    }
    if (llt.info() != Eigen::Success) break;
    const Vector step = llt.solve(grad);
    const double g0 = grad.lpNorm<Eigen::Infinity>();
    bool moved = false;
    for (double t = 1.0; t > 1e-6 && !moved; t *= 0.5) {
      const Vector cand = x - t * step;
      Vector g_cand;
      const double v_cand = objective(cand, g_cand);
      // ties in the objective are broken by the score
      const bool tie = v_cand <= value + 1e-12 * std::max(1.0, std::abs(value));
      if (v_cand < value || (tie && g_cand.lpNorm<Eigen::Infinity>() < g0)) {
        x = cand;
        value = v_cand;
        grad = g_cand;
        moved = true;
      }
    }
    if (!moved) break;
    H = numerical_hessian(neg_grad, x, opts.hessian_step);
  }

  finish(x);
  fit.loglik = -value;
  fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  const bool small_score = fit.gradient_norm <= opts.gradient_acceptance * std::max(1.0, std::abs(value));
  fit.converged = (opt.converged && small_score) || fit.gradient_norm < opts.bfgs.gradient_tolerance;
  if (fit.converged)
    fit.message = "converged (" + opt.reason + ")";
  else if (opt.converged)
    fit.message = "not converged: " + opt.reason + " but score norm " + format_double(fit.gradient_norm);
  else
    fit.message = "not converged: " + opt.reason;
  detail::fill_inference(fit, H);
  return fit;
}

inline FitResult fit(const DesignMatrix& design, const ModelSpec& spec, const OptimOptions& opts = {}) {
  const RestrictionSet rs = build_restrictions(spec, design.index);
  const Reparameterization rp = reparameterize(rs, static_cast<Eigen::Index>(design.index.size()));
  return fit(design, rs, rp, opts);
}

/// Latent index X * beta for every row (censored rows included, not clipped).
inline Vector predict_linear(const CoefficientSet& coefs, const DesignMatrix& design) {
  if (!(coefs.index == design.index) || design.X.cols() != coefs.beta.size())
    throw Error(ErrorCode::DimensionMismatch, "design columns do not match the coefficient terms");
  return design.X * coefs.beta;
}

inline Vector predict_linear(const FitResult& fit, const DesignMatrix& design) {
  return predict_linear(fit.coefficients, design);
}

}  // namespace abstei
