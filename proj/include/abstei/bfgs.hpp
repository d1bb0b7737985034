#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace abstei {

struct BfgsOptions {
  int max_iterations = 5000;
  double gradient_tolerance = 1e-6;   // on the infinity norm
  double relative_tolerance = 1e-10;  // on successive objective values
  int stall_iterations = 2;           // consecutive small relative changes required
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string reason;
};

/// Minimizes f with an inverse-Hessian BFGS update and Armijo backtracking.
/// `f(x, grad)` returns the objective and writes the gradient; a non-finite
/// return value marks x as infeasible and makes the line search backtrack.
template <typename Objective>
BfgsResult minimize_bfgs(Objective&& f, Eigen::VectorXd x0, const BfgsOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const auto n = x0.size();

  BfgsResult res;
  res.x = std::move(x0);
  res.gradient = VectorXd::Zero(n);
  res.value = f(res.x, res.gradient);
  ++res.evaluations;
  if (!std::isfinite(res.value)) {
    res.reason = "objective not finite at the starting point";
    return res;
  }

  MatrixXd H = MatrixXd::Identity(n, n);
  bool scaled = false;
  int stalls = 0;
  VectorXd g_new(n), x_new(n);

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    if (res.gradient.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
      res.converged = true;
      res.reason = "gradient tolerance";
      return res;
    }

    VectorXd dir = -H * res.gradient;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      H.setIdentity();
      scaled = false;
      dir = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }
    // First step along the raw gradient: keep it to unit length.
    double step = scaled ? 1.0 : std::min(1.0, 1.0 / dir.norm());

    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < opt.max_backtracks; ++k) {
      x_new = res.x + step * dir;
      f_new = f(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= res.value + opt.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted) {
      if (scaled || H != MatrixXd::Identity(n, n)) {
        // Retry once from a fresh steepest-descent model.
        H.setIdentity();
        scaled = false;
        continue;
      }
      res.reason = "line search failed";
      return res;
    }

    const VectorXd s = x_new - res.x;
    const VectorXd yv = g_new - res.gradient;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (!scaled) {
        H *= sy / yv.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const VectorXd Hy = H * yv;
      const double yHy = yv.dot(Hy);
      H += (rho * rho * yHy + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }

    const double change = std::abs(f_new - res.value);
    const double scale = std::max(1.0, std::abs(res.value));
    res.x = x_new;
    res.gradient = g_new;
    res.value = f_new;

    stalls = change < opt.relative_tolerance * scale ? stalls + 1 : 0;
    if (stalls >= opt.stall_iterations) {
      res.converged = true;
      res.reason = "relative objective change";
      ++res.iterations;
      return res;
    }
  }
  res.converged = res.gradient.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance;
  res.reason = res.converged ? "gradient tolerance" : "maximum iterations exceeded";
  return res;
}

}  // namespace abstei
