#pragma once

// Quasi-second-order descent: L-BFGS direction with Armijo backtracking.

#include <Eigen/Dense>
#include <functional>

namespace scenefit {

/// Objective: returns the value and, when grad is non-null, fills the
/// gradient (same dimension as x).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct SolverOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  int history = 8;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 40;
  /// Steps are capped to this parameter-space length before the line
  /// search; keeps the first iterations sane when the objective is steep.
  double max_step_norm = 1.0;
};

struct SolverResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set when a line search failed to decrease the objective; the best
  /// iterate seen is returned.
  bool stalled = false;
};

SolverResult minimize(const Objective& f, Eigen::VectorXd x0, const SolverOptions& opts = {});

}  // namespace scenefit
