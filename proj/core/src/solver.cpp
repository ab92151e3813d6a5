#include "scenefit/solver.hpp"

#include <deque>

namespace scenefit {

SolverResult minimize(const Objective& f, Eigen::VectorXd x0, const SolverOptions& opts) {
  SolverResult res;
  const int dim = static_cast<int>(x0.size());
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd grad(dim);
  double fx = f(x, &grad);

  res.x = x;
  res.value = fx;
  res.gradient_norm = grad.norm();

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> history;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const double gnorm = grad.norm();
    if (gnorm < opts.gradient_tolerance) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd d = -grad;
    std::vector<double> alpha(history.size());
    for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
      alpha[i] = history[i].rho * history[i].s.dot(d);
      d -= alpha[i] * history[i].y;
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      const double yy = last.y.squaredNorm();
      if (yy > 0.0) d *= last.s.dot(last.y) / yy;
    }
    for (size_t i = 0; i < history.size(); ++i) {
      const double beta = history[i].rho * history[i].y.dot(d);
      d += (alpha[i] - beta) * history[i].s;
    }
    if (d.dot(grad) >= 0.0) d = -grad;  // not a descent direction, reset
    const double dnorm = d.norm();
    if (dnorm > opts.max_step_norm) d *= opts.max_step_norm / dnorm;

    // Armijo backtracking.
    const double slope = grad.dot(d);
    double step = 1.0;
    double f_new = fx;
    Eigen::VectorXd x_new = x;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      x_new = x + step * d;
      f_new = f(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= fx + opts.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.backtrack_factor;
    }
    ++res.iterations;
    if (!accepted) {
      res.stalled = true;
      break;
    }

    Eigen::VectorXd grad_new(dim);
    f(x_new, &grad_new);

    Pair pair;
    pair.s = x_new - x;
    pair.y = grad_new - grad;
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > opts.history) history.pop_front();
    }

    x = std::move(x_new);
    grad = std::move(grad_new);
    fx = f_new;
    if (fx < res.value) {
      res.x = x;
      res.value = fx;
    }
  }

  // res.x holds the best iterate seen; the gradient norm is reported at the
  // final point.
  res.gradient_norm = grad.norm();
  if (res.gradient_norm < opts.gradient_tolerance) res.converged = true;
  return res;
}

}  // namespace scenefit
