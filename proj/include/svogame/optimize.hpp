#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace svogame {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  int max_iterations{200};
  // Relative to the objective scale: convergence is
  // ||x - P(x - grad)||_inf <= gradient_tolerance * max(1, |f|). An absolute
  // test would be unreachable in double precision for large objectives.
  double gradient_tolerance{1e-6};
  // Absolute bound on the inf-norm displacement of an accepted step.
  double step_tolerance{1e-10};
  double line_search_shrink{0.5};
  double armijo_constant{1e-4};
};

inline void validate_options(const SolverOptions& opts) {
  if (opts.max_iterations < 1 || !(opts.gradient_tolerance > 0.0) ||
      !(opts.step_tolerance > 0.0) || !(opts.gradient_tolerance < 1.0) ||
      !(opts.step_tolerance < 1.0) || !(opts.line_search_shrink > 0.0) ||
      !(opts.line_search_shrink < 1.0) || !(opts.armijo_constant > 0.0) ||
      !(opts.armijo_constant < 1.0)) {
    throw std::invalid_argument("solver options out of range");
  }
}

// A smooth objective over a box. bounds() may depend on the current point;
// it is re-evaluated once per iteration.
template <class P>
concept BoxSmoothProblem = requires(const P& p, const std::vector<double>& x,
                                    std::vector<double>& grad, std::vector<double>& lo,
                                    std::vector<double>& hi) {
  { p.size() } -> std::convertible_to<std::size_t>;
  { p.value(x) } -> std::convertible_to<double>;
  p.gradient(x, grad);
  p.bounds(x, lo, hi);
};

struct MinimizeResult {
  std::vector<double> x;
  double value{0.0};
  int iterations{0};
  bool converged{false};
  double kkt_residual{0.0};  // inf-norm of x - P(x - grad) at exit
};

// Projected gradient with Armijo backtracking along the projection arc. The
// trial step starts at the Barzilai-Borwein ratio of the last accepted step,
// falling back to a carried-over doubling step when that is unusable.
template <BoxSmoothProblem P>
MinimizeResult minimize_box(const P& problem, std::vector<double> x0,
                            const SolverOptions& opts = {},
                            const std::function<void(int, double)>& observer = nullptr) {
  validate_options(opts);
  const std::size_t n = problem.size();
  if (x0.size() != n) throw std::invalid_argument("minimize_box: bad initial point size");

  std::vector<double> lo(n), hi(n), grad(n), trial(n);
  std::vector<double> x_prev, grad_prev;
  auto project = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  };

  problem.bounds(x0, lo, hi);
  project(x0);
  double fval = problem.value(x0);
  if (!std::isfinite(fval)) {
    throw SolverError("minimize_box: objective is not finite at the initial point");
  }
  if (observer) observer(0, fval);

  MinimizeResult result;
  double step = 1.0;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    // State-dependent bounds can move the iterate when re-projected; the
    // objective and gradient must be refreshed at the moved point or the
    // line search compares against a stale value and stalls.
    problem.bounds(x0, lo, hi);
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double moved_to = std::clamp(x0[i], lo[i], hi[i]);
      shift = std::max(shift, std::abs(moved_to - x0[i]));
      x0[i] = moved_to;
    }
    if (shift > 0.0) {
      fval = problem.value(x0);
      if (!std::isfinite(fval)) {
        throw SolverError("minimize_box: objective is not finite at a projected iterate");
      }
    }
    problem.gradient(x0, grad);

    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double moved = x0[i] - std::clamp(x0[i] - grad[i], lo[i], hi[i]);
      residual = std::max(residual, std::abs(moved));
    }
    if (residual <= opts.gradient_tolerance * std::max(1.0, std::abs(fval))) break;

    // Barzilai-Borwein trial step from the last accepted secant pair; a fixed
    // starting step can lock onto the non-contracting 2/L oscillation, which
    // the curvature-matched ratio avoids. The doubling heuristic remains the
    // fallback when the pair carries no usable curvature.
    double t0 = step;
    if (!x_prev.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = x0[i] - x_prev[i];
        const double y = grad[i] - grad_prev[i];
        ss += s * s;
        sy += s * y;
      }
      if (std::isfinite(sy) && sy > 0.0 && ss > 0.0) {
        t0 = std::clamp(ss / sy, 1e-12, 1e8);
      }
    }

    bool accepted = false;
    double t = t0;
    double ftrial = fval;
    for (int ls = 0; ls < 60; ++ls) {
      double dir_deriv = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::clamp(x0[i] - t * grad[i], lo[i], hi[i]);
        dir_deriv += grad[i] * (trial[i] - x0[i]);
      }
      ftrial = problem.value(trial);
      if (std::isfinite(ftrial) && ftrial <= fval + opts.armijo_constant * dir_deriv) {
        accepted = true;
        break;
      }
      t *= opts.line_search_shrink;
    }
    if (!accepted) break;

    double dx = 0.0;
    for (std::size_t i = 0; i < n; ++i) dx = std::max(dx, std::abs(trial[i] - x0[i]));
    x_prev = x0;
    grad_prev = grad;
    x0.swap(trial);
    fval = ftrial;
    step = std::min(t * 2.0, 1e8);
    if (observer) observer(iter + 1, fval);
    if (dx <= opts.step_tolerance) {
      ++iter;
      break;
    }
  }

  // The loop may exit with a point newer than the last residual; refresh.
  problem.gradient(x0, grad);
  problem.bounds(x0, lo, hi);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double moved = x0[i] - std::clamp(x0[i] - grad[i], lo[i], hi[i]);
    residual = std::max(residual, std::abs(moved));
  }
  result.kkt_residual = residual;
  result.converged = residual <= opts.gradient_tolerance * std::max(1.0, std::abs(fval));

  result.x = std::move(x0);
  result.value = fval;
  result.iterations = iter;
  return result;
}

}  // namespace svogame
