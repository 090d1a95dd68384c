#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cdt/dense_matrix.hpp"
#include "cdt/errors.hpp"

namespace cdt {

struct DescentOptions {
  double step = 0.01;
  std::size_t max_iters = 500;
  double tol = 1e-6;
  // Halve the step and retry while a step would increase the objective.
  bool halve_on_increase = true;
  int max_halvings = 60;
};

struct DescentTrace {
  // Objective at the start point and after every accepted step.
  std::vector<double> objective;
  std::size_t iterations = 0;
  std::size_t halvings = 0;
  bool converged = false;
};

namespace detail {

inline bool all_finite(const std::vector<DenseMatrix>& blocks) {
  for (const auto& b : blocks) {
    if (!b.all_finite()) return false;
  }
  return true;
}

inline void axpy_into(std::vector<DenseMatrix>& out, const std::vector<DenseMatrix>& x,
                      const std::vector<DenseMatrix>& g, double a) {
  for (std::size_t b = 0; b < x.size(); ++b) {
    auto o = out[b].values();
    auto xv = x[b].values();
    auto gv = g[b].values();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = xv[k] - a * gv[k];
  }
}

}  // namespace detail

/// Full-batch gradient descent over a list of parameter blocks.
///
/// `objective(x)` returns the objective; `gradient(x, g)` fills `g` (same
/// shapes as x). Every step starts from `opts.step`. With halving enabled an
/// accepted step never increases the objective, so the recorded sequence is
/// non-increasing. Stops when the improvement falls below
/// tol * max(1, |J|), when no halved step decreases J, or at max_iters.
template <class Objective, class Gradient>
DescentTrace gradient_descent(std::vector<DenseMatrix>& x, Objective&& objective,
                              Gradient&& gradient, const DescentOptions& opts,
                              const char* what) {
  DescentTrace trace;
  double f = objective(x);
  if (!std::isfinite(f)) throw DivergenceError(std::string(what) + ": non-finite initial objective");
  trace.objective.push_back(f);

  std::vector<DenseMatrix> grad = x;
  std::vector<DenseMatrix> trial = x;
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    gradient(x, grad);
    if (!detail::all_finite(grad)) {
      throw DivergenceError(std::string(what) + ": non-finite gradient at iteration " +
                            std::to_string(it));
    }
    double a = opts.step;
    double f_trial = 0.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      detail::axpy_into(trial, x, grad, a);
      f_trial = objective(trial);
      if (!opts.halve_on_increase) {
        if (!std::isfinite(f_trial)) {
          throw DivergenceError(std::string(what) + ": objective diverged at iteration " +
                                std::to_string(it) + "; reduce the step size");
        }
        accepted = true;
        break;
      }
      if (std::isfinite(f_trial) && f_trial <= f) {
        accepted = true;
        break;
      }
      a *= 0.5;
      ++trace.halvings;
    }
    if (!accepted) {
      trace.converged = true;
      break;
    }
    std::swap(x, trial);
    const double improvement = f - f_trial;
    const double scale = std::max(1.0, std::abs(f));
    f = f_trial;
    trace.objective.push_back(f);
    ++trace.iterations;
    if (improvement >= 0.0 && improvement < opts.tol * scale) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

}  // namespace cdt
