#ifndef COMFP_OPTIM_HPP_
#define COMFP_OPTIM_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace comfp {

// Callable objective with analytic gradient. `gradient` writes into a
// caller-provided buffer of length `dimension`.
struct ObjectiveHandle {
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::size_t dimension = 0;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  // Gradient sup-norm fell below tolerance.
  bool converged = false;
  // Line search could not find an improving step; x is the best iterate.
  bool line_search_failed = false;
};

struct LbfgsOptions {
  int max_iterations = 10;
  int memory = 7;
  double gradient_tolerance = 1e-6;
  double sufficient_increase = 1e-4;  // Armijo c1
  double curvature = 0.9;             // Wolfe c2
};

// Maximizes the objective from x0. The line search enforces Wolfe
// conditions, so the objective value never decreases across accepted
// iterates. Throws NumericError if the objective or gradient is
// non-finite at an accepted point.
LbfgsResult lbfgs_maximize(const ObjectiveHandle& objective,
                           std::span<const double> x0,
                           const LbfgsOptions& options = {});

// Central differences, one function evaluation pair per coordinate.
std::vector<double> finite_diff_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step);

}  // namespace comfp

#endif  // COMFP_OPTIM_HPP_
