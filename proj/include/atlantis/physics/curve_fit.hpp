#pragma once

#include <functional>
#include <span>
#include <vector>

namespace atlantis::physics {

/// Box-constrained nonlinear least squares via damped Gauss-Newton
/// (Levenberg-Marquardt) with parameter projection onto the bounds.
struct CurveFitProblem {
  // model(x, theta) and its gradient w.r.t. theta at x.
  std::function<double(double, std::span<const double>)> model;
  std::function<void(double, std::span<const double>, std::span<double>)> gradient;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct CurveFitResult {
  std::vector<double> theta;
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
};

CurveFitResult levenberg_marquardt(const CurveFitProblem& problem,
                                   std::vector<double> theta0, int max_iterations = 200,
                                   double tolerance = 1e-14);

}  // namespace atlantis::physics
