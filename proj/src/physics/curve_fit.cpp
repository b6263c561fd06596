#include "atlantis/physics/curve_fit.hpp"

#include <algorithm>
#include <cmath>

#include "atlantis/core/error.hpp"

namespace atlantis::physics {

namespace {

/// Gaussian elimination with partial pivoting; returns false if singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, size_t n) {
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t row = col + 1; row < n; ++row)
      if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
    if (std::abs(a[pivot * n + col]) < 1e-300) return false;
    if (pivot != col) {
      for (size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      std::swap(b[col], b[pivot]);
    }
    for (size_t row = col + 1; row < n; ++row) {
      const double f = a[row * n + col] / a[col * n + col];
      for (size_t k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
      b[row] -= f * b[col];
    }
  }
  for (size_t col = n; col-- > 0;) {
    double sum = b[col];
    for (size_t k = col + 1; k < n; ++k) sum -= a[col * n + k] * b[k];
    b[col] = sum / a[col * n + col];
  }
  return true;
}

void project(std::vector<double>& theta, const CurveFitProblem& p) {
  for (size_t i = 0; i < theta.size(); ++i)
    theta[i] = std::clamp(theta[i], p.lower[i], p.upper[i]);
}

double sum_squared_error(const CurveFitProblem& p, const std::vector<double>& theta) {
  double sse = 0.0;
  for (size_t i = 0; i < p.x.size(); ++i) {
    const double r = p.model(p.x[i], theta) - p.y[i];
    sse += r * r;
  }
  return sse;
}

}  // namespace

CurveFitResult levenberg_marquardt(const CurveFitProblem& problem,
                                   std::vector<double> theta0, int max_iterations,
                                   double tolerance) {
  const size_t n_params = theta0.size();
  if (problem.lower.size() != n_params || problem.upper.size() != n_params)
    fail(Errc::invalid_config, "bounds must match parameter count");
  if (problem.x.size() != problem.y.size() || problem.x.empty())
    fail(Errc::invalid_config, "need matching nonempty sample vectors");

  project(theta0, problem);
  CurveFitResult result;
  result.theta = std::move(theta0);
  result.sse = sum_squared_error(problem, result.theta);

  double lambda = 1e-3;
  std::vector<double> grad(n_params);
  std::vector<double> jtj(n_params * n_params);
  std::vector<double> jtr(n_params);

  for (int iter = 0; iter < max_iterations; ++iter) {
    result.iterations = iter + 1;
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    for (size_t i = 0; i < problem.x.size(); ++i) {
      const double r = problem.model(problem.x[i], result.theta) - problem.y[i];
      problem.gradient(problem.x[i], result.theta, grad);
      for (size_t a = 0; a < n_params; ++a) {
        jtr[a] += grad[a] * r;
        for (size_t b = 0; b < n_params; ++b) jtj[a * n_params + b] += grad[a] * grad[b];
      }
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 16 && !stepped; ++attempt) {
      std::vector<double> lhs = jtj;
      for (size_t a = 0; a < n_params; ++a)
        lhs[a * n_params + a] += lambda * (1.0 + jtj[a * n_params + a]);
      std::vector<double> step = jtr;
      for (double& v : step) v = -v;
      if (!solve_dense(lhs, step, n_params)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> candidate = result.theta;
      for (size_t a = 0; a < n_params; ++a) candidate[a] += step[a];
      project(candidate, problem);
      const double candidate_sse = sum_squared_error(problem, candidate);
      if (candidate_sse <= result.sse) {
        const double improvement = result.sse - candidate_sse;
        result.theta = std::move(candidate);
        result.sse = candidate_sse;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (improvement < tolerance * (1.0 + result.sse)) {
          result.converged = true;
          return result;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!stepped) {
      result.converged = true;  // no descent direction left
      return result;
    }
  }
  return result;
}

}  // namespace atlantis::physics
