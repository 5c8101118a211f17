#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tibsim/errors.hpp"

namespace tibsim {

// Residual function: parameters -> residual vector (data is captured).
using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct FitOptions {
  int max_iterations = 200;           // iteration budget
  double cost_tolerance = 1.0e-10;    // relative cost-change convergence
  double step_tolerance = 1.0e-12;    // step-norm convergence
  double fd_relative_step = 1.0e-6;   // forward-difference Jacobian step
  double initial_damping = 1.0e-3;    // Levenberg-Marquardt lambda
  std::vector<double> lower_bounds;   // box constraints; empty = unbounded
  std::vector<double> upper_bounds;   // box constraints; empty = unbounded
  std::vector<double> step_scales;    // per-parameter magnitude floor for FD steps
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> errors;  // one-sigma standard errors
  std::vector<std::string> units;
  std::vector<bool> at_bound;
  std::vector<double> covariance;  // row-major, fitted_count x fitted_count
  std::size_t fitted_count = 0;    // leading entries that were optimized
  double residual_norm = 0.0;      // sqrt(sum of squared residuals)
  bool converged = false;
  int iterations = 0;

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw ConfigError("unknown fit parameter: " + name);
  }
  double value(const std::string& name) const { return values[index_of(name)]; }
  double error(const std::string& name) const { return errors[index_of(name)]; }
  bool bounded(const std::string& name) const { return at_bound[index_of(name)]; }
};

namespace detail {

// Gaussian elimination with partial pivoting; solves a*x = b (a, b copied).
inline bool solve_dense(std::vector<double> a, std::vector<double> b,
                        std::size_t n, std::vector<double>& x) {
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[pivot * n + k])) pivot = i;
    if (!(std::abs(a[pivot * n + k]) > 1.0e-300)) return false;
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[pivot * n + j]);
      std::swap(b[k], b[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = a[i * n + k] / a[k * n + k];
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= factor * a[k * n + j];
      b[i] -= factor * b[k];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t j = ri + 1; j < n; ++j) acc -= a[ri * n + j] * x[j];
    x[ri] = acc / a[ri * n + ri];
    if (!std::isfinite(x[ri])) return false;
  }
  return true;
}

inline bool invert_dense(std::vector<double> a, std::size_t n, std::vector<double>& inv) {
  inv.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[pivot * n + k])) pivot = i;
    if (!(std::abs(a[pivot * n + k]) > 1.0e-300)) return false;
    if (pivot != k)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[k * n + j], a[pivot * n + j]);
        std::swap(inv[k * n + j], inv[pivot * n + j]);
      }
    const double scale = 1.0 / a[k * n + k];
    for (std::size_t j = 0; j < n; ++j) {
      a[k * n + j] *= scale;
      inv[k * n + j] *= scale;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double factor = a[i * n + k];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[i * n + j] -= factor * a[k * n + j];
        inv[i * n + j] -= factor * inv[k * n + j];
      }
    }
  }
  for (double v : inv)
    if (!std::isfinite(v)) return false;
  return true;
}

// Forward-difference Jacobian, stepping away from any active upper bound.
inline void forward_jacobian(const ResidualFn& fn, const std::vector<double>& x,
                             const std::vector<double>& r0, const FitOptions& options,
                             const std::vector<double>& upper, std::vector<double>& jac) {
  const std::size_t m = r0.size();
  const std::size_t p = x.size();
  jac.assign(m * p, 0.0);
  std::vector<double> probe = x;
  for (std::size_t j = 0; j < p; ++j) {
    // Caller-provided scales are authoritative: a parameter carrying a large
    // constant offset (e.g. an absolute frequency) must not inflate its step.
    double h = options.step_scales.empty()
                   ? options.fd_relative_step * std::max(std::abs(x[j]), 1.0)
                   : options.fd_relative_step * std::abs(options.step_scales[j]);
    if (h == 0.0) h = options.fd_relative_step;
    if (x[j] + h > upper[j]) h = -h;
    probe[j] = x[j] + h;
    h = probe[j] - x[j];  // exactly representable step
    const std::vector<double> rp = fn(probe);
    probe[j] = x[j];
    if (rp.size() != m) throw ConfigError("residual dimension changed during fit");
    for (std::size_t i = 0; i < m; ++i) {
      const double deriv = (rp[i] - r0[i]) / h;
      if (!std::isfinite(deriv)) throw NonFiniteState("non-finite Jacobian entry");
      jac[i * p + j] = deriv;
    }
  }
}

}  // namespace detail

// Damped Gauss-Newton least squares with a multiplicative x3 / /3 damping
// schedule, forward-difference Jacobians, and optional box constraints.
inline FitResult least_squares(const ResidualFn& fn, std::vector<std::string> names,
                               std::vector<double> initial, FitOptions options = {}) {
  const std::size_t p = initial.size();
  if (p == 0 || names.size() != p)
    throw ConfigError("parameter names and initial guess must have equal nonzero size");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lower = options.lower_bounds;
  std::vector<double> upper = options.upper_bounds;
  if (lower.empty()) lower.assign(p, -inf);
  if (upper.empty()) upper.assign(p, inf);
  if (lower.size() != p || upper.size() != p)
    throw ConfigError("bound vectors must match the parameter count");
  if (!options.step_scales.empty() && options.step_scales.size() != p)
    throw ConfigError("step_scales must match the parameter count");
  for (std::size_t j = 0; j < p; ++j) {
    if (!std::isfinite(initial[j])) throw ConfigError("initial guess must be finite");
    initial[j] = std::clamp(initial[j], lower[j], upper[j]);
  }

  std::vector<double> x = initial;
  std::vector<double> r = fn(x);
  const std::size_t m = r.size();
  if (m < p) throw ConfigError("need at least as many data points as parameters");
  double cost = 0.0;
  for (double v : r) cost += v * v;
  if (!std::isfinite(cost)) throw NonFiniteState("residuals not finite at the initial guess");

  double lambda = options.initial_damping;
  bool converged = false;
  int iter = 0;
  std::vector<double> jac, grad(p), hessian(p * p), scale(p), step(p), x_new(p);
  while (iter < options.max_iterations && !converged) {
    ++iter;
    detail::forward_jacobian(fn, x, r, options, upper, jac);
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hessian.begin(), hessian.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        const double jij = jac[i * p + j];
        grad[j] += jij * r[i];
        for (std::size_t k = j; k < p; ++k) hessian[j * p + k] += jij * jac[i * p + k];
      }
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < j; ++k) hessian[j * p + k] = hessian[k * p + j];

    // Active set: parameters pinned at a bound with an outward gradient are
    // frozen this iteration so the remaining step is not distorted by them.
    std::vector<std::size_t> free_idx;
    for (std::size_t j = 0; j < p; ++j) {
      const bool pinned_low = (x[j] == lower[j] && grad[j] > 0.0);
      const bool pinned_high = (x[j] == upper[j] && grad[j] < 0.0);
      if (!pinned_low && !pinned_high) free_idx.push_back(j);
    }
    if (free_idx.empty()) {  // constrained stationary point
      converged = true;
      break;
    }
    for (std::size_t j : free_idx) {
      const double d = hessian[j * p + j];
      if (!(d > 0.0))
        throw SingularJacobian("parameter '" + names[j] + "' has no influence on the residuals");
      scale[j] = 1.0 / std::sqrt(d);
    }
    const std::size_t pf = free_idx.size();

    bool moved = false;
    for (int attempt = 0; attempt < 60 && !moved && !converged; ++attempt) {
      // Jacobi-scaled damped normal equations over the free parameters.
      std::vector<double> a(pf * pf), b(pf);
      for (std::size_t jj = 0; jj < pf; ++jj) {
        const std::size_t j = free_idx[jj];
        for (std::size_t kk = 0; kk < pf; ++kk) {
          const std::size_t k = free_idx[kk];
          a[jj * pf + kk] = hessian[j * p + k] * scale[j] * scale[k];
        }
        a[jj * pf + jj] += lambda;
        b[jj] = grad[j] * scale[j];
      }
      std::vector<double> y;
      if (!detail::solve_dense(a, b, pf, y)) {
        lambda *= 3.0;
        continue;
      }
      std::fill(step.begin(), step.end(), 0.0);
      for (std::size_t jj = 0; jj < pf; ++jj)
        step[free_idx[jj]] = y[jj] * scale[free_idx[jj]];
      double step_norm = 0.0, x_norm = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        x_new[j] = std::clamp(x[j] - step[j], lower[j], upper[j]);
        step_norm += (x_new[j] - x[j]) * (x_new[j] - x[j]);
        x_norm += x[j] * x[j];
      }
      if (std::sqrt(step_norm) <= options.step_tolerance * (1.0 + std::sqrt(x_norm))) {
        converged = true;
        break;
      }
      std::vector<double> r_new = fn(x_new);
      if (r_new.size() != m) throw ConfigError("residual dimension changed during fit");
      double cost_new = 0.0;
      for (double v : r_new) cost_new += v * v;
      if (std::isfinite(cost_new) && cost_new <= cost) {
        const double drop = cost - cost_new;
        if (drop <= options.cost_tolerance * std::max(cost, 1.0e-300)) converged = true;
        x = x_new;
        r = std::move(r_new);
        cost = cost_new;
        lambda = std::max(lambda / 3.0, 1.0e-12);
        moved = true;
      } else {
        lambda *= 3.0;
        if (lambda > 1.0e15) break;
      }
    }
    if (!moved && !converged) break;  // no descent direction left
  }

  // Covariance from the undamped normal equations at the final point.
  FitResult result;
  result.names = std::move(names);
  result.values = x;
  result.units.assign(p, "");
  result.fitted_count = p;
  result.residual_norm = std::sqrt(cost);
  result.converged = converged;
  result.iterations = iter;
  result.at_bound.assign(p, false);
  for (std::size_t j = 0; j < p; ++j)
    result.at_bound[j] = (x[j] == lower[j] || x[j] == upper[j]);

  detail::forward_jacobian(fn, x, r, options, upper, jac);
  std::fill(hessian.begin(), hessian.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = j; k < p; ++k)
        hessian[j * p + k] += jac[i * p + j] * jac[i * p + k];
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < j; ++k) hessian[j * p + k] = hessian[k * p + j];
  const double variance = (m > p) ? cost / static_cast<double>(m - p) : 0.0;
  bool scalable = true;
  for (std::size_t j = 0; j < p; ++j) {
    const double d = hessian[j * p + j];
    if (d > 0.0)
      scale[j] = 1.0 / std::sqrt(d);
    else
      scalable = false;
  }
  std::vector<double> inverse;
  bool inverted = false;
  if (scalable) {
    std::vector<double> a(p * p);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < p; ++k)
        a[j * p + k] = hessian[j * p + k] * scale[j] * scale[k];
    inverted = detail::invert_dense(a, p, inverse);
  }
  result.covariance.assign(p * p, inf);
  result.errors.assign(p, inf);
  if (inverted) {
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < p; ++k)
        result.covariance[j * p + k] = inverse[j * p + k] * scale[j] * scale[k] * variance;
    for (std::size_t j = 0; j < p; ++j)
      result.errors[j] = std::sqrt(std::max(0.0, result.covariance[j * p + j]));
  }
  return result;
}

}  // namespace tibsim
