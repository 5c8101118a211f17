// fit_test.cpp — the damped Gauss-Newton engine: exact recovery, damping
// behaviour, bounds, error paths, Jacobian accuracy, uncertainty calibration.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tibsim/fit.hpp"
#include "tibsim/spectroscopy.hpp"

using namespace tibsim;

namespace {

TEST(LeastSquares, ExactLinearRecovery) {
  std::vector<double> xs, ys;
  for (int i = 1; i <= 12; ++i) {
    xs.push_back(0.5 * i);
    ys.push_back(2.0 * 0.5 * i);
  }
  auto residuals = [&](const std::vector<double>& p) {
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) r[i] = p[0] * xs[i] - ys[i];
    return r;
  };
  const FitResult fit = least_squares(residuals, {"a"}, {0.0});
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.value("a"), 2.0, 1e-12);
  EXPECT_NEAR(fit.residual_norm, 0.0, 1e-10);
  EXPECT_NEAR(fit.error("a"), 0.0, 1e-12);
}

TEST(LeastSquares, QuadraticExactRecovery) {
  std::vector<double> xs, ys;
  for (int i = -6; i <= 6; ++i) {
    xs.push_back(0.3 * i);
    ys.push_back(1.5 - 0.7 * (0.3 * i) + 0.2 * (0.3 * i) * (0.3 * i));
  }
  auto residuals = [&](const std::vector<double>& p) {
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      r[i] = p[0] + p[1] * xs[i] + p[2] * xs[i] * xs[i] - ys[i];
    return r;
  };
  const FitResult fit = least_squares(residuals, {"c0", "c1", "c2"}, {0.0, 0.0, 0.0});
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.value("c0"), 1.5, 1e-10);
  EXPECT_NEAR(fit.value("c1"), -0.7, 1e-10);
  EXPECT_NEAR(fit.value("c2"), 0.2, 1e-10);
}

TEST(LeastSquares, LorentzianMagnitudeClosedLoop) {
  // Nonlinear model: |Gamma| of the one-port reflection; recover the
  // generating parameters from a deliberately wrong start.
  const double f0 = 5.772e9, ki = 1730.0, ke = 3200.0;
  std::vector<double> freqs, mags;
  for (int i = 0; i <= 400; ++i) {
    const double f = f0 - 6.0 * (ki + ke) + 12.0 * (ki + ke) * i / 400.0;
    freqs.push_back(f);
    mags.push_back(std::abs(reflection_linear(f, f0, ki, ke)));
  }
  auto residuals = [&](const std::vector<double>& p) {
    std::vector<double> r(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i)
      r[i] = std::abs(reflection_linear(freqs[i], p[0], p[1], p[2])) - mags[i];
    return r;
  };
  FitOptions options;
  options.step_scales = {ki + ke, ki + ke, ki + ke};
  const FitResult fit = least_squares(residuals, {"f0", "ki", "ke"},
                                      {f0 + 200.0, 2.0e3, 2.8e3}, options);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.value("f0"), f0, 1e-6 * (ki + ke));
  EXPECT_NEAR(fit.value("ki"), ki, 1e-6 * ki);
  EXPECT_NEAR(fit.value("ke"), ke, 1e-6 * ke);
}

TEST(LeastSquares, DampingHandlesBadStart) {
  // Rosenbrock residuals from the classic hard start.
  auto residuals = [](const std::vector<double>& p) {
    return std::vector<double>{10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]};
  };
  const FitResult fit = least_squares(residuals, {"x", "y"}, {-1.2, 1.0});
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.value("x"), 1.0, 1e-8);
  EXPECT_NEAR(fit.value("y"), 1.0, 1e-8);
}

TEST(LeastSquares, IterationBudgetReportedHonestly) {
  auto residuals = [](const std::vector<double>& p) {
    return std::vector<double>{10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]};
  };
  FitOptions options;
  options.max_iterations = 2;
  const FitResult fit = least_squares(residuals, {"x", "y"}, {-1.2, 1.0}, options);
  EXPECT_FALSE(fit.converged);
  EXPECT_EQ(fit.iterations, 2);
}

TEST(LeastSquares, DeadParameterThrowsSingularJacobian) {
  auto residuals = [](const std::vector<double>& p) {
    return std::vector<double>{p[0] - 1.0, p[0] - 2.0};
  };
  EXPECT_THROW(least_squares(residuals, {"a", "unused"}, {0.0, 0.0}), SingularJacobian);
}

TEST(LeastSquares, PreconditionsRejected) {
  auto one_residual = [](const std::vector<double>& p) {
    return std::vector<double>{p[0] + p[1]};
  };
  // fewer points than parameters
  EXPECT_THROW(least_squares(one_residual, {"a", "b"}, {0.0, 0.0}), ConfigError);
  auto fine = [](const std::vector<double>& p) {
    return std::vector<double>{p[0], p[0] - 1.0};
  };
  // non-finite initial guess
  EXPECT_THROW(least_squares(fine, {"a"}, {std::nan("")}), ConfigError);
  // name/parameter count mismatch
  EXPECT_THROW(least_squares(fine, {"a", "b"}, {0.0}), ConfigError);
}

TEST(LeastSquares, BoxBoundClampsAndFlags) {
  auto residuals = [](const std::vector<double>& p) {
    return std::vector<double>{p[0] - 5.0, 0.1 * (p[0] - 5.0)};
  };
  FitOptions options;
  options.lower_bounds = {-10.0};
  options.upper_bounds = {3.0};
  const FitResult fit = least_squares(residuals, {"x"}, {0.0}, options);
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.value("x"), 3.0);
  EXPECT_TRUE(fit.bounded("x"));
}

TEST(LeastSquares, ForwardJacobianMatchesCentralDifference) {
  // At the optimum of the reflection model, forward differences agree with
  // central differences to 1e-4 relative, column by column.
  const double f0 = 5.772e9, ki = 1730.0, ke = 3460.0;
  std::vector<double> freqs;
  for (int i = 0; i <= 160; ++i)
    freqs.push_back(f0 - 4.0 * (ki + ke) + 8.0 * (ki + ke) * i / 160.0);
  auto residuals = [&](const std::vector<double>& p) {
    std::vector<double> r(2 * freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      const std::complex<double> g = reflection_linear(freqs[i], p[0], p[1], p[2]);
      r[2 * i] = g.real();
      r[2 * i + 1] = g.imag();
    }
    return r;
  };
  const std::vector<double> x = {f0, ki, ke};
  FitOptions options;
  options.step_scales = {ki + ke, ki + ke, ki + ke};
  std::vector<double> upper(3, std::numeric_limits<double>::infinity());
  const std::vector<double> r0 = residuals(x);
  std::vector<double> forward;
  tibsim::detail::forward_jacobian(residuals, x, r0, options, upper, forward);
  const std::size_t m = r0.size(), p = x.size();
  for (std::size_t j = 0; j < p; ++j) {
    const double h = options.fd_relative_step * options.step_scales[j];
    std::vector<double> xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const std::vector<double> rp = residuals(xp);
    const std::vector<double> rm = residuals(xm);
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double central = (rp[i] - rm[i]) / (2.0 * h);
      diff2 += (forward[i * p + j] - central) * (forward[i * p + j] - central);
      norm2 += central * central;
    }
    EXPECT_LE(std::sqrt(diff2), 1e-4 * std::sqrt(norm2)) << "column " << j;
  }
}

TEST(LeastSquares, ReportedUncertaintyMatchesSeedScatter) {
  // Known-sigma pseudo-noise: the scatter of fitted slopes across seeds must
  // agree with the reported standard errors within a factor of 2.
  const double sigma = 0.1;
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(0.01 * i);
  std::vector<double> fitted_a, reported_sigma;
  for (unsigned seed = 1; seed <= 24; ++seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = 2.0 * xs[i] - 1.0 + noise(rng);
    auto residuals = [&](const std::vector<double>& p) {
      std::vector<double> r(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) r[i] = p[0] * xs[i] + p[1] - ys[i];
      return r;
    };
    const FitResult fit = least_squares(residuals, {"a", "b"}, {0.0, 0.0});
    ASSERT_TRUE(fit.converged);
    fitted_a.push_back(fit.value("a"));
    reported_sigma.push_back(fit.error("a"));
  }
  double mean = 0.0;
  for (double a : fitted_a) mean += a;
  mean /= fitted_a.size();
  double var = 0.0;
  for (double a : fitted_a) var += (a - mean) * (a - mean);
  const double scatter = std::sqrt(var / (fitted_a.size() - 1));
  double mean_sigma = 0.0;
  for (double s : reported_sigma) mean_sigma += s;
  mean_sigma /= reported_sigma.size();
  EXPECT_GT(scatter / mean_sigma, 0.5);
  EXPECT_LT(scatter / mean_sigma, 2.0);
}

}  // namespace
