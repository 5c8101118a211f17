#pragma once

// Steady-state one-port reflection off the coupler port, including the Duffing
// nonlinearity with hysteretic branch selection, plus the resonance and
// photon-number conventions used by the virtual experiments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "tibsim/constants.hpp"
#include "tibsim/csv.hpp"
#include "tibsim/device.hpp"
#include "tibsim/errors.hpp"

namespace tibsim {

// One reflection sweep at fixed bias and input power.
struct FrequencySweep {
  std::vector<double> freq_hz;              // strictly increasing
  std::vector<std::complex<double>> gamma;  // reflection coefficient per frequency
  double input_power_w = 0.0;               // probe power [W]
  BiasPoint bias;
};

enum class SweepDirection { kUp, kDown };

// Steady-state photon-number branches of the driven Duffing cavity.
struct DuffingSolution {
  std::vector<double> photon_numbers;  // ascending
  std::vector<bool> stable;
};

struct NonlinearReflectionPoint {
  double freq_hz = 0.0;
  std::complex<double> gamma;
  double photons = 0.0;   // occupied-branch intracavity photons
  bool bistable = false;  // more than one stable branch at this frequency
};

// One-port reflection, all rates in ordinary-frequency units [Hz].
inline std::complex<double> reflection_linear(double freq_hz, double f0_hz, double kappa_int_hz,
                                              double kappa_ext_hz) {
  const double x = freq_hz - f0_hz;
  return std::complex<double>(kappa_int_hz - kappa_ext_hz, 2.0 * x) /
         std::complex<double>(kappa_int_hz + kappa_ext_hz, 2.0 * x);
}

inline std::complex<double> reflection_linear(const DeviceParams& device, const BiasPoint& bias,
                                              double freq_hz) {
  return reflection_linear(freq_hz, cavity_frequency(device, bias), internal_loss(device, bias),
                           external_coupling(device, bias));
}

namespace detail {

// Left-hand side of the steady-state condition n*((delta - K n)^2 + (kappa/2)^2) = c
// and its derivative in n. delta is drive minus cavity frequency.
inline double duffing_lhs(double n, double delta_hz, double kappa_hz, double kerr_hz) {
  const double d = delta_hz - kerr_hz * n;
  return n * (d * d + 0.25 * kappa_hz * kappa_hz);
}

inline double duffing_slope(double n, double delta_hz, double kappa_hz, double kerr_hz) {
  return (delta_hz - kerr_hz * n) * (delta_hz - 3.0 * kerr_hz * n) + 0.25 * kappa_hz * kappa_hz;
}

inline double polish_duffing_root(double n, double delta_hz, double kappa_hz, double kerr_hz,
                                  double c) {
  for (int it = 0; it < 60; ++it) {
    const double f = duffing_lhs(n, delta_hz, kappa_hz, kerr_hz) - c;
    const double fp = duffing_slope(n, delta_hz, kappa_hz, kerr_hz);
    if (fp == 0.0) break;
    const double step = f / fp;
    n -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(n))) break;
  }
  return n;
}

}  // namespace detail

// Solves the steady-state cubic for the intracavity photon number. The
// detuning argument is drive frequency minus cavity frequency [Hz].
inline DuffingSolution duffing_steady_states(double detuning_hz, double kappa_int_hz,
                                             double kappa_ext_hz, double kerr_hz_per_photon,
                                             double drive_photon_flux) {
  if (kappa_int_hz < 0.0 || kappa_ext_hz < 0.0 || drive_photon_flux < 0.0)
    throw ConfigError("duffing_steady_states needs non-negative rates and drive flux");
  const double kappa = kappa_int_hz + kappa_ext_hz;
  const double quarter = 0.25 * kappa * kappa;
  const double c = kappa_ext_hz * drive_photon_flux / (2.0 * kPi);
  const double kerr = kerr_hz_per_photon;
  DuffingSolution sol;
  if (c == 0.0) {
    sol.photon_numbers = {0.0};
    sol.stable = {true};
    return sol;
  }
  const double denom_lin = detuning_hz * detuning_hz + quarter;
  const double linear_root = c / denom_lin;
  if (kerr == 0.0 || std::abs(kerr) * linear_root < 1e-14 * std::sqrt(denom_lin)) {
    // Kerr shift far below rounding noise: the cubic degenerates to the Lorentzian.
    sol.photon_numbers = {linear_root};
    sol.stable = {true};
    return sol;
  }

  // K^2 n^3 - 2 d K n^2 + (d^2 + kappa^2/4) n - c = 0, normalized and depressed.
  const double b = -2.0 * detuning_hz / kerr;
  const double cc = denom_lin / (kerr * kerr);
  const double dd = -c / (kerr * kerr);
  const double p = cc - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + dd;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  std::vector<double> candidates;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    candidates.push_back(std::cbrt(-0.5 * q + s) + std::cbrt(-0.5 * q - s) - b / 3.0);
  } else if (p < 0.0) {
    const double u = std::sqrt(-p / 3.0);
    const double arg = std::clamp(-0.5 * q / (u * u * u), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      candidates.push_back(2.0 * u * std::cos(theta - 2.0 * kPi * k / 3.0) - b / 3.0);
  } else {
    candidates.push_back(-b / 3.0);  // p = q = 0: triple root
  }

  std::vector<double> roots;
  for (double cand : candidates) {
    const double polished = detail::polish_duffing_root(cand, detuning_hz, kappa, kerr, c);
    if (polished > 0.0 && std::isfinite(polished)) roots.push_back(polished);
  }
  if (roots.empty()) {
    // Safety net: the cubic always has a positive root (lhs(0) < c). Bisect for it.
    double hi = std::max(linear_root, 1.0);
    while (detail::duffing_lhs(hi, detuning_hz, kappa, kerr) < c) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (detail::duffing_lhs(mid, detuning_hz, kappa, kerr) < c ? lo : hi) = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  std::sort(roots.begin(), roots.end());
  for (double r : roots) {
    if (!sol.photon_numbers.empty() &&
        std::abs(r - sol.photon_numbers.back()) <=
            1e-9 * std::max(std::abs(r), std::abs(sol.photon_numbers.back())))
      continue;  // degenerate pair at a fold
    sol.photon_numbers.push_back(r);
    sol.stable.push_back(detail::duffing_slope(r, detuning_hz, kappa, kerr) > 0.0);
  }
  return sol;
}

// Reflection evaluated on a Duffing branch with n intracavity photons.
inline std::complex<double> reflection_from_photons(double freq_hz, double f0_hz,
                                                    double kappa_int_hz, double kappa_ext_hz,
                                                    double kerr_hz_per_photon, double photons) {
  const double x = (freq_hz - f0_hz) - kerr_hz_per_photon * photons;
  return std::complex<double>(kappa_int_hz - kappa_ext_hz, 2.0 * x) /
         std::complex<double>(kappa_int_hz + kappa_ext_hz, 2.0 * x);
}

namespace detail {

// Walks the occupied Duffing branch along a frequency path, mirroring how a
// swept measurement latches onto one branch and jumps at the folds.
struct DuffingBranchWalker {
  double f0_hz = 0.0;
  double kappa_int_hz = 0.0;
  double kappa_ext_hz = 0.0;
  double kerr_hz = 0.0;
  double input_power_w = 0.0;
  double carried_photons = -1.0;  // < 0 until seeded

  NonlinearReflectionPoint eval(double freq_hz) {
    const double flux = input_power_w / (kPlanck * freq_hz);  // photons/s at the drive frequency
    const DuffingSolution sol = duffing_steady_states(freq_hz - f0_hz, kappa_int_hz, kappa_ext_hz,
                                                      kerr_hz, flux);
    int stable_count = 0;
    double chosen = -1.0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sol.photon_numbers.size(); ++i) {
      if (!sol.stable[i]) continue;
      ++stable_count;
      const double dist = carried_photons < 0.0 ? sol.photon_numbers[i]
                                                : std::abs(sol.photon_numbers[i] - carried_photons);
      if (dist < best_dist) {
        best_dist = dist;
        chosen = sol.photon_numbers[i];
      }
    }
    if (chosen < 0.0) chosen = sol.photon_numbers.front();  // no stable root: fold grazing
    carried_photons = chosen;
    NonlinearReflectionPoint pt;
    pt.freq_hz = freq_hz;
    pt.photons = chosen;
    pt.bistable = stable_count > 1;
    pt.gamma = reflection_from_photons(freq_hz, f0_hz, kappa_int_hz, kappa_ext_hz, kerr_hz, chosen);
    return pt;
  }
};

inline DuffingBranchWalker make_walker(const DeviceParams& device, const BiasPoint& bias,
                                       double input_power_w) {
  DuffingBranchWalker w;
  w.f0_hz = cavity_frequency(device, bias);
  w.kappa_int_hz = internal_loss(device, bias);
  w.kappa_ext_hz = external_coupling(device, bias);
  w.kerr_hz = self_kerr(device, bias);
  w.input_power_w = input_power_w;
  return w;
}

// Seeds the walker by approaching target_freq from far off-resonance in the
// sweep direction, so the first evaluated grid point sits on the right branch.
inline void approach_from_far(DuffingBranchWalker& walker, double target_freq_hz,
                              SweepDirection direction) {
  const double kappa = walker.kappa_int_hz + walker.kappa_ext_hz;
  const double flux = walker.input_power_w / (kPlanck * walker.f0_hz);
  const double peak_photons = kappa > 0.0
                                  ? 2.0 * walker.kappa_ext_hz * flux / (kPi * kappa * kappa)
                                  : 0.0;
  const double shift = walker.kerr_hz * peak_photons;
  const double margin = 30.0 * kappa + 2.0 * std::abs(shift);
  double start = 0.0;
  if (direction == SweepDirection::kUp) {
    start = std::min(target_freq_hz, walker.f0_hz + std::min(0.0, 1.5 * shift)) - margin;
  } else {
    start = std::max(target_freq_hz, walker.f0_hz + std::max(0.0, 1.5 * shift)) + margin;
  }
  const int steps = 1024;
  for (int i = 0; i < steps; ++i)
    walker.eval(start + (target_freq_hz - start) * static_cast<double>(i) / steps);
}

inline void require_increasing(const std::vector<double>& freqs_hz) {
  if (freqs_hz.empty()) throw ConfigError("frequency grid is empty");
  for (std::size_t i = 1; i < freqs_hz.size(); ++i)
    if (!(freqs_hz[i] > freqs_hz[i - 1]))
      throw ConfigError("frequency grid must be strictly increasing");
}

}  // namespace detail

// Reflection at one frequency during a hysteretic sweep in the given direction.
inline std::complex<double> reflection_nonlinear(const DeviceParams& device, const BiasPoint& bias,
                                                 double freq_hz, double input_power_w,
                                                 SweepDirection direction = SweepDirection::kUp) {
  if (input_power_w < 0.0) throw ConfigError("input power must be non-negative");
  detail::DuffingBranchWalker walker = detail::make_walker(device, bias, input_power_w);
  detail::approach_from_far(walker, freq_hz, direction);
  return walker.eval(freq_hz).gamma;
}

// Full sweep over an increasing grid; points are evaluated in sweep order but
// always returned in grid (ascending) order.
inline std::vector<NonlinearReflectionPoint> sweep_reflection_nonlinear(
    const DeviceParams& device, const BiasPoint& bias, const std::vector<double>& freqs_hz,
    double input_power_w, SweepDirection direction = SweepDirection::kUp) {
  detail::require_increasing(freqs_hz);
  if (input_power_w < 0.0) throw ConfigError("input power must be non-negative");
  detail::DuffingBranchWalker walker = detail::make_walker(device, bias, input_power_w);
  std::vector<NonlinearReflectionPoint> points(freqs_hz.size());
  if (direction == SweepDirection::kUp) {
    detail::approach_from_far(walker, freqs_hz.front(), direction);
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) points[i] = walker.eval(freqs_hz[i]);
  } else {
    detail::approach_from_far(walker, freqs_hz.back(), direction);
    for (std::size_t i = freqs_hz.size(); i-- > 0;) points[i] = walker.eval(freqs_hz[i]);
  }
  return points;
}

inline FrequencySweep sweep_reflection_linear(const DeviceParams& device, const BiasPoint& bias,
                                              const std::vector<double>& freqs_hz,
                                              double input_power_w = 0.0) {
  detail::require_increasing(freqs_hz);
  FrequencySweep sweep;
  sweep.freq_hz = freqs_hz;
  sweep.input_power_w = input_power_w;
  sweep.bias = bias;
  const double f0 = cavity_frequency(device, bias);
  const double kint = internal_loss(device, bias);
  const double kext = external_coupling(device, bias);
  sweep.gamma.reserve(freqs_hz.size());
  for (double f : freqs_hz) sweep.gamma.push_back(reflection_linear(f, f0, kint, kext));
  return sweep;
}

inline FrequencySweep to_frequency_sweep(const std::vector<NonlinearReflectionPoint>& points,
                                         double input_power_w, const BiasPoint& bias) {
  FrequencySweep sweep;
  sweep.input_power_w = input_power_w;
  sweep.bias = bias;
  sweep.freq_hz.reserve(points.size());
  sweep.gamma.reserve(points.size());
  for (const NonlinearReflectionPoint& pt : points) {
    sweep.freq_hz.push_back(pt.freq_hz);
    sweep.gamma.push_back(pt.gamma);
  }
  return sweep;
}

// Resonance = frequency of maximal unwrapped-phase slope, parabolically refined.
inline double resonance_by_phase_slope(const FrequencySweep& sweep) {
  const std::size_t n = sweep.freq_hz.size();
  if (n < 5 || sweep.gamma.size() != n)
    throw DegenerateSweep("phase-slope estimator needs at least 5 matched points");
  std::vector<double> phase(n);
  double prev = std::arg(sweep.gamma[0]);
  phase[0] = prev;
  for (std::size_t i = 1; i < n; ++i) {
    const double raw = std::arg(sweep.gamma[i]);
    phase[i] = phase[i - 1] + std::remainder(raw - prev, 2.0 * kPi);
    prev = raw;
  }
  const auto [lo_it, hi_it] = std::minmax_element(phase.begin(), phase.end());
  if (*hi_it - *lo_it < 1e-6) throw DegenerateSweep("phase is constant across the sweep");
  std::vector<double> slope(n, 0.0);
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double df = sweep.freq_hz[i + 1] - sweep.freq_hz[i - 1];
    if (!(df > 0.0)) throw DegenerateSweep("frequencies must be strictly increasing");
    slope[i] = (phase[i + 1] - phase[i - 1]) / df;
    if (std::abs(slope[i]) > best_mag) {
      best_mag = std::abs(slope[i]);
      best = i;
    }
  }
  if (best < 2 || best + 2 >= n)
    throw DegenerateSweep("phase-slope maximum sits at the sweep edge");
  const double y0 = std::abs(slope[best - 1]);
  const double y1 = std::abs(slope[best]);
  const double y2 = std::abs(slope[best + 1]);
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom >= 0.0) return sweep.freq_hz[best];  // flat top: nothing to refine against
  const double offset = 0.5 * (y0 - y2) / denom;
  const double h = 0.5 * (sweep.freq_hz[best + 1] - sweep.freq_hz[best - 1]);
  return sweep.freq_hz[best] + offset * h;
}

// Photon-number convention n = P / (kappa_ang * hbar * omega), rates angular inside.
inline double photon_number(double input_power_w, double kappa_total_hz, double frequency_hz) {
  return input_power_w / ((2.0 * kPi * kappa_total_hz) * kHbar * (2.0 * kPi * frequency_hz));
}

inline void write_csv(const FrequencySweep& sweep, const std::string& path) {
  std::vector<std::vector<double>> rows;
  rows.reserve(sweep.freq_hz.size());
  for (std::size_t i = 0; i < sweep.freq_hz.size(); ++i)
    rows.push_back({sweep.freq_hz[i], sweep.gamma[i].real(), sweep.gamma[i].imag()});
  write_csv(path, {"freq_hz", "re_gamma", "im_gamma"}, rows);
}

inline FrequencySweep read_frequency_sweep(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t f_col = table.column_index("freq_hz");
  const std::size_t re_col = table.column_index("re_gamma");
  const std::size_t im_col = table.column_index("im_gamma");
  FrequencySweep sweep;
  sweep.freq_hz.reserve(table.rows.size());
  sweep.gamma.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    sweep.freq_hz.push_back(row[f_col]);
    sweep.gamma.emplace_back(row[re_col], row[im_col]);
  }
  detail::require_increasing(sweep.freq_hz);
  return sweep;
}

}  // namespace tibsim
