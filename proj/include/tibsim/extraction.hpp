#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "tibsim/csv.hpp"
#include "tibsim/device.hpp"
#include "tibsim/errors.hpp"
#include "tibsim/fit.hpp"
#include "tibsim/spectroscopy.hpp"
#include "tibsim/trace.hpp"

namespace tibsim {

struct KerrPoint {
  double photons = 0.0;     // drive strength expressed as a photon number
  double delta_hz = 0.0;    // resonance shift  [Hz]
  bool bistable = false;    // hysteresis detected at this power
};

struct PlateauPoint {
  double bias_phi0 = 0.0;       // gradiometric flux  [Phi0]
  double kappa_hz = 0.0;        // fitted total linewidth  [Hz]
  double energy_photons = 0.0;  // recovered outgoing energy  [photons]
};

struct RingdownFitHints {
  double kappa_hz = 0.0;    // expected total linewidth; 0 = estimate from data
  double gamma_c_hz = 0.0;  // expected detection corner; 0 = estimate from data
};

namespace detail {

// Shared shape of the ringdown model: (e^{-s tau} - e^{-g tau})/(g - s),
// a symmetric function of the two internal (angular) rates, zero at tau <= 0.
// Evaluated against the slower rate so it stays finite for any rate pair.
inline double ringdown_shape(double tau_s, double s_ang, double g_ang) {
  if (tau_s <= 0.0) return 0.0;
  const double slow = std::min(s_ang, g_ang);
  const double fast = std::max(s_ang, g_ang);
  const double y = (fast - slow) * tau_s;
  if (y < 1.0e-6)
    return tau_s * std::exp(-slow * tau_s) * (1.0 - 0.5 * y + y * y / 6.0);
  return std::exp(-slow * tau_s) * (-std::expm1(-y)) / (fast - slow);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return grid;
}

}  // namespace detail

// ===== reflection fit =====

// Fits complex reflection data to the one-port model with an overall complex
// prefactor; derived entries kappa and min_reflection carry propagated errors.
inline FitResult fit_reflection(const FrequencySweep& sweep) {
  const std::size_t n = sweep.freq_hz.size();
  if (n < 3 || sweep.gamma.size() != n)
    throw ConfigError("reflection fit needs at least 3 sweep points");
  detail::require_increasing(sweep.freq_hz);

  std::vector<double> mag2(n);
  std::size_t imin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mag2[i] = std::norm(sweep.gamma[i]);
    if (mag2[i] < mag2[imin]) imin = i;
  }
  const double far2 = 0.5 * (mag2.front() + mag2.back());
  const double span = sweep.freq_hz.back() - sweep.freq_hz.front();

  // Half-depth width of |Gamma|^2 equals the total linewidth.
  const double level = 0.5 * (mag2[imin] + far2);
  double left = std::numeric_limits<double>::quiet_NaN();
  double right = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = imin; i-- > 0;)
    if (mag2[i] >= level) {
      const double frac = (level - mag2[i + 1]) / (mag2[i] - mag2[i + 1]);
      left = sweep.freq_hz[i + 1] + frac * (sweep.freq_hz[i] - sweep.freq_hz[i + 1]);
      break;
    }
  for (std::size_t i = imin + 1; i < n; ++i)
    if (mag2[i] >= level) {
      const double frac = (level - mag2[i - 1]) / (mag2[i] - mag2[i - 1]);
      right = sweep.freq_hz[i - 1] + frac * (sweep.freq_hz[i] - sweep.freq_hz[i - 1]);
      break;
    }
  const double width = (std::isfinite(left) && std::isfinite(right) && right > left)
                           ? right - left
                           : span / 6.0;
  if (!(span >= 3.0 * width))
    throw ConfigError("reflection sweep must span at least 3 linewidths");

  const double contrast = (far2 > 0.0) ? std::sqrt(std::max(0.0, mag2[imin]) / far2) : 0.0;
  const std::complex<double> prefactor0 = 0.5 * (sweep.gamma.front() + sweep.gamma.back());
  const double f0_init = sweep.freq_hz[imin];

  auto residuals = [&sweep, n](const std::vector<double>& prm) {
    const double f0 = prm[0], ki = prm[1], ke = prm[2];
    const std::complex<double> pre(prm[3], prm[4]);
    std::vector<double> res(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = sweep.freq_hz[i] - f0;
      const std::complex<double> model =
          pre * std::complex<double>(ki - ke, 2.0 * x) /
          std::complex<double>(ki + ke, 2.0 * x);
      res[2 * i] = model.real() - sweep.gamma[i].real();
      res[2 * i + 1] = model.imag() - sweep.gamma[i].imag();
    }
    return res;
  };

  FitOptions options;
  const double inf = std::numeric_limits<double>::infinity();
  options.lower_bounds = {-inf, 0.0, 0.0, -inf, -inf};
  const double pre_scale = std::max(std::abs(prefactor0), 1.0e-3);
  options.step_scales = {width, width, width, pre_scale, pre_scale};
  const std::vector<std::string> names = {"f0", "kappa_int", "kappa_ext", "re_scale",
                                          "im_scale"};

  FitResult best;
  bool have = false;
  std::exception_ptr singular;
  for (int branch = 0; branch < 2; ++branch) {
    if (branch == 1 && contrast < 1.0e-9) break;  // both starts identical
    const double big = 0.5 * width * (1.0 + contrast);
    const double small = 0.5 * width * (1.0 - contrast);
    const double ki0 = (branch == 0) ? big : small;   // under-coupled start
    const double ke0 = (branch == 0) ? small : big;   // over-coupled start
    try {
      FitResult attempt = least_squares(
          residuals, names, {f0_init, ki0, ke0, prefactor0.real(), prefactor0.imag()},
          options);
      if (!have || attempt.residual_norm < best.residual_norm) {
        best = std::move(attempt);
        have = true;
      }
    } catch (const SingularJacobian&) {
      singular = std::current_exception();
    }
  }
  if (!have) std::rethrow_exception(singular);

  // Derived: kappa = ki + ke and min_reflection = |ki - ke|/kappa.
  const double ki = best.values[1], ke = best.values[2];
  const double kappa = ki + ke;
  const double diff = ki - ke;
  const double sgn = (diff >= 0.0) ? 1.0 : -1.0;
  const double c11 = best.covariance[1 * 5 + 1];
  const double c22 = best.covariance[2 * 5 + 2];
  const double c12 = best.covariance[1 * 5 + 2];
  const double var_kappa = c11 + c22 + 2.0 * c12;
  const double g1 = (sgn * kappa - std::abs(diff)) / (kappa * kappa);
  const double g2 = (-sgn * kappa - std::abs(diff)) / (kappa * kappa);
  const double var_min = g1 * g1 * c11 + g2 * g2 * c22 + 2.0 * g1 * g2 * c12;

  best.units = {"Hz", "Hz", "Hz", "", ""};
  best.names.push_back("kappa");
  best.values.push_back(kappa);
  best.errors.push_back(std::sqrt(std::max(0.0, var_kappa)));
  best.units.push_back("Hz");
  best.at_bound.push_back(false);
  best.names.push_back("min_reflection");
  best.values.push_back(std::abs(diff) / kappa);
  best.errors.push_back(std::sqrt(std::max(0.0, var_min)));
  best.units.push_back("");
  best.at_bound.push_back(false);
  return best;
}

// ===== ringdown fit =====

// Fits V(t) = A Theta(t-t0) (e^{-s(t-t0)} - e^{-g(t-t0)})/(g-s) with internal
// angular rates s = pi*kappa and g = 2*pi*gamma_c, reported in ordinary Hz so
// kappa is the energy decay rate and gamma_c the detection corner frequency.
inline FitResult fit_ringdown(const TimeTrace& trace, const RingdownFitHints& hints = {}) {
  validate(trace);
  const std::vector<double>& v = trace.samples;
  const std::size_t n = v.size();
  if (n < 8) throw ConfigError("ringdown fit needs at least 8 samples");
  const double dt = trace.dt_s;
  const double cap_hz = 10.0 / (2.0 * kPi * dt);  // fastest resolvable corner

  // Rising edge: maximum-derivative sample.
  std::size_t iedge = 0;
  double best_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (v[i + 1] - v[i] > best_slope) {
      best_slope = v[i + 1] - v[i];
      iedge = i;
    }
  std::size_t ipk = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[ipk])) ipk = i;
  const double vpk = std::abs(v[ipk]);
  if (!(vpk > 0.0)) throw ConfigError("ringdown fit needs a nonzero trace");
  const double orientation = (v[ipk] < 0.0) ? -1.0 : 1.0;
  double t0_init;
  if (best_slope > 0.0 && iedge <= ipk)
    t0_init = trace.time_at(iedge);
  else  // decay-only trace: edge sits just before the first sample
    t0_init = trace.time_at(ipk) - 0.5 * dt;

  double kappa_init = hints.kappa_hz;
  if (!(kappa_init > 0.0)) {
    // log-slope of the tail between 60% and 5% of the peak
    std::size_t i1 = ipk;
    while (i1 < n && std::abs(v[i1]) > 0.6 * vpk) ++i1;
    std::size_t i2 = n - 1;
    while (i2 > i1 && std::abs(v[i2]) < 0.05 * vpk) --i2;
    if (i2 > i1 + 4) {
      const std::size_t stride = std::max<std::size_t>(1, (i2 - i1) / 256);
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, count = 0.0;
      for (std::size_t i = i1; i <= i2; i += stride) {
        if (!(std::abs(v[i]) > 0.0)) continue;
        const double t = trace.time_at(i);
        const double y = std::log(std::abs(v[i]));
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        count += 1.0;
      }
      const double denom = count * sxx - sx * sx;
      if (count > 2.0 && denom > 0.0)
        kappa_init = -(count * sxy - sx * sy) / denom / kPi;
    }
    if (!(kappa_init > 0.0)) {
      const double tail = std::max(trace.time_at(n - 1) - trace.time_at(ipk), dt);
      kappa_init = 3.0 / (kPi * tail);
    }
  }

  double gamma_init = hints.gamma_c_hz;
  if (!(gamma_init > 0.0)) {
    const double rise = trace.time_at(ipk) - t0_init;
    const double s = kPi * kappa_init;
    if (rise <= 1.5 * dt) {
      gamma_init = 0.5 * cap_hz;
    } else {
      // peak time of the model: tau* = ln(g/s)/(g - s), monotone in g
      auto peak_time = [s](double g) { return std::log(g / s) / (g - s); };
      double glo = 1.000001 * s;
      double ghi = 2.0 * kPi * cap_hz;
      if (peak_time(ghi) >= rise)
        gamma_init = 0.5 * cap_hz;
      else if (peak_time(glo) <= rise)
        gamma_init = 2.0 * kappa_init;
      else {
        for (int it = 0; it < 80; ++it) {
          const double gm = 0.5 * (glo + ghi);
          (peak_time(gm) > rise ? glo : ghi) = gm;
        }
        gamma_init = 0.5 * (glo + ghi) / (2.0 * kPi);
      }
    }
  }
  gamma_init = std::clamp(gamma_init, kappa_init, 0.9 * cap_hz);

  {
    const double s = kPi * kappa_init;
    const double g = 2.0 * kPi * gamma_init;
    const double tau_pk = std::abs(g - s) > 1.0e-9 * g ? std::log(g / s) / (g - s)
                                                       : 1.0 / s;
    const double shape_pk = detail::ringdown_shape(tau_pk, s, g);
    if (!(shape_pk > 0.0)) throw ConfigError("degenerate ringdown initialization");
    t0_init = std::min(t0_init, trace.time_at(ipk) - 0.5 * tau_pk);
  }
  const double s0 = kPi * kappa_init;
  const double g0 = 2.0 * kPi * gamma_init;
  const double amp_init =
      orientation * vpk /
      detail::ringdown_shape(std::log(g0 / s0) / (g0 - s0), s0, g0);

  // Subsample long traces: full resolution around the edge, geometric tail.
  std::vector<std::size_t> idx;
  const std::size_t budget = 24000;
  if (n <= budget) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  } else {
    const std::size_t head_start = (iedge > 100) ? iedge - 100 : 0;
    const std::size_t pre_stride = std::max<std::size_t>(1, head_start / 256);
    for (std::size_t i = 0; i < head_start; i += pre_stride) idx.push_back(i);
    const std::size_t head_end = std::min(n, head_start + 4000);
    for (std::size_t i = head_start; i < head_end; ++i) idx.push_back(i);
    double cursor = static_cast<double>(head_end);
    const double ratio =
        std::pow(static_cast<double>(n) / cursor, 1.0 / 12000.0);
    while (cursor < static_cast<double>(n - 1)) {
      cursor = std::max(cursor * ratio, cursor + 1.0);
      idx.push_back(std::min<std::size_t>(static_cast<std::size_t>(cursor), n - 1));
    }
    idx.push_back(n - 1);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  }

  auto residuals = [&trace, &idx](const std::vector<double>& prm) {
    const double t0 = prm[0];
    const double s = kPi * prm[1];
    const double g = 2.0 * kPi * prm[2];
    const double amp = prm[3];
    std::vector<double> res(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double tau = trace.time_at(idx[k]) - t0;
      res[k] = amp * detail::ringdown_shape(tau, s, g) - trace.samples[idx[k]];
    }
    return res;
  };

  FitOptions options;
  const double inf = std::numeric_limits<double>::infinity();
  // t0 may sit at most half a sample before the first point: an earlier edge
  // is indistinguishable from a faster rise, which would leave gamma_c free.
  options.lower_bounds = {trace.t0_s - 0.5 * dt, 0.0, 0.0, -inf};
  options.upper_bounds = {trace.time_at(n - 1), inf, cap_hz, inf};
  options.step_scales = {std::max(std::abs(t0_init), 10.0 * dt), kappa_init, gamma_init,
                         std::abs(amp_init)};
  FitResult result =
      least_squares(residuals, {"t0", "kappa", "gamma_c", "amplitude"},
                    {t0_init, kappa_init, gamma_init, amp_init}, options);

  // Resolve the rate-exchange symmetry: the model depends on (s, g) only
  // symmetrically; by default report the slower internal rate as kappa unless
  // the initialization deliberately placed kappa on the fast branch.
  double s_fit = kPi * result.values[1];
  double g_fit = 2.0 * kPi * result.values[2];
  const bool init_slow_kappa = kPi * kappa_init <= 2.0 * kPi * gamma_init;
  if (s_fit > g_fit && init_slow_kappa) {
    // (kappa, gamma_c) -> (2 gamma_c, kappa/2); linearly propagate errors
    const std::size_t p = 4;
    std::vector<double> t(p * p, 0.0);
    t[0 * p + 0] = 1.0;
    t[3 * p + 3] = 1.0;
    t[1 * p + 2] = 2.0;
    t[2 * p + 1] = 0.5;
    std::vector<double> cov(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        double acc = 0.0;
        for (std::size_t a = 0; a < p; ++a)
          for (std::size_t b = 0; b < p; ++b)
            acc += t[i * p + a] * result.covariance[a * p + b] * t[j * p + b];
        cov[i * p + j] = acc;
      }
    result.covariance = std::move(cov);
    const double kappa_new = 2.0 * result.values[2];
    const double gamma_new = 0.5 * result.values[1];
    result.values[1] = kappa_new;
    result.values[2] = gamma_new;
    const double err_kappa = 2.0 * result.errors[2];
    const double err_gamma = 0.5 * result.errors[1];
    result.errors[1] = err_kappa;
    result.errors[2] = err_gamma;
    const bool ab = result.at_bound[1];
    result.at_bound[1] = result.at_bound[2];
    result.at_bound[2] = ab;
    s_fit = kPi * result.values[1];
    g_fit = 2.0 * kPi * result.values[2];
  }
  if (std::abs(g_fit - s_fit) < 1.0e-6 * std::max(std::abs(g_fit), std::abs(s_fit)))
    throw DegenerateRates("ringdown model is singular when the two rates coincide");
  result.units = {"s", "Hz", "Hz", "V/s"};
  return result;
}

// ===== Kerr slope fit =====

// Linear fit through the origin restricted to |K*n| < kappa/4 under an
// iteratively re-estimated slope; bistable points are always excluded.
inline FitResult fit_kerr(const std::vector<KerrPoint>& points, double kappa_hz) {
  if (!(kappa_hz > 0.0)) throw ConfigError("fit_kerr needs a positive linewidth");
  std::vector<const KerrPoint*> candidates;
  for (const KerrPoint& pt : points)
    if (!pt.bistable && pt.photons > 0.0) candidates.push_back(&pt);
  if (candidates.size() < 3)
    throw InsufficientLinearRegion("fewer than 3 non-bistable points");

  auto slope_of = [](const std::vector<const KerrPoint*>& sel) {
    double sxx = 0.0, sxy = 0.0;
    for (const KerrPoint* pt : sel) {
      sxx += pt->photons * pt->photons;
      sxy += pt->photons * pt->delta_hz;
    }
    return sxy / sxx;
  };

  double kerr = slope_of(candidates);
  std::vector<const KerrPoint*> region;
  for (int pass = 0; pass < 2; ++pass) {
    region.clear();
    for (const KerrPoint* pt : candidates)
      if (std::abs(kerr * pt->photons) < 0.25 * kappa_hz) region.push_back(pt);
    if (region.size() < 3)
      throw InsufficientLinearRegion("fewer than 3 points in the linear region");
    kerr = slope_of(region);
  }

  double ssr = 0.0, sxx = 0.0;
  for (const KerrPoint* pt : region) {
    const double r = pt->delta_hz - kerr * pt->photons;
    ssr += r * r;
    sxx += pt->photons * pt->photons;
  }
  const double variance =
      (region.size() > 1) ? ssr / static_cast<double>(region.size() - 1) / sxx : 0.0;

  FitResult result;
  result.names = {"kerr"};
  result.values = {kerr};
  result.errors = {std::sqrt(std::max(0.0, variance))};
  result.units = {"Hz/photon"};
  result.at_bound = {false};
  result.covariance = {variance};
  result.fitted_count = 1;
  result.residual_norm = std::sqrt(ssr);
  result.converged = true;
  result.iterations = 2;
  return result;
}

// ===== critical-coupling search =====

namespace detail {

inline double fitted_min_reflection(const DeviceParams& device, double gradiometric_phi0) {
  const BiasPoint bias{device.uniform_bias_phi0, gradiometric_phi0};
  const double f0 = cavity_frequency(device, bias);
  const double kappa = kappa_total(device, bias);
  const std::vector<double> freqs = linspace(f0 - 6.0 * kappa, f0 + 6.0 * kappa, 241);
  const FrequencySweep sweep = sweep_reflection_linear(device, bias, freqs);
  return fit_reflection(sweep).value("min_reflection");
}

}  // namespace detail

// Golden-section minimization of the fitted |Gamma_min| over gradiometric bias.
inline BiasPoint critical_coupling_search(const DeviceParams& device,
                                          double bracket_lo_phi0 = 5.0e-4,
                                          double bracket_hi_phi0 = 0.02) {
  if (!(bracket_lo_phi0 > 0.0) || !(bracket_hi_phi0 > bracket_lo_phi0))
    throw ConfigError("critical-coupling bracket must satisfy 0 < lo < hi");
  const BiasPoint lo_bias{device.uniform_bias_phi0, bracket_lo_phi0};
  const BiasPoint hi_bias{device.uniform_bias_phi0, bracket_hi_phi0};
  if (!(external_coupling(device, lo_bias) < internal_loss(device, lo_bias) &&
        external_coupling(device, hi_bias) > internal_loss(device, hi_bias)))
    throw BracketError("bracket does not contain critical coupling");

  const double invphi = 0.61803398874989484820;
  double a = bracket_lo_phi0, b = bracket_hi_phi0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = detail::fitted_min_reflection(device, c);
  double fd = detail::fitted_min_reflection(device, d);
  while (b - a > 1.0e-8) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = detail::fitted_min_reflection(device, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = detail::fitted_min_reflection(device, d);
    }
  }
  return BiasPoint{device.uniform_bias_phi0, 0.5 * (a + b)};
}

// ===== scalar figures of merit =====

inline double on_off_ratio(double kappa_max_hz, double kappa_int_hz) {
  if (!(kappa_max_hz > 0.0) || !(kappa_int_hz > 0.0))
    throw ConfigError("on/off ratio needs positive rates");
  return kappa_max_hz / kappa_int_hz;
}

// Index of the maximum-kappa row inside the contiguous bias range around the
// energy maximum where energy >= threshold * max(energy).
inline std::size_t plateau_max_row(const std::vector<PlateauPoint>& points,
                                   double energy_threshold = 0.95) {
  if (points.size() < 3) throw NoPlateau("fewer than 3 sweep points");
  std::size_t ibest = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].energy_photons > points[ibest].energy_photons) ibest = i;
  const double floor = energy_threshold * points[ibest].energy_photons;
  std::size_t lo = ibest, hi = ibest;
  while (lo > 0 && points[lo - 1].energy_photons >= floor) --lo;
  while (hi + 1 < points.size() && points[hi + 1].energy_photons >= floor) ++hi;
  if (hi - lo + 1 < 3) throw NoPlateau("no contiguous plateau of 3 or more points");
  std::size_t imax = lo;
  for (std::size_t i = lo; i <= hi; ++i)
    if (points[i].kappa_hz > points[imax].kappa_hz) imax = i;
  return imax;
}

// Maximum fitted kappa, minus kappa_int, over the energy plateau.
inline double plateau_kappa_max(const std::vector<PlateauPoint>& points,
                                double kappa_int_hz, double energy_threshold = 0.95) {
  return points[plateau_max_row(points, energy_threshold)].kappa_hz - kappa_int_hz;
}

// ===== result serialization =====

// Machine-readable block: one "name value std_error unit" line per parameter.
inline std::string fit_report_kv(const FitResult& result) {
  std::string out;
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    out += result.names[i];
    out += ' ';
    out += format_double(result.values[i]);
    out += ' ';
    out += format_double(result.errors[i]);
    out += ' ';
    out += (i < result.units.size() && !result.units[i].empty()) ? result.units[i] : "-";
    out += '\n';
  }
  out += "residual_norm " + format_double(result.residual_norm) + '\n';
  out += std::string("converged ") + (result.converged ? "true" : "false") + '\n';
  out += "iterations " + std::to_string(result.iterations) + '\n';
  return out;
}

// Human-readable table of the same content.
inline std::string fit_report_text(const FitResult& result) {
  std::string out = "parameter            value                      std_error        unit\n";
  char line[160];
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    const char* unit =
        (i < result.units.size() && !result.units[i].empty()) ? result.units[i].c_str() : "-";
    std::snprintf(line, sizeof line, "%-20s %-26.17g %-16.9g %s%s\n",
                  result.names[i].c_str(), result.values[i], result.errors[i], unit,
                  (i < result.at_bound.size() && result.at_bound[i]) ? "  [at bound]" : "");
    out += line;
  }
  std::snprintf(line, sizeof line, "residual_norm = %.17g, converged = %s, iterations = %d\n",
                result.residual_norm, result.converged ? "true" : "false",
                result.iterations);
  out += line;
  return out;
}

}  // namespace tibsim
