#pragma once

// Rotating-frame dynamics of the driven, flux-switched cavity:
//   da/dt = (i 2pi delta(t) + i 2pi K |a|^2 - pi kappa(t)) a + sqrt(2pi kappa_ext(t)) alpha_in(t)
// with all rates ordinary frequencies [Hz], delta(t) the bias-dependent cavity
// frequency minus the frame frequency, and alpha_in in sqrt(photons/s).
// Also synthesizes the detected voltage including the single-pole ADC response.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "tibsim/constants.hpp"
#include "tibsim/device.hpp"
#include "tibsim/errors.hpp"
#include "tibsim/spectroscopy.hpp"
#include "tibsim/trace.hpp"

namespace tibsim {

struct DriveSegment {
  double duration_s = 0.0;         // > 0 [s]
  double drive_amplitude = 0.0;    // |alpha_in| [sqrt(photons/s)]
  double drive_detuning_hz = 0.0;  // drive frequency minus frame frequency [Hz]
  BiasPoint bias;                  // flux bias while the segment runs
};

struct PulseSequence {
  double frame_frequency_hz = 0.0;  // rotating-frame reference [Hz]
  double bias_ramp_time_s = 0.0;    // linear flux ramp into each new segment; 0 = instantaneous
  std::vector<DriveSegment> segments;
};

struct AdcModel {
  double corner_frequency_hz = 48.0e6;  // single-pole corner, gamma_c / 2pi [Hz]
};

namespace detail {

struct FrameRates {
  double detuning_hz = 0.0;  // cavity minus frame [Hz]
  double kappa_int_hz = 0.0;
  double kappa_ext_hz = 0.0;
  double kerr_hz = 0.0;      // [Hz/photon]
  double in_coupling = 0.0;  // sqrt(2 pi kappa_ext) [sqrt(Hz)]
};

inline FrameRates frame_rates(const DeviceParams& device, const BiasPoint& bias,
                              double frame_frequency_hz) {
  FrameRates r;
  r.detuning_hz = cavity_frequency(device, bias) - frame_frequency_hz;
  r.kappa_int_hz = internal_loss(device, bias);
  r.kappa_ext_hz = external_coupling(device, bias);
  r.kerr_hz = self_kerr(device, bias);
  r.in_coupling = std::sqrt(2.0 * kPi * r.kappa_ext_hz);
  return r;
}

inline BiasPoint lerp_bias(const BiasPoint& a, const BiasPoint& b, double x) {
  return BiasPoint{a.uniform_phi0 + (b.uniform_phi0 - a.uniform_phi0) * x,
                   a.gradiometric_phi0 + (b.gradiometric_phi0 - a.gradiometric_phi0) * x};
}

}  // namespace detail

inline ComplexTimeTrace integrate_cavity(const DeviceParams& device, const PulseSequence& sequence,
                                         double dt_s,
                                         std::complex<double> initial_state = {0.0, 0.0}) {
  using cplx = std::complex<double>;
  if (sequence.segments.empty()) throw ConfigError("pulse sequence has no segments");
  if (!(dt_s > 0.0)) throw ConfigError("integration step must be positive");
  if (sequence.bias_ramp_time_s < 0.0) throw ConfigError("bias ramp time must be non-negative");

  struct Plan {
    long long steps = 0;
    detail::FrameRates rates;
    double amplitude = 0.0;
    double drive_detuning_hz = 0.0;
    BiasPoint bias;
    BiasPoint previous_bias;
    double ramp_s = 0.0;  // ramp duration at the head of this segment
  };
  std::vector<Plan> plans;
  plans.reserve(sequence.segments.size());
  long long total_steps = 0;
  for (std::size_t k = 0; k < sequence.segments.size(); ++k) {
    const DriveSegment& seg = sequence.segments[k];
    if (!(seg.duration_s > 0.0)) throw ConfigError("segment duration must be positive");
    if (seg.drive_amplitude < 0.0) throw ConfigError("drive amplitude must be non-negative");
    Plan plan;
    plan.steps = std::llround(seg.duration_s / dt_s);
    if (plan.steps < 1 ||
        std::abs(static_cast<double>(plan.steps) * dt_s - seg.duration_s) > 1e-6 * dt_s)
      throw TimeBaseMismatch("segment duration must be an integer multiple of dt");
    plan.rates = detail::frame_rates(device, seg.bias, sequence.frame_frequency_hz);
    plan.amplitude = seg.drive_amplitude;
    plan.drive_detuning_hz = seg.drive_detuning_hz;
    plan.bias = seg.bias;
    if (k > 0 && sequence.bias_ramp_time_s > 0.0) {
      if (sequence.bias_ramp_time_s > seg.duration_s * (1.0 + 1e-12))
        throw ConfigError("bias ramp is longer than the segment it leads into");
      plan.ramp_s = sequence.bias_ramp_time_s;
      plan.previous_bias = sequence.segments[k - 1].bias;
    }
    const double max_rate_hz =
        std::max({plan.rates.kappa_int_hz + plan.rates.kappa_ext_hz,
                  std::abs(plan.rates.detuning_hz), std::abs(plan.drive_detuning_hz)});
    if (dt_s * max_rate_hz > 0.1 * (1.0 + 1e-12))
      throw StepTooLarge("dt too large for the fastest sequence rate; need dt <= " +
                         format_double(0.1 / max_rate_hz) + " s");
    total_steps += plan.steps;
    plans.push_back(plan);
  }

  ComplexTimeTrace out;
  out.t0_s = 0.0;
  out.dt_s = dt_s;
  out.samples.reserve(static_cast<std::size_t>(total_steps) + 1);
  cplx a = initial_state;
  out.samples.push_back(a);

  const double two_pi = 2.0 * kPi;
  long long global_step = 0;
  for (const Plan& plan : plans) {
    const bool ramped = plan.ramp_s > 0.0;
    const double seg_t0 = static_cast<double>(global_step) * dt_s;
    auto deriv = [&](double t, cplx state) -> cplx {
      detail::FrameRates r = plan.rates;
      if (ramped) {
        const double local = t - seg_t0;
        if (local < plan.ramp_s)
          r = detail::frame_rates(device,
                                  detail::lerp_bias(plan.previous_bias, plan.bias,
                                                    local / plan.ramp_s),
                                  sequence.frame_frequency_hz);
      }
      const double kappa = r.kappa_int_hz + r.kappa_ext_hz;
      const cplx coeff(-kPi * kappa, two_pi * (r.detuning_hz + r.kerr_hz * std::norm(state)));
      cplx d = coeff * state;
      if (plan.amplitude > 0.0) {
        const double phase = two_pi * plan.drive_detuning_hz * t;
        d += r.in_coupling * plan.amplitude * cplx(std::cos(phase), std::sin(phase));
      }
      return d;
    };
    for (long long s = 0; s < plan.steps; ++s) {
      const double t = static_cast<double>(global_step) * dt_s;
      const cplx k1 = deriv(t, a);
      const cplx k2 = deriv(t + 0.5 * dt_s, a + 0.5 * dt_s * k1);
      const cplx k3 = deriv(t + 0.5 * dt_s, a + 0.5 * dt_s * k2);
      const cplx k4 = deriv(t + dt_s, a + dt_s * k3);
      a += (dt_s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ++global_step;
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw NonFiniteState("cavity state diverged at t = " +
                             format_double(static_cast<double>(global_step) * dt_s) + " s");
      out.samples.push_back(a);
    }
  }
  return out;
}

// Per-sample bias matching integrate_cavity's sampling; boundary samples take
// the bias of the segment that starts there.
inline std::vector<BiasPoint> bias_waveform(const PulseSequence& sequence, double dt_s,
                                            std::size_t sample_count) {
  if (sequence.segments.empty()) throw ConfigError("pulse sequence has no segments");
  if (!(dt_s > 0.0)) throw ConfigError("integration step must be positive");
  std::vector<BiasPoint> biases;
  long long global_step = 0;
  for (std::size_t k = 0; k < sequence.segments.size(); ++k) {
    const DriveSegment& seg = sequence.segments[k];
    const long long steps = std::llround(seg.duration_s / dt_s);
    if (steps < 1 || std::abs(static_cast<double>(steps) * dt_s - seg.duration_s) > 1e-6 * dt_s)
      throw TimeBaseMismatch("segment duration must be an integer multiple of dt");
    const bool ramped = k > 0 && sequence.bias_ramp_time_s > 0.0;
    const double seg_t0 = static_cast<double>(global_step) * dt_s;
    for (long long s = 0; s < steps; ++s) {
      const double local = static_cast<double>(global_step) * dt_s - seg_t0;
      if (ramped && local < sequence.bias_ramp_time_s) {
        biases.push_back(detail::lerp_bias(sequence.segments[k - 1].bias, seg.bias,
                                           local / sequence.bias_ramp_time_s));
      } else {
        biases.push_back(seg.bias);
      }
      ++global_step;
    }
  }
  biases.push_back(sequence.segments.back().bias);
  if (biases.size() != sample_count)
    throw TimeBaseMismatch("bias waveform length does not match the trace");
  return biases;
}

// Detected homodyne voltage V(t) = Re[e^{i phi} sqrt(2 pi kappa_ext hbar omega Z0) a(t)].
inline TimeTrace output_voltage(const DeviceParams& device, const ComplexTimeTrace& field,
                                const BiasPoint& bias, double detection_phase_rad = 0.0) {
  validate(field);
  const double omega_ang = 2.0 * kPi * device.cavity.bare_frequency_hz;
  const double scale = std::sqrt(2.0 * kPi * external_coupling(device, bias) * kHbar * omega_ang *
                                 device.line_impedance_ohm);
  const std::complex<double> rot(std::cos(detection_phase_rad), std::sin(detection_phase_rad));
  TimeTrace v;
  v.t0_s = field.t0_s;
  v.dt_s = field.dt_s;
  v.samples.reserve(field.samples.size());
  for (const std::complex<double>& a : field.samples) v.samples.push_back(scale * (rot * a).real());
  return v;
}

inline TimeTrace output_voltage(const DeviceParams& device, const ComplexTimeTrace& field,
                                const std::vector<BiasPoint>& bias_waveform,
                                double detection_phase_rad = 0.0) {
  validate(field);
  if (bias_waveform.size() != field.samples.size())
    throw TimeBaseMismatch("bias waveform length does not match the trace");
  const double omega_ang = 2.0 * kPi * device.cavity.bare_frequency_hz;
  const double base = kHbar * omega_ang * device.line_impedance_ohm;
  const std::complex<double> rot(std::cos(detection_phase_rad), std::sin(detection_phase_rad));
  TimeTrace v;
  v.t0_s = field.t0_s;
  v.dt_s = field.dt_s;
  v.samples.reserve(field.samples.size());
  for (std::size_t i = 0; i < field.samples.size(); ++i) {
    const double scale =
        std::sqrt(2.0 * kPi * external_coupling(device, bias_waveform[i]) * base);
    v.samples.push_back(scale * (rot * field.samples[i]).real());
  }
  return v;
}

// Single-pole low-pass y' = gamma (x - y), integrated exactly over each step
// under a zero-order-hold input; y(t0) = 0.
inline TimeTrace apply_adc_filter(const TimeTrace& trace, const AdcModel& adc) {
  validate(trace);
  if (!(adc.corner_frequency_hz > 0.0)) throw ConfigError("adc corner frequency must be positive");
  if (trace.dt_s * adc.corner_frequency_hz > 0.1 * (1.0 + 1e-12))
    throw StepTooLarge("dt too large for the adc corner; need dt <= " +
                       format_double(0.1 / adc.corner_frequency_hz) + " s");
  const double gamma_ang = 2.0 * kPi * adc.corner_frequency_hz;
  const double coef = -std::expm1(-gamma_ang * trace.dt_s);
  TimeTrace out = trace;
  double y = 0.0;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out.samples[i] = y;
    y += coef * (trace.samples[i] - y);
  }
  return out;
}

// Trapezoidal integral of V^2/(Z0 hbar omega), in photons.
inline double measured_energy(const TimeTrace& voltage, const DeviceParams& device) {
  validate(voltage);
  const double omega_ang = 2.0 * kPi * device.cavity.bare_frequency_hz;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < voltage.samples.size(); ++i) {
    const double a = voltage.samples[i];
    const double b = voltage.samples[i + 1];
    acc += 0.5 * (a * a + b * b);
  }
  return acc * voltage.dt_s / (device.line_impedance_ohm * kHbar * omega_ang);
}

// Drive amplitude whose steady state holds exactly target_photons when ringing
// up from vacuum at the given drive detuning (relative to the cavity at this bias).
inline double steady_drive_amplitude(const DeviceParams& device, const BiasPoint& bias,
                                     double drive_detuning_from_cavity_hz, double target_photons) {
  if (!(target_photons > 0.0)) throw ConfigError("target photon number must be positive");
  const double kext = external_coupling(device, bias);
  const double kint = internal_loss(device, bias);
  if (kext <= 0.0) throw BalancedBiasError("cannot drive the cavity through a balanced bridge");
  const double kappa = kint + kext;
  const double kerr = self_kerr(device, bias);
  const double d_eff = drive_detuning_from_cavity_hz - kerr * target_photons;
  const double flux =
      2.0 * kPi * target_photons * (d_eff * d_eff + 0.25 * kappa * kappa) / kext;
  const DuffingSolution sol =
      duffing_steady_states(drive_detuning_from_cavity_hz, kint, kext, kerr, flux);
  double lowest_stable = -1.0;
  for (std::size_t i = 0; i < sol.photon_numbers.size(); ++i) {
    if (sol.stable[i]) {
      lowest_stable = sol.photon_numbers[i];
      break;
    }
  }
  if (lowest_stable < 0.0 || std::abs(lowest_stable - target_photons) > 1e-6 * target_photons)
    throw UnreachableSteadyState(
        "ring-up from vacuum settles on a different Duffing branch than requested");
  return std::sqrt(flux);
}

// Quadrature rotation maximizing the energy captured by one-quadrature detection.
inline double aligned_detection_phase(const ComplexTimeTrace& field) {
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t i = 0; i < field.samples.size(); ++i) {
    const std::complex<double> sq = field.samples[i] * field.samples[i];
    const double w = (i == 0 || i + 1 == field.samples.size()) ? 0.5 : 1.0;
    acc += w * sq;
  }
  if (std::abs(acc) == 0.0) return 0.0;
  return -0.5 * std::arg(acc);
}

struct RingdownConfig {
  double stored_photons = 8000.0;   // photons at the start of readout
  double hold_duration_s = 1.0e-6;  // drive off, coupler off
  double charge_linewidths = 12.0;  // charge duration in units of 1/kappa(charge bias)
  double readout_linewidths = 10.0; // readout window in units of 1/kappa(readout bias)
  double readout_pad_s = 2.0e-7;    // extra drive-off tail after the window
  double dt_s = 1.0e-9;
  AdcModel adc;
  bool auto_detection_phase = true;  // align the detected quadrature with the emitted field
  double detection_phase_rad = 0.0;  // used when auto_detection_phase is false
};

struct RingdownResult {
  TimeTrace voltage_filtered;   // stage-3 detected voltage after the ADC filter
  TimeTrace voltage;            // same before filtering
  ComplexTimeTrace field;       // a(t) over the readout window, t = 0 at the switch
  double photons_at_readout = 0.0;
  double detection_phase_rad = 0.0;
  double drive_amplitude = 0.0;      // sqrt(photons/s) used during charging
  double frame_frequency_hz = 0.0;   // rotating-frame reference (cavity at readout bias)
  double kappa_ext_hz = 0.0;         // at the readout bias
  double kappa_total_hz = 0.0;       // at the readout bias
};

// Charge at the on-bias resonance, hold 1 us with the coupler balanced, then
// switch to readout_bias and record the emitted voltage.
inline RingdownResult ringdown_protocol(const DeviceParams& device, const BiasPoint& readout_bias,
                                        const RingdownConfig& config = {}) {
  if (!(config.stored_photons > 0.0)) throw ConfigError("stored photon number must be positive");
  if (!(config.dt_s > 0.0)) throw ConfigError("integration step must be positive");
  const double dt = config.dt_s;
  const BiasPoint charge_bias = on_bias(device);
  const BiasPoint hold_bias{device.uniform_bias_phi0, 0.0};

  const double kappa_charge = kappa_total(device, charge_bias);
  const long long charge_steps = static_cast<long long>(
      std::ceil(config.charge_linewidths / (kappa_charge * dt)));
  const long long hold_steps = std::llround(config.hold_duration_s / dt);
  if (hold_steps < 1) throw ConfigError("hold duration must cover at least one step");

  // The balanced hold decays the stored field at kappa_int; charge to a higher
  // steady state so that exactly stored_photons remain at the switch.
  const double kint_hold = internal_loss(device, hold_bias);
  const double hold_s = static_cast<double>(hold_steps) * dt;
  const double charge_target =
      config.stored_photons * std::exp(2.0 * kPi * kint_hold * hold_s);
  const double amplitude = steady_drive_amplitude(device, charge_bias, 0.0, charge_target);

  const double kappa_readout = kappa_total(device, readout_bias);
  long long readout_steps = static_cast<long long>(
      std::ceil(config.readout_linewidths / (kappa_readout * dt)));
  readout_steps += std::llround(config.readout_pad_s / dt);
  if (readout_steps < 2) readout_steps = 2;

  PulseSequence sequence;
  sequence.frame_frequency_hz = cavity_frequency(device, readout_bias);
  DriveSegment charge;
  charge.duration_s = static_cast<double>(charge_steps) * dt;
  charge.drive_amplitude = amplitude;
  charge.drive_detuning_hz = cavity_frequency(device, charge_bias) - sequence.frame_frequency_hz;
  charge.bias = charge_bias;
  DriveSegment hold;
  hold.duration_s = hold_s;
  hold.bias = hold_bias;
  DriveSegment readout;
  readout.duration_s = static_cast<double>(readout_steps) * dt;
  readout.bias = readout_bias;
  sequence.segments = {charge, hold, readout};

  const ComplexTimeTrace full = integrate_cavity(device, sequence, dt);
  const std::size_t start = static_cast<std::size_t>(charge_steps + hold_steps);

  RingdownResult result;
  result.field.t0_s = 0.0;
  result.field.dt_s = dt;
  result.field.samples.assign(full.samples.begin() + static_cast<std::ptrdiff_t>(start),
                              full.samples.end());
  result.photons_at_readout = std::norm(result.field.samples.front());
  result.frame_frequency_hz = sequence.frame_frequency_hz;
  result.kappa_ext_hz = external_coupling(device, readout_bias);
  result.kappa_total_hz = kappa_readout;
  result.drive_amplitude = amplitude;

  double phase = config.auto_detection_phase ? aligned_detection_phase(result.field)
                                             : config.detection_phase_rad;
  result.voltage = output_voltage(device, result.field, readout_bias, phase);
  if (config.auto_detection_phase) {
    // Fix the leftover sign freedom so the peak detected voltage is positive.
    double peak = 0.0;
    for (double v : result.voltage.samples)
      if (std::abs(v) > std::abs(peak)) peak = v;
    if (peak < 0.0) {
      for (double& v : result.voltage.samples) v = -v;
      phase += phase > 0.0 ? -kPi : kPi;
    }
  }
  result.detection_phase_rad = phase;
  result.voltage_filtered = apply_adc_filter(result.voltage, config.adc);
  return result;
}

// V0 = sqrt(E_stored kappa_g Z0) with kappa_g the on-bias (maximal) external
// coupling and the stored energy in joules: the detected voltage right after
// switching to the on-bias readout.
inline double reference_voltage(const DeviceParams& device, double stored_photons) {
  const double omega_ang = 2.0 * kPi * device.cavity.bare_frequency_hz;
  const double kappa_g_ang = 2.0 * kPi * external_coupling(device, on_bias(device));
  return std::sqrt(stored_photons * kHbar * omega_ang * kappa_g_ang *
                   device.line_impedance_ohm);
}

}  // namespace tibsim
