// experiments.hpp — the three virtual experiments and the performance report.
//
// Each experiment is a closed loop: the device model synthesizes data
// (reflection sweeps, ringdown traces, Duffing resonance shifts) and the
// extraction layer fits that data back to recover the figures of merit. The
// report combines the three runs into the five-row performance summary.
//
// Everything here is deterministic: identical configs give bit-identical
// results and output files.
#ifndef TIBSIM_EXPERIMENTS_HPP
#define TIBSIM_EXPERIMENTS_HPP

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "tibsim/config.hpp"
#include "tibsim/csv.hpp"
#include "tibsim/device.hpp"
#include "tibsim/dynamics.hpp"
#include "tibsim/errors.hpp"
#include "tibsim/extraction.hpp"
#include "tibsim/fit.hpp"
#include "tibsim/spectroscopy.hpp"
#include "tibsim/trace.hpp"

namespace tibsim {

// ---------------------------------------------------------------------------
// Reflection sweep (linewidth and reflection depth vs bias)
// ---------------------------------------------------------------------------

struct ReflectionSweepRow {
  double bias_phi0 = 0.0;   // gradiometric bias  [Phi0]
  double kappa_hz = 0.0;    // fitted total linewidth  [Hz]
  double min_gamma = 0.0;   // fitted minimal reflection amplitude
  bool fit_ok = false;
};

struct ReflectionSweepResult {
  std::vector<ReflectionSweepRow> rows;       // one per grid bias
  std::vector<FitResult> fits;                // matching fit results
  std::size_t critical_index = 0;             // row with the deepest reflection
  FrequencySweep critical_sweep;              // raw sweep at that bias
};

namespace detail {

inline std::vector<double> sweep_frequencies(const DeviceParams& device, const BiasPoint& bias,
                                             double span_linewidths, int points) {
  const double f0 = cavity_frequency(device, bias);
  const double span = span_linewidths * kappa_total(device, bias);
  return linspace(f0 - 0.5 * span, f0 + 0.5 * span, static_cast<std::size_t>(points));
}

}  // namespace detail

/// Sweeps the probe tone across the resonance at every bias in the grid and
/// fits each sweep. Failed fits flag the row (values NaN) and the run
/// continues.
inline ReflectionSweepResult run_reflection_sweep(const SimulationConfig& cfg) {
  const DeviceParams& dev = cfg.device;
  const ReflectionSweepConfig& rs = cfg.reflection;
  if (rs.bias_grid_phi0.empty()) throw ConfigError("reflection sweep: empty bias grid");

  ReflectionSweepResult result;
  result.rows.reserve(rs.bias_grid_phi0.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double best_min = std::numeric_limits<double>::infinity();
  for (double g : rs.bias_grid_phi0) {
    const BiasPoint bias{dev.uniform_bias_phi0, g};
    const std::vector<double> freqs =
        detail::sweep_frequencies(dev, bias, rs.span_linewidths, rs.points_per_sweep);
    const double power_w =
        rs.probe_photons / photon_number(1.0, kappa_total(dev, bias), freqs.front());
    const FrequencySweep sweep = sweep_reflection_linear(dev, bias, freqs, power_w);
    ReflectionSweepRow row;
    row.bias_phi0 = g;
    try {
      const FitResult fit = fit_reflection(sweep);
      row.kappa_hz = fit.value("kappa");
      row.min_gamma = fit.value("min_reflection");
      row.fit_ok = true;
      result.fits.push_back(fit);
    } catch (const Error&) {
      row.kappa_hz = nan;
      row.min_gamma = nan;
      result.fits.emplace_back();
    }
    if (row.fit_ok && row.min_gamma < best_min) {
      best_min = row.min_gamma;
      result.critical_index = result.rows.size();
      result.critical_sweep = sweep;
    }
    result.rows.push_back(row);
  }
  if (!std::isfinite(best_min)) throw ConfigError("reflection sweep: every fit failed");
  return result;
}

inline void write_csv(const ReflectionSweepResult& result, const std::string& path) {
  std::vector<std::vector<double>> rows;
  rows.reserve(result.rows.size());
  for (const ReflectionSweepRow& r : result.rows)
    rows.push_back({r.bias_phi0, r.kappa_hz, r.min_gamma});
  write_csv(path, {"bias_phi0", "kappa_hz", "min_gamma"}, rows);
}

// ---------------------------------------------------------------------------
// Ringdown sweep (decay rate and recovered energy vs bias)
// ---------------------------------------------------------------------------

struct RingdownSweepRow {
  double bias_phi0 = 0.0;       // readout gradiometric bias  [Phi0]
  double kappa_hz = 0.0;        // fitted total linewidth  [Hz]
  double energy_photons = 0.0;  // energy recovered from the output line  [photons]
  bool fit_ok = false;
};

struct RingdownSweepResult {
  std::vector<RingdownSweepRow> rows;  // one per grid bias
  std::vector<FitResult> fits;         // matching ringdown fits
  std::vector<TimeTrace> traces;       // recorded example traces, value = V/V0
  double reference_voltage_v = 0.0;    // V0 used to normalize the traces
  double stored_photons = 0.0;         // energy loaded before each readout
};

/// Charges, holds, and reads out the cavity at every bias in the grid; fits
/// each filtered trace and integrates the recovered energy. Also records the
/// three configured example traces over the plot window, normalized by V0.
inline RingdownSweepResult run_ringdown_sweep(const SimulationConfig& cfg) {
  const DeviceParams& dev = cfg.device;
  const RingdownSweepConfig& rs = cfg.ringdown;
  if (rs.bias_grid_phi0.empty()) throw ConfigError("ringdown sweep: empty bias grid");

  RingdownConfig protocol;
  protocol.stored_photons = rs.stored_photons;
  protocol.adc = cfg.adc;

  RingdownSweepResult result;
  result.stored_photons = rs.stored_photons;
  result.reference_voltage_v = reference_voltage(dev, rs.stored_photons);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double g : rs.bias_grid_phi0) {
    const BiasPoint bias{dev.uniform_bias_phi0, g};
    const RingdownResult run = ringdown_protocol(dev, bias, protocol);
    RingdownSweepRow row;
    row.bias_phi0 = g;
    row.energy_photons = measured_energy(run.voltage, dev);
    try {
      RingdownFitHints hints;
      hints.kappa_hz = run.kappa_total_hz;
      hints.gamma_c_hz = cfg.adc.corner_frequency_hz;
      const FitResult fit = fit_ringdown(run.voltage_filtered, hints);
      row.kappa_hz = fit.value("kappa");
      row.fit_ok = true;
      result.fits.push_back(fit);
    } catch (const Error&) {
      row.kappa_hz = nan;
      result.fits.emplace_back();
    }
    result.rows.push_back(row);
  }

  // Example traces: readout window clipped to the plot window, decimated.
  for (double g : rs.trace_biases_phi0) {
    const BiasPoint bias{dev.uniform_bias_phi0, g};
    RingdownConfig short_run = protocol;
    short_run.readout_linewidths = rs.trace_window_s * kappa_total(dev, bias);
    const RingdownResult run = ringdown_protocol(dev, bias, short_run);
    const TimeTrace& full = run.voltage_filtered;
    TimeTrace trace;
    trace.t0_s = full.t0_s;
    trace.dt_s = full.dt_s * rs.trace_stride;
    for (std::size_t i = 0; i < full.samples.size();
         i += static_cast<std::size_t>(rs.trace_stride)) {
      if (full.time_at(i) > full.t0_s + rs.trace_window_s) break;
      trace.samples.push_back(full.samples[i] / result.reference_voltage_v);
    }
    result.traces.push_back(trace);
  }
  return result;
}

inline void write_csv(const RingdownSweepResult& result, const std::string& path) {
  std::vector<std::vector<double>> rows;
  rows.reserve(result.rows.size());
  for (const RingdownSweepRow& r : result.rows)
    rows.push_back({r.bias_phi0, r.kappa_hz, r.energy_photons});
  write_csv(path, {"bias_phi0", "kappa_hz", "energy_photons"}, rows);
}

// ---------------------------------------------------------------------------
// Kerr sweep (resonance shift vs drive power at critical coupling)
// ---------------------------------------------------------------------------

struct KerrSweepRow {
  double photons = 0.0;    // drive strength as a formula photon number
  double delta_hz = 0.0;   // resonance shift from the low-power reference  [Hz]
  bool bistable = false;   // hysteresis detected anywhere in this sweep
};

struct KerrSweepResult {
  std::vector<KerrSweepRow> rows;   // one per power
  FitResult fit;                    // linear Kerr fit through the origin
  double critical_bias_phi0 = 0.0;  // bias found by the critical-coupling search
  double kappa_hz = 0.0;            // total linewidth at that bias
  double reference_frequency_hz = 0.0;  // fitted low-power resonance  [Hz]
};

/// Steps the drive power up a geometric ladder at the critical-coupling bias,
/// measures the resonance shift of each nonlinear sweep against the low-power
/// reference, and fits the shift-per-photon slope on the linear region.
inline KerrSweepResult run_kerr_sweep(const SimulationConfig& cfg) {
  const DeviceParams& dev = cfg.device;
  const KerrSweepConfig& ks = cfg.kerr;

  KerrSweepResult result;
  const BiasPoint crit = critical_coupling_search(dev);
  result.critical_bias_phi0 = crit.gradiometric_phi0;
  const double kappa = kappa_total(dev, crit);
  result.kappa_hz = kappa;
  const double f0 = cavity_frequency(dev, crit);
  const double photons_per_watt = photon_number(1.0, kappa, f0);

  std::vector<KerrPoint> points;
  points.reserve(ks.n_powers);
  double center = f0;
  double f_ref = 0.0;
  for (int k = 0; k < ks.n_powers; ++k) {
    const double photons = ks.photons_min * std::pow(ks.power_ratio, k);
    const double power_w = photons / photons_per_watt;
    const std::vector<double> freqs =
        detail::linspace(center - 0.5 * ks.span_linewidths * kappa,
                         center + 0.5 * ks.span_linewidths * kappa,
                         static_cast<std::size_t>(ks.points_per_sweep));
    const std::vector<NonlinearReflectionPoint> sweep =
        sweep_reflection_nonlinear(dev, crit, freqs, power_w);
    bool bistable = false;
    for (const NonlinearReflectionPoint& pt : sweep) bistable |= pt.bistable;
    const double f_res =
        resonance_by_phase_slope(to_frequency_sweep(sweep, power_w, crit));
    if (k == 0) f_ref = f_res;
    KerrSweepRow row;
    row.photons = photons;
    row.delta_hz = f_res - f_ref;
    row.bistable = bistable;
    result.rows.push_back(row);
    points.push_back({photons, row.delta_hz, bistable});
    center = f_res;  // track the shifting resonance with the sweep window
  }
  result.reference_frequency_hz = f_ref;
  result.fit = fit_kerr(points, kappa);
  return result;
}

inline void write_csv(const KerrSweepResult& result, const std::string& path) {
  std::vector<std::vector<double>> rows;
  rows.reserve(result.rows.size());
  for (const KerrSweepRow& r : result.rows)
    rows.push_back({r.photons, r.delta_hz, r.bistable ? 1.0 : 0.0});
  write_csv(path, {"photons", "delta_hz", "bistable_flag"}, rows);
}

// ---------------------------------------------------------------------------
// Performance report (the five figures of merit)
// ---------------------------------------------------------------------------

struct PerformanceReport {
  double loss_hz = 0.0;              // chip-added internal loss  [Hz]
  double loss_err_hz = 0.0;
  double kappa_max_hz = 0.0;         // maximal external coupling  [Hz]
  double kappa_max_err_hz = 0.0;
  double on_off_ratio = 0.0;         // kappa_max / kappa_int
  double on_off_ratio_err = 0.0;
  double switching_time_s = 0.0;     // 1 / (2 pi gamma_c)  [s]
  double switching_time_err_s = 0.0;
  double self_kerr_hz_per_photon = 0.0;
  double self_kerr_err_hz_per_photon = 0.0;
  // Supporting fitted quantities the rows are derived from.
  double kappa_int_hz = 0.0;         // fitted internal loss  [Hz]
  double kappa_int_err_hz = 0.0;
  double gamma_c_hz = 0.0;           // fitted detection corner  [Hz]
  double gamma_c_err_hz = 0.0;
};

struct PerformanceRun {
  ReflectionSweepResult reflection;
  RingdownSweepResult ringdown;
  KerrSweepResult kerr;
  PerformanceReport report;
};

/// Runs all three experiments and combines them into the five-row report:
/// added loss from the critical-bias reflection fit, maximal coupling and
/// switching time from the ringdown plateau, on/off ratio from their
/// quotient, and the self-Kerr from the power sweep.
inline PerformanceRun run_performance_report(const SimulationConfig& cfg) {
  PerformanceRun run;
  run.reflection = run_reflection_sweep(cfg);
  run.ringdown = run_ringdown_sweep(cfg);
  run.kerr = run_kerr_sweep(cfg);
  PerformanceReport& rep = run.report;

  const FitResult& crit_fit = run.reflection.fits[run.reflection.critical_index];
  rep.kappa_int_hz = crit_fit.value("kappa_int");
  rep.kappa_int_err_hz = crit_fit.error("kappa_int");
  rep.loss_hz = rep.kappa_int_hz - cfg.device.cavity.bare_loss_hz;
  rep.loss_err_hz = rep.kappa_int_err_hz;

  std::vector<PlateauPoint> plateau;
  std::vector<std::size_t> plateau_rows;  // indices into the ringdown run
  for (std::size_t i = 0; i < run.ringdown.rows.size(); ++i) {
    const RingdownSweepRow& r = run.ringdown.rows[i];
    if (!r.fit_ok) continue;
    plateau.push_back({r.bias_phi0, r.kappa_hz, r.energy_photons});
    plateau_rows.push_back(i);
  }
  const std::size_t imax = plateau_max_row(plateau, cfg.ringdown.plateau_threshold);
  const FitResult& on_fit = run.ringdown.fits[plateau_rows[imax]];
  rep.kappa_max_hz = plateau[imax].kappa_hz - rep.kappa_int_hz;
  rep.kappa_max_err_hz = std::sqrt(on_fit.error("kappa") * on_fit.error("kappa") +
                                   rep.kappa_int_err_hz * rep.kappa_int_err_hz);

  rep.on_off_ratio = on_off_ratio(rep.kappa_max_hz, rep.kappa_int_hz);
  const double rel_max = rep.kappa_max_err_hz / rep.kappa_max_hz;
  const double rel_int = rep.kappa_int_err_hz / rep.kappa_int_hz;
  rep.on_off_ratio_err = rep.on_off_ratio * std::sqrt(rel_max * rel_max + rel_int * rel_int);

  rep.gamma_c_hz = on_fit.value("gamma_c");
  rep.gamma_c_err_hz = on_fit.error("gamma_c");
  rep.switching_time_s = 1.0 / (2.0 * kPi * rep.gamma_c_hz);
  rep.switching_time_err_s =
      rep.gamma_c_err_hz / (2.0 * kPi * rep.gamma_c_hz * rep.gamma_c_hz);

  rep.self_kerr_hz_per_photon = run.kerr.fit.value("kerr");
  rep.self_kerr_err_hz_per_photon = run.kerr.fit.error("kerr");
  return run;
}

/// Five-row plain-text report: `name value std_error` per line, values at
/// 17 significant digits so the file is byte-deterministic.
inline std::string report_to_text(const PerformanceReport& rep) {
  std::string out;
  out += "# performance summary\n";
  out += "# uncertainties: 1-sigma from fit covariance\n";
  auto row = [&out](const char* name, double value, double err) {
    out += name;
    out += ' ';
    out += format_double(value);
    out += ' ';
    out += format_double(err);
    out += '\n';
  };
  row("loss_and_residual_coupling_hz", rep.loss_hz, rep.loss_err_hz);
  row("maximal_coupling_hz", rep.kappa_max_hz, rep.kappa_max_err_hz);
  row("on_off_ratio", rep.on_off_ratio, rep.on_off_ratio_err);
  row("switching_time_s", rep.switching_time_s, rep.switching_time_err_s);
  row("self_kerr_hz_per_photon", rep.self_kerr_hz_per_photon,
      rep.self_kerr_err_hz_per_photon);
  out += "# derived from kappa_int_hz ";
  out += format_double(rep.kappa_int_hz);
  out += " and gamma_c_hz ";
  out += format_double(rep.gamma_c_hz);
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// File emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string join_path(const std::string& dir, const char* name) {
  if (dir.empty()) return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

}  // namespace detail

inline void write_reflection_outputs(const ReflectionSweepResult& result,
                                     const std::string& dir) {
  write_csv(result, detail::join_path(dir, "reflection_sweep.csv"));
  write_csv(result.critical_sweep, detail::join_path(dir, "reflection_sweep_critical.csv"));
}

inline void write_ringdown_outputs(const RingdownSweepResult& result,
                                   const std::string& dir) {
  write_csv(result, detail::join_path(dir, "ringdown_sweep.csv"));
  static const char* kTraceNames[] = {"ringdown_trace_under.csv", "ringdown_trace_mid.csv",
                                      "ringdown_trace_on.csv"};
  for (std::size_t i = 0; i < result.traces.size() && i < 3; ++i)
    write_csv(result.traces[i], detail::join_path(dir, kTraceNames[i]));
}

inline void write_kerr_outputs(const KerrSweepResult& result, const std::string& dir) {
  write_csv(result, detail::join_path(dir, "kerr_sweep.csv"));
}

inline void write_performance_outputs(const PerformanceRun& run, const std::string& dir) {
  write_reflection_outputs(run.reflection, dir);
  write_ringdown_outputs(run.ringdown, dir);
  write_kerr_outputs(run.kerr, dir);
  std::ofstream out(detail::join_path(dir, "table1.txt"), std::ios::binary);
  if (!out) throw ConfigError("cannot open table1.txt for writing");
  out << report_to_text(run.report);
  if (!out) throw ConfigError("write failed for table1.txt");
}

}  // namespace tibsim

#endif  // TIBSIM_EXPERIMENTS_HPP
