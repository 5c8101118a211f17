// device.hpp — static model of a SQUID-array Wheatstone-bridge coupler (a
// tunable inductor bridge) embedded in a single-mode microwave cavity.
//
// The bridge has four arms of series SQUID arrays; a uniform flux bias is
// shared by all arms while a gradiometric flux bias enters the two arm types
// with opposite sign. Balancing the bridge (zero gradiometric bias) nulls the
// external coupling of the cavity mode to the transmission line; imbalancing
// it turns the coupling on quadratically.
//
// All rates are ordinary frequencies in Hz, fluxes in units of Phi0.
#ifndef TIBSIM_DEVICE_HPP
#define TIBSIM_DEVICE_HPP

#include <cmath>
#include <string>

#include "tibsim/constants.hpp"
#include "tibsim/errors.hpp"

namespace tibsim {

// |cos(pi * flux)| below this guard counts as a flux singularity: the
// Josephson inductance diverges at half-integer flux.
inline constexpr double kFluxCosGuard = 1.0e-3;

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

struct JunctionParams {
  double critical_current_a = 1.0e-6;  // SQUID critical current at zero flux [A]
};

struct SquidArrayArm {
  JunctionParams junction;
  int n_squids = 1;         // SQUIDs in series in this arm
  double flux_sign = +1.0;  // sign with which the gradiometric bias enters
};

struct TibBridge {
  SquidArrayArm arm_a{{}, 1, +1.0};  // gradiometric bias adds
  SquidArrayArm arm_b{{}, 1, -1.0};  // gradiometric bias subtracts
  double coupling_scale_hz = 0.0;    // kappa0 in kappa_ext = kappa0 * beta^2 [Hz]
};

struct CavityParams {
  double bare_frequency_hz = 5.772e9;       // mode frequency at the reference bias [Hz]
  double bare_loss_hz = 450.0;              // empty-cavity internal loss [Hz]
  double chip_loss_hz = 1280.0;             // internal loss added by the coupler chip [Hz]
  double inductive_participation = 1.0e-4;  // p, fraction of mode inductance in the bridge
};

struct BiasPoint {
  double uniform_phi0 = 0.0;       // common flux per SQUID [Phi0]
  double gradiometric_phi0 = 0.0;  // differential flux, +g on arm a, -g on arm b [Phi0]
};

struct DeviceParams {
  CavityParams cavity;
  TibBridge bridge;
  double line_impedance_ohm = 50.0;
  // Extra internal loss switched on above a gradiometric-bias threshold
  // (parasitic channels opened by strong imbalance); disabled when slope = 0.
  double parasitic_loss_slope_hz_per_phi0 = 0.0;
  double parasitic_loss_threshold_phi0 = 0.0;
  // Working point: the uniform bias is set once per experiment; the on bias is
  // the gradiometric bias at which the coupling is calibrated to its maximum.
  double uniform_bias_phi0 = 0.25;
  double on_bias_phi0 = 0.10;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Josephson inductance of one SQUID at the given flux:
/// L_J = Phi0 / (2 pi I_c |cos(pi flux)|). Even and 1-periodic in flux.
inline double squid_inductance(const JunctionParams& junction, double flux_phi0) {
  if (!(junction.critical_current_a > 0.0))
    throw ConfigError("squid_inductance: critical current must be positive");
  const double c = std::abs(std::cos(kPi * flux_phi0));
  if (c < kFluxCosGuard)
    throw FluxSingularity("squid_inductance: flux " + std::to_string(flux_phi0) +
                          " Phi0 is too close to a half-integer");
  return kPhi0 / (2.0 * kPi * junction.critical_current_a * c);
}

/// Total inductance of one arm: n series SQUIDs at flux u + sign * g.
inline double arm_inductance(const SquidArrayArm& arm, const BiasPoint& bias) {
  if (arm.n_squids < 1)
    throw ConfigError("arm_inductance: n_squids must be at least 1");
  const double flux = bias.uniform_phi0 + arm.flux_sign * bias.gradiometric_phi0;
  return static_cast<double>(arm.n_squids) * squid_inductance(arm.junction, flux);
}

/// Bridge imbalance beta = (L_a - L_b) / (L_a + L_b); odd in the gradiometric
/// bias and exactly zero at balance for identical arms.
inline double bridge_imbalance(const TibBridge& bridge, const BiasPoint& bias) {
  const double la = arm_inductance(bridge.arm_a, bias);
  const double lb = arm_inductance(bridge.arm_b, bias);
  return (la - lb) / (la + lb);
}

/// External coupling kappa_ext = kappa0 * beta^2 (quadratic in the imbalance,
/// even in the gradiometric bias, zero at balance).
inline double external_coupling(const DeviceParams& device, const BiasPoint& bias) {
  const double beta = bridge_imbalance(device.bridge, bias);
  return device.bridge.coupling_scale_hz * beta * beta;
}

/// Returns the coupling scale kappa0 that makes the external coupling at
/// on_bias equal target_kappa_hz.
inline double calibrate_coupling_scale(const TibBridge& bridge, const BiasPoint& on_bias,
                                       double target_kappa_hz) {
  if (!(target_kappa_hz > 0.0))
    throw ConfigError("calibrate_coupling_scale: target must be positive");
  const double beta = bridge_imbalance(bridge, on_bias);
  if (beta == 0.0)
    throw BalancedBiasError("calibrate_coupling_scale: bridge is balanced at the on bias");
  return target_kappa_hz / (beta * beta);
}

/// Reference (off) bias: working uniform bias, balanced bridge.
inline BiasPoint reference_bias(const DeviceParams& device) {
  return BiasPoint{device.uniform_bias_phi0, 0.0};
}

/// On bias: working uniform bias, calibrated gradiometric bias.
inline BiasPoint on_bias(const DeviceParams& device) {
  return BiasPoint{device.uniform_bias_phi0, device.on_bias_phi0};
}

/// Mean arm inductance seen by the cavity mode.
inline double effective_inductance(const DeviceParams& device, const BiasPoint& bias) {
  return 0.5 * (arm_inductance(device.bridge.arm_a, bias) +
                arm_inductance(device.bridge.arm_b, bias));
}

/// Bias-dependent mode frequency from inductive frequency pulling:
/// f(bias) = f_bare / sqrt(1 + p (L_eff(bias)/L_eff(ref) - 1)).
/// Exactly bias-independent when p = 0.
inline double cavity_frequency(const DeviceParams& device, const BiasPoint& bias) {
  const double p = device.cavity.inductive_participation;
  if (p == 0.0) return device.cavity.bare_frequency_hz;
  const double ratio = effective_inductance(device, bias) /
                       effective_inductance(device, reference_bias(device));
  return device.cavity.bare_frequency_hz / std::sqrt(1.0 + p * (ratio - 1.0));
}

/// Internal loss: bare cavity loss + chip-added loss + parasitic loss above
/// the gradiometric-bias threshold.
inline double internal_loss(const DeviceParams& device, const BiasPoint& bias) {
  const double excess =
      std::abs(bias.gradiometric_phi0) - device.parasitic_loss_threshold_phi0;
  return device.cavity.bare_loss_hz + device.cavity.chip_loss_hz +
         std::max(0.0, excess) * device.parasitic_loss_slope_hz_per_phi0;
}

/// Total linewidth kappa = kappa_int + kappa_ext.
inline double kappa_total(const DeviceParams& device, const BiasPoint& bias) {
  return internal_loss(device, bias) + external_coupling(device, bias);
}

namespace detail {

/// Josephson energy of one SQUID at the given flux [J].
inline double squid_josephson_energy(const JunctionParams& junction, double flux_phi0) {
  const double c = std::abs(std::cos(kPi * flux_phi0));
  if (c < kFluxCosGuard)
    throw FluxSingularity("squid_josephson_energy: flux too close to a half-integer");
  return kPhi0 * junction.critical_current_a * c / (2.0 * kPi);
}

/// Square of the per-SQUID phase zero-point fluctuation for an arm with
/// n SQUIDs: phi_j^2 = p * (2 pi / Phi0)^2 * hbar * omega * L_eff(ref) / (2 n^2),
/// i.e. phi_j = p * phi_zpf(mode) / n with the mode impedance taken as
/// omega * L_eff(ref) / p at the reference bias.
inline double per_squid_phase_zpf_sq(const DeviceParams& device, int n_squids) {
  const double p = device.cavity.inductive_participation;
  const double omega = 2.0 * kPi * device.cavity.bare_frequency_hz;
  const double l_eff = effective_inductance(device, reference_bias(device));
  const double k = 2.0 * kPi / kPhi0;
  const double n = static_cast<double>(n_squids);
  return p * k * k * kHbar * omega * l_eff / (2.0 * n * n);
}

}  // namespace detail

/// Self-Kerr coefficient [Hz/photon] from first-order perturbation theory on
/// the quartic term of the junction cosine potential. Each junction
/// contributes -E_J phi_j^4 / (2 hbar) to the angular Kerr shift; the four
/// arms carry 2 n_a + 2 n_b junctions. Always negative; scales as 1/n^2 at
/// fixed per-arm inductance and participation.
inline double self_kerr(const DeviceParams& device, const BiasPoint& bias) {
  const TibBridge& br = device.bridge;
  const double fa = bias.uniform_phi0 + br.arm_a.flux_sign * bias.gradiometric_phi0;
  const double fb = bias.uniform_phi0 + br.arm_b.flux_sign * bias.gradiometric_phi0;
  const double phi2_a = detail::per_squid_phase_zpf_sq(device, br.arm_a.n_squids);
  const double phi2_b = detail::per_squid_phase_zpf_sq(device, br.arm_b.n_squids);
  const double kerr_angular =
      -(2.0 * br.arm_a.n_squids * detail::squid_josephson_energy(br.arm_a.junction, fa) *
            phi2_a * phi2_a +
        2.0 * br.arm_b.n_squids * detail::squid_josephson_energy(br.arm_b.junction, fb) *
            phi2_b * phi2_b) /
      (2.0 * kHbar);
  return kerr_angular / (2.0 * kPi);
}

/// Returns the participation p that makes self_kerr at the reference bias
/// equal target_kerr_hz (which must be negative). Exact because the Kerr
/// coefficient is proportional to p^2.
inline double calibrate_participation(const DeviceParams& device, double target_kerr_hz) {
  if (!(target_kerr_hz < 0.0))
    throw ConfigError("calibrate_participation: target Kerr must be negative");
  DeviceParams trial = device;
  trial.cavity.inductive_participation = 1.0e-3;
  const double k_trial = self_kerr(trial, reference_bias(trial));
  return trial.cavity.inductive_participation * std::sqrt(target_kerr_hz / k_trial);
}

}  // namespace tibsim

#endif  // TIBSIM_DEVICE_HPP
