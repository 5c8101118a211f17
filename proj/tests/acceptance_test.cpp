#include "tibsim/experiments.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

// End-to-end acceptance gate. Each test covers one numbered criterion and
// prints a single "[acceptance N] PASS/FAIL" line; the oracles here are
// deliberately independent implementations (closed-form decay, Fock-space
// diagonalization, turning-point bracketing) rather than calls back into the
// code under test.
namespace tibsim {
namespace {

class Acceptance : public ::testing::Test {
 protected:
  void TearDown() override {
    std::printf("[acceptance %d] %s\n", criterion_, HasFailure() ? "FAIL" : "PASS");
    std::fflush(stdout);
  }

  int criterion_ = 0;
};

SimulationConfig config_with(const std::vector<std::string>& overrides) {
  ConfigMap map = read_config_text(default_config_text());
  for (const std::string& o : overrides) set_config_key(map, o);
  return build_config(map);
}

std::string fresh_dir(const std::string& tag) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("tibsim_acceptance_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TIBSIM_CLI_PATH) + " " + args + " > /dev/null";
  return std::system(cmd.c_str());
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.good()) << "cannot open " << path;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// name -> (value, one-sigma error) from the summary report.
std::map<std::string, std::pair<double, double>> parse_report(const std::string& path) {
  std::map<std::string, std::pair<double, double>> rows;
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << "cannot open " << path;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string name;
    double value = 0.0, error = 0.0;
    if (ss >> name >> value >> error) rows[name] = {value, error};
  }
  return rows;
}

double fit_value(const FitResult& fit, const std::string& name) {
  for (std::size_t i = 0; i < fit.names.size(); ++i)
    if (fit.names[i] == name) return fit.values[i];
  ADD_FAILURE() << "fit has no parameter named " << name;
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// 1. Closed loop: the shipped config through the real CLI reproduces the five
//    headline figures of merit.
// ---------------------------------------------------------------------------

TEST_F(Acceptance, Criterion1ReportClosedLoop) {
  criterion_ = 1;
  const std::string dir = fresh_dir("c1");
  const auto start = std::chrono::steady_clock::now();
  const int rc = run_cli(std::string("--config ") + TIBSIM_SOURCE_DIR +
                         "/config/device_default.cfg report table1 --out-dir " + dir);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(rc, 0);
  EXPECT_LT(seconds, 300.0);

  const auto rows = parse_report(dir + "/table1.txt");
  ASSERT_EQ(rows.size(), 5u);
  ASSERT_TRUE(rows.count("loss_and_residual_coupling_hz"));
  ASSERT_TRUE(rows.count("maximal_coupling_hz"));
  ASSERT_TRUE(rows.count("on_off_ratio"));
  ASSERT_TRUE(rows.count("switching_time_s"));
  ASSERT_TRUE(rows.count("self_kerr_hz_per_photon"));
  EXPECT_NEAR(rows.at("loss_and_residual_coupling_hz").first, 1.28e3, 0.01 * 1.28e3);
  EXPECT_NEAR(rows.at("maximal_coupling_hz").first, 1.96e6, 0.02 * 1.96e6);
  EXPECT_NEAR(rows.at("on_off_ratio").first, 1130.0, 0.03 * 1130.0);
  EXPECT_NEAR(rows.at("switching_time_s").first, 3.3e-9, 0.10 * 3.3e-9);
  EXPECT_NEAR(rows.at("self_kerr_hz_per_photon").first, -0.04, 0.10 * 0.04);
  for (const auto& [name, row] : rows)
    EXPECT_GE(row.second, 0.0) << name << " has a negative uncertainty";
}

// ---------------------------------------------------------------------------
// 2. Critical coupling: the deepest-dip bias fits to twice the internal loss.
// ---------------------------------------------------------------------------

TEST_F(Acceptance, Criterion2CriticalCouplingLinewidth) {
  criterion_ = 2;
  const SimulationConfig cfg = default_config();
  const ReflectionSweepResult result = run_reflection_sweep(cfg);
  ASSERT_LT(result.critical_index, result.rows.size());
  const ReflectionSweepRow& crit = result.rows[result.critical_index];
  ASSERT_TRUE(crit.fit_ok);
  const double kappa_int = internal_loss(cfg.device, reference_bias(cfg.device));
  EXPECT_NEAR(kappa_int, 1.73e3, 1e-9);
  EXPECT_NEAR(crit.kappa_hz, 2.0 * kappa_int, 0.005 * 2.0 * kappa_int);
}

// ---------------------------------------------------------------------------
// 3. Ringdown fit fidelity on independently generated noiseless traces.
// ---------------------------------------------------------------------------

TimeTrace synthetic_ringdown(double kappa_hz, double gamma_c_hz, double t0_s, double amplitude,
                             double dt_s, std::size_t count) {
  const double s = kPi * kappa_hz;
  const double g = 2.0 * kPi * gamma_c_hz;
  TimeTrace trace;
  trace.t0_s = 0.0;
  trace.dt_s = dt_s;
  trace.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double tau = static_cast<double>(i) * dt_s - t0_s;
    trace.samples[i] =
        tau > 0.0 ? amplitude * (std::exp(-s * tau) - std::exp(-g * tau)) / (g - s) : 0.0;
  }
  return trace;
}

TEST_F(Acceptance, Criterion3RingdownFitFidelity) {
  criterion_ = 3;
  // Fully switched on: fast decay through the detection corner.
  {
    const double kappa = 1.96e6, gamma_c = 48.0e6;
    const TimeTrace trace = synthetic_ringdown(kappa, gamma_c, 1.37e-7, 3.0e-3, 1.0e-9, 4000);
    const FitResult fit = fit_ringdown(trace);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit_value(fit, "kappa"), kappa, 0.02 * kappa);
    EXPECT_NEAR(fit_value(fit, "gamma_c"), gamma_c, 0.10 * gamma_c);
  }
  // Under-coupled step: the decay is slow, the corner shows up as the rise.
  {
    const double kappa = 5.0e4, gamma_c = 48.0e6;
    const TimeTrace trace = synthetic_ringdown(kappa, gamma_c, 2.1e-7, 1.1e-3, 1.0e-9, 60000);
    const FitResult fit = fit_ringdown(trace);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit_value(fit, "kappa"), kappa, 0.02 * kappa);
    EXPECT_NEAR(fit_value(fit, "gamma_c"), gamma_c, 0.10 * gamma_c);
  }
}

// ---------------------------------------------------------------------------
// 4. Energy conservation: integrated outflow, branching ratio, and the 1/2
//    split at critical coupling.
// ---------------------------------------------------------------------------

TEST_F(Acceptance, Criterion4EnergyConservation) {
  criterion_ = 4;
  const SimulationConfig cfg = default_config();
  const DeviceParams& dev = cfg.device;

  // (a) Free decay: stored photons = integrated kappa-weighted outflow plus
  //     the remainder, at every tested bias.
  const double n0 = 8000.0;
  for (double g : {2.0e-3, 3.07e-3, 8.0e-3, 2.0e-2, 5.0e-2, 1.0e-1, 1.2e-1}) {
    const BiasPoint bias{dev.uniform_bias_phi0, g};
    const double kappa = kappa_total(dev, bias);
    const double dt = 1.0e-3 / kappa;
    const long steps = 1500;
    PulseSequence seq;
    seq.frame_frequency_hz = cavity_frequency(dev, bias);
    seq.segments = {DriveSegment{static_cast<double>(steps) * dt, 0.0, 0.0, bias}};
    const ComplexTimeTrace trace =
        integrate_cavity(dev, seq, dt, {std::sqrt(n0), 0.0});
    ASSERT_EQ(trace.samples.size(), static_cast<std::size_t>(steps) + 1);
    double outflow = 0.0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
      const double w = (i == 0 || i + 1 == trace.samples.size()) ? 0.5 : 1.0;
      outflow += w * 2.0 * kPi * kappa * std::norm(trace.samples[i]) * dt;
    }
    const double recovered = outflow + std::norm(trace.samples.back());
    EXPECT_NEAR(recovered / n0, 1.0, 1.0e-4) << "bias " << g;
  }

  // (b) Measured-energy branching matches kappa_ext/kappa across the full
  //     ringdown sweep once the parasitic loss channel is switched off.
  const SimulationConfig lossless = config_with({"parasitics.loss_slope_hz_per_phi0 = 0"});
  const RingdownSweepResult sweep = run_ringdown_sweep(lossless);
  ASSERT_EQ(sweep.rows.size(), lossless.ringdown.bias_grid_phi0.size());
  for (const RingdownSweepRow& row : sweep.rows) {
    ASSERT_TRUE(row.fit_ok) << "bias " << row.bias_phi0;
    const BiasPoint bias{lossless.device.uniform_bias_phi0, row.bias_phi0};
    const double branching =
        external_coupling(lossless.device, bias) / kappa_total(lossless.device, bias);
    EXPECT_NEAR(row.energy_photons / sweep.stored_photons, branching, 0.01 * branching)
        << "bias " << row.bias_phi0;
  }

  // (c) At critical coupling exactly half of the stored energy reaches the line.
  const BiasPoint critical = critical_coupling_search(dev);
  RingdownConfig protocol;
  protocol.stored_photons = n0;
  const RingdownResult run = ringdown_protocol(dev, critical, protocol);
  const double fraction = measured_energy(run.voltage, dev) / n0;
  EXPECT_NEAR(fraction, 0.5, 0.005);
}

// ---------------------------------------------------------------------------
// 5. Integrator order against the closed-form linear decay.
// ---------------------------------------------------------------------------

TEST_F(Acceptance, Criterion5IntegratorFourthOrder) {
  criterion_ = 5;
  DeviceParams dev = default_config().device;
  dev.cavity.inductive_participation = 0.0;  // no Kerr term: exactly linear dynamics
  const BiasPoint bias = on_bias(dev);
  const double kappa = kappa_total(dev, bias);
  const double detuning = 2.0e6;
  const double duration = 1.0e-6;
  const std::complex<double> a0{2.0, -1.5};
  const std::complex<double> exact =
      a0 * std::exp(std::complex<double>(-kPi * kappa, 2.0 * kPi * detuning) * duration);

  PulseSequence seq;
  seq.frame_frequency_hz = cavity_frequency(dev, bias) - detuning;
  std::vector<double> errors;
  for (double dt : {8.0e-9, 4.0e-9, 2.0e-9, 1.0e-9}) {
    seq.segments = {DriveSegment{duration, 0.0, 0.0, bias}};
    const ComplexTimeTrace trace = integrate_cavity(dev, seq, dt, a0);
    errors.push_back(std::abs(trace.samples.back() - exact));
  }
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    ASSERT_GT(errors[k + 1], 0.0);
    const double order = std::log2(errors[k] / errors[k + 1]);
    EXPECT_NEAR(order, 4.0, 0.2) << "halving step " << k;
  }
}

// ---------------------------------------------------------------------------
// 6. Nonlinearity oracles: Fock-space diagonalization for the self-Kerr and
//    turning-point bracketing for the steady-state cubic.
// ---------------------------------------------------------------------------

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) out[i * n + j] += aik * b[k * n + j];
    }
  return out;
}

std::vector<double> jacobi_eigenvalues(std::vector<double> m, int n) {
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(m[p * n + q]));
    if (off < 1.0e-9) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (std::abs(apq) < 1.0e-12) continue;
        const double theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = m[k * n + p], akq = m[k * n + q];
          m[k * n + p] = c * akp - s * akq;
          m[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = m[p * n + k], aqk = m[q * n + k];
          m[p * n + k] = c * apk - s * aqk;
          m[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> evals(n);
  for (int i = 0; i < n; ++i) evals[i] = m[i * n + i];
  std::sort(evals.begin(), evals.end());
  return evals;
}

// Anharmonicity from diagonalizing the quartic-truncated junction Hamiltonian
// H/h = f0 n + c4 (a + a')^4 in a truncated Fock space.
double fock_kerr_oracle(const DeviceParams& dev, const BiasPoint& bias, int levels) {
  const TibBridge& br = dev.bridge;
  const double fa = bias.uniform_phi0 + br.arm_a.flux_sign * bias.gradiometric_phi0;
  const double fb = bias.uniform_phi0 + br.arm_b.flux_sign * bias.gradiometric_phi0;
  const double phi2_a = detail::per_squid_phase_zpf_sq(dev, br.arm_a.n_squids);
  const double phi2_b = detail::per_squid_phase_zpf_sq(dev, br.arm_b.n_squids);
  const double c4_hz =
      -(2.0 * br.arm_a.n_squids * detail::squid_josephson_energy(br.arm_a.junction, fa) * phi2_a *
            phi2_a +
        2.0 * br.arm_b.n_squids * detail::squid_josephson_energy(br.arm_b.junction, fb) * phi2_b *
            phi2_b) /
      (24.0 * kPlanck);

  const int n = levels;
  std::vector<double> x(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i + 1 < n; ++i)
    x[i * n + (i + 1)] = x[(i + 1) * n + i] = std::sqrt(static_cast<double>(i + 1));
  const std::vector<double> x2 = matmul(x, x, n);
  std::vector<double> h = matmul(x2, x2, n);
  for (double& v : h) v *= c4_hz;
  for (int i = 0; i < n; ++i) h[i * n + i] += dev.cavity.bare_frequency_hz * i;

  const std::vector<double> evals = jacobi_eigenvalues(std::move(h), n);
  return evals[2] - 2.0 * evals[1] + evals[0];
}

TEST_F(Acceptance, Criterion6KerrAndDuffingOracles) {
  criterion_ = 6;
  const DeviceParams base = default_config().device;

  // (a) Perturbative self-Kerr against the diagonalized spectrum over a scan
  //     of SQUID count, critical current, participation, and flux bias.
  struct ScanPoint {
    int n_squids;
    double critical_current_a;
    double participation;
    double uniform_phi0;
    double gradiometric_phi0;
  };
  const std::vector<ScanPoint> scan = {
      {20, 1.0e-6, 9.2974312570707552e-05, 0.25, 0.0},
      {20, 1.0e-6, 9.2974312570707552e-05, 0.25, 0.10},
      {20, 1.0e-6, 2.0e-4, 0.25, 0.05},
      {12, 1.0e-6, 9.2974312570707552e-05, 0.25, 0.0},
      {8, 5.0e-7, 5.0e-5, 0.20, 0.0},
      {40, 2.0e-6, 2.0e-4, 0.25, 0.0},
      {20, 2.0e-6, 1.5e-4, 0.30, 0.08},
      {16, 7.0e-7, 8.0e-5, 0.35, 0.0},
      {24, 1.2e-6, 1.2e-4, 0.15, 0.12},
      {32, 8.0e-7, 1.0e-4, 0.25, 0.20},
  };
  ASSERT_EQ(scan.size(), 10u);
  for (const ScanPoint& point : scan) {
    DeviceParams dev = base;
    dev.bridge.arm_a.n_squids = dev.bridge.arm_b.n_squids = point.n_squids;
    dev.bridge.arm_a.junction.critical_current_a = point.critical_current_a;
    dev.bridge.arm_b.junction.critical_current_a = point.critical_current_a;
    dev.cavity.inductive_participation = point.participation;
    const BiasPoint bias{point.uniform_phi0, point.gradiometric_phi0};
    const double oracle = fock_kerr_oracle(dev, bias, 32);
    ASSERT_LT(oracle, 0.0);
    ASSERT_GT(std::abs(oracle), 2.0e-3);  // stays above diagonalization noise
    EXPECT_NEAR(self_kerr(dev, bias), oracle, 0.05 * std::abs(oracle))
        << "n=" << point.n_squids << " Ic=" << point.critical_current_a
        << " p=" << point.participation << " bias=(" << point.uniform_phi0 << ","
        << point.gradiometric_phi0 << ")";
  }

  // (b) Steady-state cubic roots against bracketed bisection between the
  //     turning points of the response curve.
  std::mt19937 rng(20260823u);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int accepted = 0, attempts = 0, monostable = 0, bistable = 0;
  while (accepted < 100 && attempts < 2000) {
    ++attempts;
    const double kappa_int = std::pow(10.0, 3.0 + 3.0 * u01(rng));
    const double kappa_ext = std::pow(10.0, 3.0 + 3.6 * u01(rng));
    const double kappa = kappa_int + kappa_ext;
    const double kerr = -std::pow(10.0, -2.0 + 2.5 * u01(rng));
    const double delta = (-10.0 + 15.0 * u01(rng)) * kappa;
    const double n_target = std::pow(10.0, 7.0 * u01(rng));
    const double c = detail::duffing_lhs(n_target, delta, kappa, kerr);
    const double flux = 2.0 * kPi * c / kappa_ext;

    // Bracket every root between 0, the turning points, and the upper bound
    // n <= 4c/kappa^2 implied by lhs(n) >= n kappa^2/4.
    std::vector<double> knots = {0.0, 4.0 * c / (kappa * kappa) * (1.0 + 1.0e-9)};
    const double qa = 3.0 * kerr * kerr;
    const double qb = -4.0 * delta * kerr;
    const double qc = delta * delta + 0.25 * kappa * kappa;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      const double qq = -0.5 * (qb + std::copysign(sq, qb));
      for (double r : {qq / qa, qc / qq})
        if (r > 0.0 && r < knots[1]) knots.push_back(r);
    }
    std::sort(knots.begin(), knots.end());

    auto lhs_minus_c = [&](double n) { return detail::duffing_lhs(n, delta, kappa, kerr) - c; };
    bool degenerate = false;
    for (std::size_t i = 1; i + 1 < knots.size(); ++i)
      if (std::abs(lhs_minus_c(knots[i])) < 1.0e-7 * c) degenerate = true;  // near-tangent fold
    if (degenerate) continue;

    std::vector<double> brute;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      double lo = knots[i], hi = knots[i + 1];
      double flo = lhs_minus_c(lo);
      if (flo == 0.0) continue;  // counted at the previous interval's boundary
      if (flo * lhs_minus_c(hi) > 0.0) continue;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (flo * lhs_minus_c(mid) > 0.0 ? lo : hi) = mid;
        flo = lhs_minus_c(lo);
      }
      brute.push_back(0.5 * (lo + hi));
    }
    bool spaced = true;
    for (std::size_t i = 1; i < brute.size(); ++i)
      if (brute[i] - brute[i - 1] < 1.0e-7 * brute[i]) spaced = false;
    if (!spaced) continue;  // closer than the solver's fold-degeneracy merge

    const DuffingSolution sol =
        duffing_steady_states(delta, kappa_int, kappa_ext, kerr, flux);
    ASSERT_EQ(sol.photon_numbers.size(), brute.size())
        << "delta=" << delta << " kappa=" << kappa << " kerr=" << kerr << " c=" << c;
    for (std::size_t i = 0; i < brute.size(); ++i)
      EXPECT_NEAR(sol.photon_numbers[i], brute[i], 1.0e-8 * std::max(1.0, brute[i]));
    (brute.size() == 3 ? bistable : monostable)++;
    ++accepted;
  }
  ASSERT_EQ(accepted, 100);
  EXPECT_GE(monostable, 10);
  EXPECT_GE(bistable, 10);
}

// ---------------------------------------------------------------------------
// 7. Symmetry properties, each sampled at >= 100 points.
// ---------------------------------------------------------------------------

TEST_F(Acceptance, Criterion7SymmetrySuite) {
  criterion_ = 7;
  const DeviceParams dev = default_config().device;
  std::mt19937 rng(7001u);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // External coupling is even in the gradiometric flux and vanishes at balance.
  int points = 0;
  while (points < 120) {
    const double u = 0.05 + 0.35 * u01(rng);
    const double g = 0.30 * u01(rng);
    if (std::abs(std::cos(kPi * (u + g))) < 0.05 ||
        std::abs(std::cos(kPi * (u - g))) < 0.05)
      continue;
    const double plus = external_coupling(dev, {u, g});
    const double minus = external_coupling(dev, {u, -g});
    EXPECT_DOUBLE_EQ(plus, minus) << "u=" << u << " g=" << g;
    EXPECT_GE(plus, 0.0);
    EXPECT_EQ(external_coupling(dev, {u, 0.0}), 0.0) << "u=" << u;
    ++points;
  }

  // SQUID inductance is even in flux and 1-periodic.
  const JunctionParams junction = dev.bridge.arm_a.junction;
  points = 0;
  while (points < 120) {
    const double f = -2.5 + 5.0 * u01(rng);
    if (std::abs(std::cos(kPi * f)) < 0.05 || std::abs(std::cos(kPi * (f + 1.0))) < 0.05)
      continue;
    const double here = squid_inductance(junction, f);
    EXPECT_NEAR(squid_inductance(junction, -f), here, 1.0e-12 * here) << "f=" << f;
    EXPECT_NEAR(squid_inductance(junction, f + 1.0), here, 1.0e-12 * here) << "f=" << f;
    ++points;
  }

  // The phase-slope resonance estimate is invariant under a global phase
  // rotation of the reflection data.
  const BiasPoint critical = critical_coupling_search(dev);
  const std::vector<BiasPoint> biases = {
      {dev.uniform_bias_phi0, 2.0e-3}, critical, {dev.uniform_bias_phi0, 8.0e-2}};
  int rotations = 0;
  for (const BiasPoint& bias : biases) {
    const double f0 = cavity_frequency(dev, bias);
    const double kappa = kappa_total(dev, bias);
    const std::vector<double> freqs = detail::linspace(f0 - 3.0 * kappa, f0 + 3.0 * kappa, 1501);
    const FrequencySweep sweep = sweep_reflection_linear(dev, bias, freqs);
    const double reference = resonance_by_phase_slope(sweep);
    for (int k = 0; k < 40; ++k) {
      const double phase = 2.0 * kPi * (u01(rng) - 0.5);
      FrequencySweep rotated = sweep;
      const std::complex<double> factor = std::polar(1.0, phase);
      for (std::complex<double>& z : rotated.gamma) z *= factor;
      EXPECT_NEAR(resonance_by_phase_slope(rotated), reference, 1.0e-2) << "phase " << phase;
      ++rotations;
    }
  }
  EXPECT_GE(rotations, 100);
}

// ---------------------------------------------------------------------------
// 8. Determinism: two full report runs are byte-identical.
// ---------------------------------------------------------------------------

TEST_F(Acceptance, Criterion8DeterministicOutputs) {
  criterion_ = 8;
  const std::string dir_a = fresh_dir("c8a");
  const std::string dir_b = fresh_dir("c8b");
  const std::string config_arg =
      std::string("--config ") + TIBSIM_SOURCE_DIR + "/config/device_default.cfg";
  ASSERT_EQ(run_cli(config_arg + " report table1 --out-dir " + dir_a), 0);
  ASSERT_EQ(run_cli(config_arg + " report table1 --out-dir " + dir_b), 0);

  std::vector<std::string> names_a;
  for (const auto& entry : std::filesystem::directory_iterator(dir_a))
    names_a.push_back(entry.path().filename().string());
  std::sort(names_a.begin(), names_a.end());
  const std::vector<std::string> expected = {
      "kerr_sweep.csv",          "reflection_sweep.csv", "reflection_sweep_critical.csv",
      "ringdown_sweep.csv",      "ringdown_trace_mid.csv", "ringdown_trace_on.csv",
      "ringdown_trace_under.csv", "table1.txt"};
  EXPECT_EQ(names_a, expected);
  for (const std::string& name : expected) {
    const std::string bytes_a = read_bytes(dir_a + "/" + name);
    const std::string bytes_b = read_bytes(dir_b + "/" + name);
    EXPECT_FALSE(bytes_a.empty()) << name;
    EXPECT_TRUE(bytes_a == bytes_b) << name << " differs between identical runs";
  }
}

}  // namespace
}  // namespace tibsim
