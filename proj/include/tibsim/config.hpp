// config.hpp — structured key-value configuration for the device model and
// the three experiment protocols.
//
// File format: INI-style sections of `key = value` lines, `#` comments.
// Units are part of the key names (…_hz, …_phi0, …_s). Grid-valued keys accept
// comma-separated expressions, each either a bare number, `lin:start:stop:n`
// (inclusive linear spacing) or `geo:start:stop:n` (inclusive log spacing);
// the concatenated grid must be strictly increasing.
//
// Two keys are resolved by calibration at load time instead of being stored
// directly: `bridge.calibrate_kappa_max_hz` fixes the coupling scale so the
// external coupling at the on bias hits the target, and
// `cavity.calibrate_self_kerr_hz_per_photon` fixes the inductive
// participation so the self-Kerr at the reference bias hits the target.
#ifndef TIBSIM_CONFIG_HPP
#define TIBSIM_CONFIG_HPP

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tibsim/device.hpp"
#include "tibsim/dynamics.hpp"
#include "tibsim/errors.hpp"

namespace tibsim {

struct ReflectionSweepConfig {
  std::vector<double> bias_grid_phi0;  // gradiometric bias grid [Phi0]
  double probe_photons = 1000.0;       // photon level of the probe power
  int points_per_sweep = 201;          // frequency points per bias
  double span_linewidths = 8.0;        // sweep span in units of kappa
};

struct RingdownSweepConfig {
  std::vector<double> bias_grid_phi0;    // readout bias grid [Phi0]
  double stored_photons = 8000.0;        // photons at the start of readout
  std::vector<double> trace_biases_phi0; // three recorded example traces [Phi0]
  double trace_window_s = 4.0e-6;        // recorded trace length [s]
  int trace_stride = 2;                  // decimation of recorded traces
  double plateau_threshold = 0.95;       // energy-plateau threshold
};

struct KerrSweepConfig {
  double photons_min = 125.0;      // formula photon number at the lowest power
  int n_powers = 21;               // power points (geometric ladder)
  double power_ratio = 1.4142135623730951;  // power step ratio
  // The phase-slope resonance estimator is only accurate to one grid step on
  // a critical-coupling sweep, so the grid is kept dense.
  int points_per_sweep = 4801;     // frequency points per power
  double span_linewidths = 12.0;   // sweep span in units of kappa
};

struct SimulationConfig {
  DeviceParams device;
  AdcModel adc;
  ReflectionSweepConfig reflection;
  RingdownSweepConfig ringdown;
  KerrSweepConfig kerr;
};

// Raw configuration view: "section.key" -> value string.
using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_number(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("config key '" + key + "': empty value");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v))
    throw ConfigError("config key '" + key + "': '" + t + "' is not a finite number");
  return v;
}

inline int parse_integer(const std::string& text, const std::string& key) {
  const double v = parse_number(text, key);
  const double r = std::nearbyint(v);
  if (v != r || std::abs(v) > 1.0e9)
    throw ConfigError("config key '" + key + "': '" + trim(text) + "' is not an integer");
  return static_cast<int>(r);
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

/// Expands one grid expression: a bare number, `lin:start:stop:n`, or
/// `geo:start:stop:n` (endpoints included exactly).
inline void expand_grid_term(const std::string& term, const std::string& key,
                             std::vector<double>* out) {
  const std::string t = trim(term);
  const std::vector<std::string> parts = split(t, ':');
  if (parts.size() == 1) {
    out->push_back(parse_number(parts[0], key));
    return;
  }
  if (parts.size() != 4 || (parts[0] != "lin" && parts[0] != "geo"))
    throw ConfigError("config key '" + key + "': bad grid term '" + t +
                      "' (want a number, lin:start:stop:n, or geo:start:stop:n)");
  const double start = parse_number(parts[1], key);
  const double stop = parse_number(parts[2], key);
  const int n = parse_integer(parts[3], key);
  if (n < 2)
    throw ConfigError("config key '" + key + "': grid term '" + t + "' needs n >= 2");
  if (!(start < stop))
    throw ConfigError("config key '" + key + "': grid term '" + t +
                      "' needs start < stop");
  const bool geometric = parts[0] == "geo";
  if (geometric && !(start > 0.0))
    throw ConfigError("config key '" + key + "': geometric grid needs start > 0");
  for (int i = 0; i < n; ++i) {
    double x;
    if (i == 0) {
      x = start;
    } else if (i == n - 1) {
      x = stop;
    } else if (geometric) {
      const double f = static_cast<double>(i) / (n - 1);
      x = std::exp(std::log(start) + f * (std::log(stop) - std::log(start)));
    } else {
      x = start + static_cast<double>(i) * (stop - start) / (n - 1);
    }
    out->push_back(x);
  }
}

inline std::vector<double> parse_grid(const std::string& text, const std::string& key) {
  std::vector<double> grid;
  for (const std::string& term : split(text, ',')) expand_grid_term(term, key, &grid);
  if (grid.empty()) throw ConfigError("config key '" + key + "': empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("config key '" + key + "': grid is not strictly increasing");
  return grid;
}

/// Typed accessor over a ConfigMap that tracks which keys were consumed.
class ConfigReader {
 public:
  explicit ConfigReader(const ConfigMap& map) : map_(map) {}

  bool has(const std::string& key) const { return map_.count(key) != 0; }

  double number(const std::string& key, double fallback) {
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    used_.insert(key);
    return parse_number(it->second, key);
  }

  int integer(const std::string& key, int fallback) {
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    used_.insert(key);
    return parse_integer(it->second, key);
  }

  std::vector<double> grid(const std::string& key, const char* fallback_expr) {
    auto it = map_.find(key);
    if (it == map_.end()) return parse_grid(fallback_expr, key);
    used_.insert(key);
    return parse_grid(it->second, key);
  }

  void mark_used(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (const auto& [key, value] : map_)
      if (used_.count(key) == 0)
        throw ConfigError("unknown config key '" + key + "'");
  }

 private:
  const ConfigMap& map_;
  std::set<std::string> used_;
};

inline void check_bias_regular(double uniform_phi0, double gradiometric_phi0,
                               const std::string& key) {
  for (double sign : {+1.0, -1.0}) {
    const double flux = uniform_phi0 + sign * gradiometric_phi0;
    if (std::abs(std::cos(kPi * flux)) < kFluxCosGuard)
      throw ConfigError("config key '" + key + "': flux " + std::to_string(flux) +
                        " Phi0 is too close to a half-integer");
  }
}

}  // namespace detail

// Shipped default grids (documented in the default configuration file).
inline constexpr const char* kDefaultReflectionGrid =
    "geo:2.0e-4:2.0e-3:6, lin:2.4e-3:4.0e-3:101";
inline constexpr const char* kDefaultRingdownGrid =
    "geo:2.0e-3:8.0e-2:20, lin:9.0e-2:1.2e-1:7";
inline constexpr const char* kDefaultTraceBiases = "5.0e-3, 2.0e-2, 1.0e-1";

/// Parses configuration text into a raw section.key -> value map.
/// Syntax errors (bad section headers, missing '=', duplicate keys) throw
/// ConfigError with the line number.
inline ConfigMap read_config_text(const std::string& text) {
  ConfigMap map;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header '" + line + "'");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value' in '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value in '" + line + "'");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": key '" + key + "' appears before any [section]");
    const std::string full = section + "." + key;
    if (map.count(full))
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": duplicate key '" + full + "'");
    map[full] = value;
  }
  return map;
}

/// Applies one `section.key=value` override to a raw config map.
inline void set_config_key(ConfigMap& map, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "': expected section.key=value");
  const std::string key = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  if (key.find('.') == std::string::npos || value.empty())
    throw ConfigError("override '" + assignment + "': expected section.key=value");
  map[key] = value;
}

/// Builds a validated, calibrated SimulationConfig from a raw map.
/// Unknown keys, out-of-range values, and conflicting calibration keys throw
/// ConfigError. Missing keys fall back to the shipped defaults.
inline SimulationConfig build_config(const ConfigMap& map) {
  detail::ConfigReader r(map);
  SimulationConfig cfg;
  DeviceParams& dev = cfg.device;

  dev.cavity.bare_frequency_hz = r.number("cavity.bare_frequency_hz", 5.772e9);
  dev.cavity.bare_loss_hz = r.number("cavity.bare_loss_hz", 450.0);
  dev.cavity.chip_loss_hz = r.number("cavity.chip_loss_hz", 1280.0);

  const int n_squids = r.integer("bridge.n_squids", 20);
  const double i_c = r.number("bridge.critical_current_a", 1.0e-6);
  dev.bridge.arm_a = SquidArrayArm{{i_c}, n_squids, +1.0};
  dev.bridge.arm_b = SquidArrayArm{{i_c}, n_squids, -1.0};

  dev.uniform_bias_phi0 = r.number("bias.uniform_phi0", 0.25);
  dev.on_bias_phi0 = r.number("bias.on_gradiometric_phi0", 0.10);

  dev.line_impedance_ohm = r.number("line.impedance_ohm", 50.0);
  dev.parasitic_loss_slope_hz_per_phi0 = r.number("parasitics.loss_slope_hz_per_phi0", 8.0e7);
  dev.parasitic_loss_threshold_phi0 = r.number("parasitics.loss_threshold_phi0", 0.10);
  cfg.adc.corner_frequency_hz = r.number("adc.corner_frequency_hz", 48.0e6);

  if (!(dev.cavity.bare_frequency_hz > 0.0))
    throw ConfigError("cavity.bare_frequency_hz must be positive");
  if (dev.cavity.bare_loss_hz < 0.0 || dev.cavity.chip_loss_hz < 0.0)
    throw ConfigError("cavity losses must be non-negative");
  if (n_squids < 1) throw ConfigError("bridge.n_squids must be at least 1");
  if (!(i_c > 0.0)) throw ConfigError("bridge.critical_current_a must be positive");
  if (!(dev.line_impedance_ohm > 0.0)) throw ConfigError("line.impedance_ohm must be positive");
  if (dev.parasitic_loss_slope_hz_per_phi0 < 0.0 || dev.parasitic_loss_threshold_phi0 < 0.0)
    throw ConfigError("parasitics values must be non-negative");
  if (!(cfg.adc.corner_frequency_hz > 0.0))
    throw ConfigError("adc.corner_frequency_hz must be positive");
  detail::check_bias_regular(dev.uniform_bias_phi0, 0.0, "bias.uniform_phi0");
  detail::check_bias_regular(dev.uniform_bias_phi0, dev.on_bias_phi0,
                             "bias.on_gradiometric_phi0");

  // Coupling scale: explicit value or calibrated to a target kappa_max.
  const bool has_scale = r.has("bridge.coupling_scale_hz");
  const bool has_kappa_target = r.has("bridge.calibrate_kappa_max_hz");
  if (has_scale && has_kappa_target)
    throw ConfigError(
        "bridge.coupling_scale_hz and bridge.calibrate_kappa_max_hz are exclusive");
  if (has_scale) {
    dev.bridge.coupling_scale_hz = r.number("bridge.coupling_scale_hz", 0.0);
    if (dev.bridge.coupling_scale_hz < 0.0)
      throw ConfigError("bridge.coupling_scale_hz must be non-negative");
  } else {
    const double target = r.number("bridge.calibrate_kappa_max_hz", 1.96e6);
    dev.bridge.coupling_scale_hz =
        calibrate_coupling_scale(dev.bridge, on_bias(dev), target);
  }

  // Participation: explicit value or calibrated to a target self-Kerr.
  const bool has_p = r.has("cavity.inductive_participation");
  const bool has_kerr_target = r.has("cavity.calibrate_self_kerr_hz_per_photon");
  if (has_p && has_kerr_target)
    throw ConfigError(
        "cavity.inductive_participation and cavity.calibrate_self_kerr_hz_per_photon "
        "are exclusive");
  if (has_p) {
    dev.cavity.inductive_participation = r.number("cavity.inductive_participation", 0.0);
    if (dev.cavity.inductive_participation < 0.0 ||
        dev.cavity.inductive_participation >= 1.0)
      throw ConfigError("cavity.inductive_participation must be in [0, 1)");
  } else {
    const double target = r.number("cavity.calibrate_self_kerr_hz_per_photon", -0.0205);
    dev.cavity.inductive_participation = calibrate_participation(dev, target);
  }

  ReflectionSweepConfig& refl = cfg.reflection;
  refl.bias_grid_phi0 = r.grid("reflection_sweep.bias_grid_phi0", kDefaultReflectionGrid);
  refl.probe_photons = r.number("reflection_sweep.probe_photons", 1000.0);
  refl.points_per_sweep = r.integer("reflection_sweep.points_per_sweep", 201);
  refl.span_linewidths = r.number("reflection_sweep.span_linewidths", 8.0);
  if (!(refl.probe_photons > 0.0))
    throw ConfigError("reflection_sweep.probe_photons must be positive");
  if (refl.points_per_sweep < 9)
    throw ConfigError("reflection_sweep.points_per_sweep must be at least 9");
  if (!(refl.span_linewidths > 0.0))
    throw ConfigError("reflection_sweep.span_linewidths must be positive");

  RingdownSweepConfig& ring = cfg.ringdown;
  ring.bias_grid_phi0 = r.grid("ringdown_sweep.bias_grid_phi0", kDefaultRingdownGrid);
  ring.stored_photons = r.number("ringdown_sweep.stored_photons", 8000.0);
  ring.trace_biases_phi0 = r.grid("ringdown_sweep.trace_biases_phi0", kDefaultTraceBiases);
  ring.trace_window_s = r.number("ringdown_sweep.trace_window_s", 4.0e-6);
  ring.trace_stride = r.integer("ringdown_sweep.trace_stride", 2);
  ring.plateau_threshold = r.number("ringdown_sweep.plateau_threshold", 0.95);
  if (!(ring.stored_photons > 0.0))
    throw ConfigError("ringdown_sweep.stored_photons must be positive");
  if (ring.trace_biases_phi0.size() != 3)
    throw ConfigError(
        "ringdown_sweep.trace_biases_phi0 must list exactly three biases "
        "(under-coupled, intermediate, on)");
  if (!(ring.trace_window_s > 0.0))
    throw ConfigError("ringdown_sweep.trace_window_s must be positive");
  if (ring.trace_stride < 1)
    throw ConfigError("ringdown_sweep.trace_stride must be at least 1");
  if (!(ring.plateau_threshold > 0.0) || !(ring.plateau_threshold < 1.0))
    throw ConfigError("ringdown_sweep.plateau_threshold must be in (0, 1)");

  KerrSweepConfig& kerr = cfg.kerr;
  kerr.photons_min = r.number("kerr_sweep.photons_min", 125.0);
  kerr.n_powers = r.integer("kerr_sweep.n_powers", 21);
  kerr.power_ratio = r.number("kerr_sweep.power_ratio", 1.4142135623730951);
  kerr.points_per_sweep = r.integer("kerr_sweep.points_per_sweep", 481);
  kerr.span_linewidths = r.number("kerr_sweep.span_linewidths", 12.0);
  if (!(kerr.photons_min > 0.0)) throw ConfigError("kerr_sweep.photons_min must be positive");
  if (kerr.n_powers < 3) throw ConfigError("kerr_sweep.n_powers must be at least 3");
  if (!(kerr.power_ratio > 1.0)) throw ConfigError("kerr_sweep.power_ratio must exceed 1");
  if (kerr.points_per_sweep < 9)
    throw ConfigError("kerr_sweep.points_per_sweep must be at least 9");
  if (!(kerr.span_linewidths > 0.0))
    throw ConfigError("kerr_sweep.span_linewidths must be positive");

  for (double b : refl.bias_grid_phi0)
    detail::check_bias_regular(dev.uniform_bias_phi0, b, "reflection_sweep.bias_grid_phi0");
  for (double b : ring.bias_grid_phi0)
    detail::check_bias_regular(dev.uniform_bias_phi0, b, "ringdown_sweep.bias_grid_phi0");
  for (double b : ring.trace_biases_phi0)
    detail::check_bias_regular(dev.uniform_bias_phi0, b, "ringdown_sweep.trace_biases_phi0");

  r.finish();
  return cfg;
}

inline SimulationConfig parse_config(const std::string& text) {
  return build_config(read_config_text(text));
}

inline SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// The shipped default configuration, byte for byte. Every key is listed
/// explicitly so the file doubles as schema documentation.
inline std::string default_config_text() {
  std::string s;
  s +=
      "# Tunable-coupler cavity simulator: device model and experiment protocols.\n"
      "#\n"
      "# Format: [section] headers, `key = value` lines, `#` comments.\n"
      "# Units are encoded in key names (_hz, _a, _ohm, _phi0, _s).\n"
      "# Grid values accept comma-separated terms, each a number,\n"
      "# lin:start:stop:n (linear, inclusive) or geo:start:stop:n (log-spaced,\n"
      "# inclusive); the concatenated grid must be strictly increasing.\n"
      "\n"
      "[cavity]\n"
      "bare_frequency_hz = 5.772e9\n"
      "bare_loss_hz = 450.0\n"
      "chip_loss_hz = 1280.0\n"
      "# Inductive participation is resolved at load so the self-Kerr at the\n"
      "# reference bias matches this target. Use inductive_participation to set\n"
      "# it directly instead (the two keys are exclusive).\n"
      "calibrate_self_kerr_hz_per_photon = -0.0205\n"
      "\n"
      "[bridge]\n"
      "n_squids = 20\n"
      "critical_current_a = 1.0e-6\n"
      "# Coupling scale kappa0 is resolved at load so the external coupling at\n"
      "# the on bias matches this target. Use coupling_scale_hz to set it\n"
      "# directly instead (the two keys are exclusive).\n"
      "calibrate_kappa_max_hz = 1.96e6\n"
      "\n"
      "[bias]\n"
      "# Uniform flux is set once; the gradiometric flux is the tuning knob.\n"
      "uniform_phi0 = 0.25\n"
      "on_gradiometric_phi0 = 0.10\n"
      "\n"
      "[line]\n"
      "impedance_ohm = 50.0\n"
      "\n"
      "[parasitics]\n"
      "# Extra internal loss above the gradiometric-bias threshold; set the\n"
      "# slope to 0 to disable.\n"
      "loss_slope_hz_per_phi0 = 8.0e7\n"
      "loss_threshold_phi0 = 0.10\n"
      "\n"
      "[adc]\n"
      "corner_frequency_hz = 48.0e6\n"
      "\n"
      "[reflection_sweep]\n"
      "# Bias grid brackets the critical-coupling point; the geometric head\n"
      "# covers the far-under-coupled tail.\n";
  s += "bias_grid_phi0 = ";
  s += kDefaultReflectionGrid;
  s +=
      "\n"
      "probe_photons = 1000.0\n"
      "points_per_sweep = 201\n"
      "span_linewidths = 8.0\n"
      "\n"
      "[ringdown_sweep]\n"
      "# Bias grid spans under- to over-coupled; the linear tail crosses the\n"
      "# parasitic-loss threshold so the energy plateau has a visible edge.\n";
  s += "bias_grid_phi0 = ";
  s += kDefaultRingdownGrid;
  s +=
      "\n"
      "stored_photons = 8000.0\n"
      "# Recorded example traces: under-coupled, intermediate, on.\n";
  s += "trace_biases_phi0 = ";
  s += kDefaultTraceBiases;
  s +=
      "\n"
      "trace_window_s = 4.0e-6\n"
      "trace_stride = 2\n"
      "plateau_threshold = 0.95\n"
      "\n"
      "[kerr_sweep]\n"
      "photons_min = 125.0\n"
      "n_powers = 21\n"
      "power_ratio = 1.4142135623730951\n"
      "# The resonance estimator resolves one grid step on a critical-coupling\n"
      "# sweep; keep the grid dense so the low-power shifts stay clean.\n"
      "points_per_sweep = 4801\n"
      "span_linewidths = 12.0\n";
  return s;
}

inline SimulationConfig default_config() { return parse_config(default_config_text()); }

}  // namespace tibsim

#endif  // TIBSIM_CONFIG_HPP
