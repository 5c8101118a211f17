#pragma once

// Uniformly sampled time traces. Real traces hold detected voltages [V];
// complex traces hold the rotating-frame cavity field a(t) [sqrt(photons)].

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "tibsim/csv.hpp"
#include "tibsim/errors.hpp"

namespace tibsim {

struct TimeTrace {
  double t0_s = 0.0;  // time of the first sample [s]
  double dt_s = 0.0;  // sample spacing [s]
  std::vector<double> samples;

  double time_at(std::size_t i) const { return t0_s + dt_s * static_cast<double>(i); }
};

struct ComplexTimeTrace {
  double t0_s = 0.0;  // time of the first sample [s]
  double dt_s = 0.0;  // sample spacing [s]
  std::vector<std::complex<double>> samples;

  double time_at(std::size_t i) const { return t0_s + dt_s * static_cast<double>(i); }
};

inline void validate(const TimeTrace& trace) {
  if (!(trace.dt_s > 0.0)) throw TimeBaseMismatch("time trace needs dt > 0");
  if (trace.samples.size() < 2) throw TimeBaseMismatch("time trace needs at least 2 samples");
  for (double v : trace.samples) {
    if (!std::isfinite(v)) throw NonFiniteState("non-finite sample in time trace");
  }
}

inline void validate(const ComplexTimeTrace& trace) {
  if (!(trace.dt_s > 0.0)) throw TimeBaseMismatch("time trace needs dt > 0");
  if (trace.samples.size() < 2) throw TimeBaseMismatch("time trace needs at least 2 samples");
  for (const std::complex<double>& v : trace.samples) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NonFiniteState("non-finite sample in time trace");
  }
}

inline void write_csv(const TimeTrace& trace, const std::string& path) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.samples.size());
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    rows.push_back({trace.time_at(i), trace.samples[i]});
  write_csv(path, {"time_s", "value"}, rows);
}

inline void write_csv(const ComplexTimeTrace& trace, const std::string& path) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.samples.size());
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    rows.push_back({trace.time_at(i), trace.samples[i].real(), trace.samples[i].imag()});
  write_csv(path, {"time_s", "re", "im"}, rows);
}

namespace detail {

// Recovers (t0, dt) from an explicit time column and checks uniform spacing.
inline void time_base_from_column(const CsvTable& table, std::size_t time_col, double* t0_s,
                                  double* dt_s) {
  if (table.rows.size() < 2) throw TimeBaseMismatch("trace csv needs at least 2 rows");
  *t0_s = table.rows[0][time_col];
  *dt_s = table.rows[1][time_col] - *t0_s;
  if (!(*dt_s > 0.0)) throw TimeBaseMismatch("trace csv time column must be increasing");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double expected = *t0_s + *dt_s * static_cast<double>(i);
    const double tol = 1e-9 * std::max(*dt_s, std::abs(expected));
    if (std::abs(table.rows[i][time_col] - expected) > tol)
      throw TimeBaseMismatch("trace csv is not uniformly sampled");
  }
}

}  // namespace detail

inline TimeTrace read_time_trace(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t time_col = table.column_index("time_s");
  const std::size_t value_col = table.column_index("value");
  TimeTrace trace;
  detail::time_base_from_column(table, time_col, &trace.t0_s, &trace.dt_s);
  trace.samples.reserve(table.rows.size());
  for (const auto& row : table.rows) trace.samples.push_back(row[value_col]);
  validate(trace);
  return trace;
}

inline ComplexTimeTrace read_complex_time_trace(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t time_col = table.column_index("time_s");
  const std::size_t re_col = table.column_index("re");
  const std::size_t im_col = table.column_index("im");
  ComplexTimeTrace trace;
  detail::time_base_from_column(table, time_col, &trace.t0_s, &trace.dt_s);
  trace.samples.reserve(table.rows.size());
  for (const auto& row : table.rows) trace.samples.emplace_back(row[re_col], row[im_col]);
  validate(trace);
  return trace;
}

}  // namespace tibsim
