// io_test.cpp — CSV serialization and time-trace round trips.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tibsim/csv.hpp"
#include "tibsim/trace.hpp"

using namespace tibsim;

namespace {

std::string temp_path(const std::string& name) {
  return ::testing::TempDir() + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

TEST(Csv, RoundTripIsBitExact) {
  const std::string path = temp_path("roundtrip.csv");
  const std::vector<std::vector<double>> rows = {
      {1.0, -0.1234567890123456789, 5.772e9},
      {2.0, 1.0 / 3.0, -1.9600000000000001e6},
      {3.0, 1e-300, 0.0},
  };
  write_csv(path, {"a", "b", "c"}, rows);
  const CsvTable table = read_csv(path);
  ASSERT_EQ(table.columns, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(table.rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      EXPECT_EQ(table.rows[i][j], rows[i][j]) << "row " << i << " col " << j;
}

TEST(Csv, DeterministicBytes) {
  const std::string path_a = temp_path("det_a.csv");
  const std::string path_b = temp_path("det_b.csv");
  const std::vector<std::vector<double>> rows = {{0.1, 0.2}, {0.3, 0.4}};
  write_csv(path_a, {"x", "y"}, rows);
  write_csv(path_b, {"x", "y"}, rows);
  EXPECT_EQ(slurp(path_a), slurp(path_b));
  EXPECT_FALSE(slurp(path_a).empty());
}

TEST(Csv, MissingColumnThrows) {
  const std::string path = temp_path("cols.csv");
  write_csv(path, {"x", "y"}, {{1.0, 2.0}});
  const CsvTable table = read_csv(path);
  EXPECT_EQ(table.column_index("y"), 1u);
  EXPECT_THROW(table.column_index("z"), MissingColumn);
}

TEST(Csv, EmptyDataThrows) {
  const std::string path = temp_path("empty.csv");
  {
    std::ofstream out(path, std::ios::binary);
    out << "x,y\n";
  }
  EXPECT_THROW(read_csv(path), EmptyData);
  {
    std::ofstream out(path, std::ios::binary);
  }
  EXPECT_THROW(read_csv(path), EmptyData);
}

TEST(Csv, MalformedNumberThrows) {
  const std::string path = temp_path("bad.csv");
  {
    std::ofstream out(path, std::ios::binary);
    out << "x,y\n1.0,banana\n";
  }
  EXPECT_THROW(read_csv(path), ConfigError);
}

TEST(Csv, MissingFileThrows) {
  EXPECT_THROW(read_csv(temp_path("nope_does_not_exist.csv")), ConfigError);
}

TEST(TimeTrace, RoundTrip) {
  TimeTrace trace;
  trace.t0_s = 1.5e-6;
  trace.dt_s = 1.0e-9;
  for (int i = 0; i < 64; ++i) trace.samples.push_back(std::sin(0.1 * i) * 1e-7);
  const std::string path = temp_path("trace.csv");
  write_csv(trace, path);
  const TimeTrace back = read_time_trace(path);
  EXPECT_EQ(back.t0_s, trace.t0_s);
  ASSERT_EQ(back.samples.size(), trace.samples.size());
  // dt is recovered from differences of absolute times; with t0 != 0 the
  // rounding floor is the ULP of t0, not of dt.
  EXPECT_NEAR(back.dt_s, trace.dt_s, 1e-12 * trace.dt_s);
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    EXPECT_EQ(back.samples[i], trace.samples[i]);
}

TEST(TimeTrace, ComplexRoundTrip) {
  ComplexTimeTrace trace;
  trace.t0_s = 0.0;
  trace.dt_s = 2.0e-9;
  for (int i = 0; i < 32; ++i)
    trace.samples.emplace_back(std::cos(0.2 * i), std::sin(0.2 * i));
  const std::string path = temp_path("ctrace.csv");
  write_csv(trace, path);
  const ComplexTimeTrace back = read_complex_time_trace(path);
  ASSERT_EQ(back.samples.size(), trace.samples.size());
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].real(), trace.samples[i].real());
    EXPECT_EQ(back.samples[i].imag(), trace.samples[i].imag());
  }
}

TEST(TimeTrace, ValidationRejectsBadTraces) {
  TimeTrace trace;
  trace.dt_s = 0.0;
  trace.samples = {1.0, 2.0};
  EXPECT_THROW(validate(trace), TimeBaseMismatch);
  trace.dt_s = 1e-9;
  trace.samples = {1.0};
  EXPECT_THROW(validate(trace), TimeBaseMismatch);
  trace.samples = {1.0, std::nan("")};
  EXPECT_THROW(validate(trace), NonFiniteState);
  trace.samples = {1.0, 2.0};
  EXPECT_NO_THROW(validate(trace));
}

TEST(TimeTrace, NonUniformCsvRejected) {
  const std::string path = temp_path("nonuniform.csv");
  {
    std::ofstream out(path, std::ios::binary);
    out << "time_s,value\n0,1\n1e-9,2\n3e-9,3\n";
  }
  EXPECT_THROW(read_time_trace(path), TimeBaseMismatch);
}

}  // namespace
