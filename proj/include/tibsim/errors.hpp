// errors.hpp — exception types thrown by the library.
//
// ConfigError marks malformed configuration or input files (the CLI maps it to
// exit code 1); everything else derived from Error marks a numerical or
// physical failure (exit code 2).
#ifndef TIBSIM_ERRORS_HPP
#define TIBSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tibsim {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Configuration / input-format problems.
struct ConfigError : Error { explicit ConfigError(const std::string& m) : Error(m) {} };

// Device model.
struct FluxSingularity : Error { explicit FluxSingularity(const std::string& m) : Error(m) {} };
struct BalancedBiasError : Error { explicit BalancedBiasError(const std::string& m) : Error(m) {} };

// Time-domain dynamics.
struct StepTooLarge : Error { explicit StepTooLarge(const std::string& m) : Error(m) {} };
struct NonFiniteState : Error { explicit NonFiniteState(const std::string& m) : Error(m) {} };
struct TimeBaseMismatch : Error { explicit TimeBaseMismatch(const std::string& m) : Error(m) {} };
struct UnreachableSteadyState : Error { explicit UnreachableSteadyState(const std::string& m) : Error(m) {} };

// Spectroscopy.
struct DegenerateSweep : Error { explicit DegenerateSweep(const std::string& m) : Error(m) {} };

// Fitting and extraction.
struct SingularJacobian : Error { explicit SingularJacobian(const std::string& m) : Error(m) {} };
struct DegenerateRates : Error { explicit DegenerateRates(const std::string& m) : Error(m) {} };
struct InsufficientLinearRegion : Error { explicit InsufficientLinearRegion(const std::string& m) : Error(m) {} };
struct BracketError : Error { explicit BracketError(const std::string& m) : Error(m) {} };
struct NoPlateau : Error { explicit NoPlateau(const std::string& m) : Error(m) {} };

// Tabular data.
struct MissingColumn : Error { explicit MissingColumn(const std::string& m) : Error(m) {} };
struct EmptyData : Error { explicit EmptyData(const std::string& m) : Error(m) {} };

}  // namespace tibsim

#endif  // TIBSIM_ERRORS_HPP
