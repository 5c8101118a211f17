// constants.hpp — physical constants shared across the library.
//
// Unit conventions used everywhere in tibsim:
//   * rates and frequencies are ordinary frequencies in Hz (angular rate / 2pi),
//   * fluxes are in units of the superconducting flux quantum Phi0 = h/2e,
//   * inductances in henry, powers in watt, voltages in volt, times in seconds.
#ifndef TIBSIM_CONSTANTS_HPP
#define TIBSIM_CONSTANTS_HPP

namespace tibsim {

inline constexpr double kPi = 3.14159265358979323846;

// Exact SI defining constants (2019 redefinition).
inline constexpr double kPlanck = 6.62607015e-34;          // J s
inline constexpr double kElectronCharge = 1.602176634e-19; // C

inline constexpr double kHbar = kPlanck / (2.0 * kPi);                // J s
inline constexpr double kPhi0 = kPlanck / (2.0 * kElectronCharge);    // Wb, h/2e

}  // namespace tibsim

#endif  // TIBSIM_CONSTANTS_HPP
