#pragma once

#include <numbers>

namespace vsimaser::constants {

// CODATA 2018 exact / recommended values.
inline constexpr double planck_J_s = 6.62607015e-34;
inline constexpr double boltzmann_J_per_K = 1.380649e-23;
// Bohr magneton over Planck constant.
inline constexpr double bohr_MHz_per_mT = 13.9962449361;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double free_electron_g = 2.0023;

}  // namespace vsimaser::constants
