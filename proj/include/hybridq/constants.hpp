#pragma once

#include <numbers>

// CODATA 2018 values, SI.
namespace hybridq::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double c = 299792458.0;                 // m/s
inline constexpr double h = 6.62607015e-34;              // J s
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double epsilon0 = 8.8541878128e-12;     // F/m
inline constexpr double k_B = 1.380649e-23;              // J/K
inline constexpr double amu = 1.66053906660e-27;         // kg
inline constexpr double debye = 1e-21 / c;               // C m
inline constexpr double bohr = 5.29177210903e-11;        // m

// Lab units to SI.
inline constexpr double two_pi_Hz = 2.0 * pi;
inline constexpr double two_pi_kHz = 2.0 * pi * 1e3;
inline constexpr double two_pi_MHz = 2.0 * pi * 1e6;
inline constexpr double two_pi_GHz = 2.0 * pi * 1e9;
inline constexpr double per_cm3 = 1e6;  // cm^-3 -> m^-3
inline constexpr double um = 1e-6;
inline constexpr double cm = 1e-2;

}  // namespace hybridq::constants
