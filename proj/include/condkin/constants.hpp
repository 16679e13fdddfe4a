#pragma once

#include <numbers>

namespace condkin {

// SI values (CODATA 2018; k_B exact since the 2019 SI redefinition).
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K
inline constexpr double pi = std::numbers::pi;

// Riemann zeta(3), enters the harmonic-trap critical temperature.
inline constexpr double zeta3 = 1.2020569031595943;

// Default Rb-87 atomic mass in kg (not a trap parameter, overridable in config).
inline constexpr double rb87_mass = 1.44316e-25;

// Format version byte for all binary cache files.
inline constexpr unsigned char cache_format_version = 1;

}  // namespace condkin
