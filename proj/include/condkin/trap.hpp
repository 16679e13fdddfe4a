#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "condkin/constants.hpp"
#include "condkin/errors.hpp"

namespace condkin {

struct TrapConfig {
  double omega_x = 0.0;  // rad/s
  double omega_y = 0.0;
  double omega_z = 0.0;
  double mass = 0.0;               // kg
  double scattering_length = 0.0;  // m

  double omega(int axis) const {
    return axis == 0 ? omega_x : (axis == 1 ? omega_y : omega_z);
  }

  // a >= 0: the ideal-gas limit a = 0 is a legitimate configuration (all
  // collision rates vanish, the distribution is frozen).
  void validate() const {
    if (!(omega_x > 0.0) || !(omega_y > 0.0) || !(omega_z > 0.0))
      throw ConfigError("trap frequencies must be strictly positive");
    if (!(mass > 0.0)) throw ConfigError("atomic mass must be strictly positive");
    if (!(scattering_length >= 0.0))
      throw ConfigError("scattering length must be non-negative");
  }
};

struct ModeIndex {
  int kx = 0;
  int ky = 0;
  int kz = 0;

  bool is_condensate() const { return kx == 0 && ky == 0 && kz == 0; }
  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

// eps_k = hbar (k . omega) + hbar (wx+wy+wz)/2.  Single canonical expression;
// several invariants require recomputed energies to match stored ones
// bit-for-bit, so every caller must go through this function.
inline double single_particle_energy(const TrapConfig& c, const ModeIndex& k) {
  double zero_point = 0.5 * hbar * (c.omega_x + c.omega_y + c.omega_z);
  return hbar * (k.kx * c.omega_x + k.ky * c.omega_y + k.kz * c.omega_z) + zero_point;
}

inline double ground_mode_energy(const TrapConfig& c) {
  return single_particle_energy(c, ModeIndex{0, 0, 0});
}

inline double oscillator_length(const TrapConfig& c, int axis) {
  return std::sqrt(hbar / (c.mass * c.omega(axis)));
}

struct TrapSpectrum {
  TrapConfig config;
  std::vector<ModeIndex> modes;   // non-condensate only
  std::vector<double> energies;   // J, aligned with modes, non-decreasing
  double epsilon0 = 0.0;          // ground-mode energy, J
  double energy_cutoff = 0.0;     // J, measured from epsilon0

  std::size_t size() const { return modes.size(); }
  int max_axis_index(int axis) const {
    int m = 0;
    for (const auto& k : modes)
      m = std::max(m, axis == 0 ? k.kx : (axis == 1 ? k.ky : k.kz));
    return m;
  }
};

// All non-condensate modes with eps_k - eps_0 <= cutoff, energy-sorted.  Ties
// are broken on (kz, ky, kx) ascending, which reproduces the natural
// generation order of a kz-outer / kx-inner scan and keeps tables identical
// across runs and platforms.
inline TrapSpectrum enumerate_modes(const TrapConfig& config, double energy_cutoff,
                                    std::size_t max_modes = 500000) {
  config.validate();
  if (!(energy_cutoff > 0.0)) throw ConfigError("energy cutoff must be positive");

  TrapSpectrum s;
  s.config = config;
  s.epsilon0 = ground_mode_energy(config);
  s.energy_cutoff = energy_cutoff;

  double eps_max = s.epsilon0 + energy_cutoff;
  for (int kz = 0;; ++kz) {
    if (single_particle_energy(config, {0, 0, kz}) > eps_max) break;
    for (int ky = 0;; ++ky) {
      if (single_particle_energy(config, {0, ky, kz}) > eps_max) break;
      for (int kx = 0;; ++kx) {
        ModeIndex k{kx, ky, kz};
        double eps = single_particle_energy(config, k);
        if (eps > eps_max) break;
        if (k.is_condensate()) continue;
        s.modes.push_back(k);
        s.energies.push_back(eps);
        if (s.modes.size() > max_modes)
          throw ResourceLimitError("mode count " + std::to_string(s.modes.size()) +
                                   " exceeds hard limit " + std::to_string(max_modes) +
                                   "; lower the energy cutoff or raise max_modes");
      }
    }
  }

  std::vector<std::size_t> order(s.modes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&s](std::size_t a, std::size_t b) {
    if (s.energies[a] != s.energies[b]) return s.energies[a] < s.energies[b];
    const ModeIndex &ma = s.modes[a], &mb = s.modes[b];
    if (ma.kz != mb.kz) return ma.kz < mb.kz;
    if (ma.ky != mb.ky) return ma.ky < mb.ky;
    return ma.kx < mb.kx;
  });
  std::vector<ModeIndex> modes(s.modes.size());
  std::vector<double> energies(s.modes.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    modes[i] = s.modes[order[i]];
    energies[i] = s.energies[order[i]];
  }
  s.modes = std::move(modes);
  s.energies = std::move(energies);
  return s;
}

// Ideal-gas harmonic-trap critical temperature,
//   k_B Tc = hbar omega_bar (N / zeta(3))^(1/3),
// with omega_bar the geometric mean frequency.  No finite-size shift; the
// convention is stated in every run header.
inline double critical_temperature(const TrapConfig& c, long n_atoms) {
  if (n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
  double omega_bar = std::cbrt(c.omega_x * c.omega_y * c.omega_z);
  return hbar * omega_bar * std::cbrt(static_cast<double>(n_atoms) / zeta3) / k_boltzmann;
}

struct DilutenessReport {
  double a_rho_third = 0.0;  // a rho^(1/3)
  double peak_density = 0.0; // 1/m^3
  bool dilute = false;       // a rho^(1/3) < 0.1
};

// Smallness parameter a rho^(1/3) with rho the peak density of n_atoms in the
// trap ground state: rho = N / (pi^(3/2) a_x a_y a_z).
inline DilutenessReport diluteness_report(const TrapConfig& c, long n_atoms, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  DilutenessReport r;
  double ax = oscillator_length(c, 0);
  double ay = oscillator_length(c, 1);
  double az = oscillator_length(c, 2);
  r.peak_density = static_cast<double>(n_atoms) / (std::pow(pi, 1.5) * ax * ay * az);
  r.a_rho_third = c.scattering_length * std::cbrt(r.peak_density);
  r.dilute = r.a_rho_third < 0.1;
  return r;
}

}  // namespace condkin
