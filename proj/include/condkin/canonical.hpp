#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "condkin/errors.hpp"
#include "condkin/hash.hpp"
#include "condkin/parallel.hpp"
#include "condkin/trap.hpp"

namespace condkin {

inline double log_sum_exp(const std::vector<double>& terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

// Modes grouped by trap degeneracy.  Axes with bitwise-equal frequencies are
// folded (for omega_x == omega_y the key is kx+ky), so (1,0,0) and (0,1,0)
// land in one class with one occupation number.  Accidental degeneracies
// across distinct frequencies are left unmerged; that only costs a few extra
// classes, never correctness, since occupations depend on the energy alone.
struct EnergyClasses {
  std::array<double, 3> group_omega{};        // distinct frequencies, axis order
  std::array<int, 3> axis_group{};            // axis -> group id
  int n_groups = 0;
  std::vector<std::array<int, 3>> quanta;     // per class, quanta per group
  std::vector<double> energy;                 // per class, absolute (J), ascending
  std::vector<int> degeneracy;                // modes per class
  std::vector<std::uint32_t> mode_class;      // spectrum mode -> class id
  double epsilon0 = 0.0;

  std::size_t size() const { return energy.size(); }

  double class_energy_from_quanta(const std::array<int, 3>& q) const {
    double e = 0.0;
    for (int g = 0; g < n_groups; ++g) e += q[g] * group_omega[g];
    return hbar * e + epsilon0;
  }
};

inline EnergyClasses build_energy_classes(const TrapSpectrum& spectrum) {
  EnergyClasses c;
  c.epsilon0 = spectrum.epsilon0;
  const TrapConfig& cfg = spectrum.config;
  const double omegas[3] = {cfg.omega_x, cfg.omega_y, cfg.omega_z};
  for (int ax = 0; ax < 3; ++ax) {
    int g = -1;
    for (int h = 0; h < c.n_groups; ++h)
      if (c.group_omega[h] == omegas[ax]) g = h;
    if (g < 0) {
      g = c.n_groups++;
      c.group_omega[g] = omegas[ax];
    }
    c.axis_group[ax] = g;
  }

  std::map<std::array<int, 3>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const ModeIndex& k = spectrum.modes[i];
    std::array<int, 3> q{0, 0, 0};
    q[c.axis_group[0]] += k.kx;
    q[c.axis_group[1]] += k.ky;
    q[c.axis_group[2]] += k.kz;
    buckets[q].push_back(i);
  }

  std::vector<std::pair<double, std::array<int, 3>>> order;
  order.reserve(buckets.size());
  for (const auto& [q, members] : buckets)
    order.emplace_back(c.class_energy_from_quanta(q), q);
  std::sort(order.begin(), order.end());

  c.mode_class.assign(spectrum.size(), 0);
  for (const auto& [e, q] : order) {
    std::uint32_t id = static_cast<std::uint32_t>(c.energy.size());
    c.quanta.push_back(q);
    c.energy.push_back(e);
    const auto& members = buckets.at(q);
    c.degeneracy.push_back(static_cast<int>(members.size()));
    for (std::size_t i : members) c.mode_class[i] = id;
  }
  return c;
}

inline std::string spectrum_identifier(const TrapSpectrum& s) {
  Fnv1a h;
  h.add(s.config.omega_x);
  h.add(s.config.omega_y);
  h.add(s.config.omega_z);
  h.add(s.config.mass);
  h.add(s.energy_cutoff);
  h.add(static_cast<std::uint64_t>(s.size()));
  for (double e : s.energies) h.add(e);
  return h.hex();
}

// Exact fixed-number statistics of the ideal non-condensate gas: ln Zperp(M,T)
// for M = 0..n_max by the standard Bose canonical recursion
//   Z_M = (1/M) sum_{n=1..M} S(n beta) Z_{M-n},   S(nb) = sum_{k!=0} e^{-n b eps_k},
// and constrained occupations <N_k>(M,T) = sum_n e^{-n b eps_k} Z_{M-n}/Z_M.
// Everything is kept in log space; Boltzmann weights at T/Tc = 0.4 span
// hundreds of orders of magnitude.
struct CanonicalTable {
  double temperature = 0.0;
  double beta = 0.0;
  std::string spectrum_ref;
  int n_max = 0;
  EnergyClasses classes;
  std::vector<double> log_z;          // M = 0..n_max
  std::vector<double> class_occ;      // [M * n_classes + c]

  double occupation_class(int m_nc, std::size_t cls) const {
    return class_occ[static_cast<std::size_t>(m_nc) * classes.size() + cls];
  }
  // <N_k>(M,T) for spectrum mode index `mode`
  double occupation(int m_nc, std::size_t mode) const {
    return occupation_class(m_nc, classes.mode_class[mode]);
  }
  const double* occ_row(int m_nc) const {
    return class_occ.data() + static_cast<std::size_t>(m_nc) * classes.size();
  }
};

inline CanonicalTable build_canonical_table(const TrapSpectrum& spectrum, double temperature,
                                            int n_max, unsigned n_threads = 1) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (n_max < 0) throw ConfigError("n_max must be >= 0");
  if (spectrum.size() == 0) throw ConfigError("spectrum has no non-condensate modes");

  CanonicalTable t;
  t.temperature = temperature;
  t.beta = 1.0 / (k_boltzmann * temperature);
  t.spectrum_ref = spectrum_identifier(spectrum);
  t.n_max = n_max;
  t.classes = build_energy_classes(spectrum);

  const std::size_t nc = t.classes.size();
  const double beta = t.beta;

  // log S(n beta), n = 1..n_max
  std::vector<double> log_s(static_cast<std::size_t>(n_max) + 1, 0.0);
  {
    std::vector<double> terms(nc);
    for (int n = 1; n <= n_max; ++n) {
      for (std::size_t c = 0; c < nc; ++c)
        terms[c] = std::log(static_cast<double>(t.classes.degeneracy[c])) -
                   n * beta * t.classes.energy[c];
      log_s[n] = log_sum_exp(terms);
      if (!std::isfinite(log_s[n]))
        throw NumericError("canonical recursion: S(n beta) not finite at n = " +
                           std::to_string(n));
    }
  }

  t.log_z.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  {
    std::vector<double> terms;
    for (int m = 1; m <= n_max; ++m) {
      terms.resize(m);
      for (int n = 1; n <= m; ++n) terms[n - 1] = log_s[n] + t.log_z[m - n];
      t.log_z[m] = log_sum_exp(terms) - std::log(static_cast<double>(m));
      if (!std::isfinite(t.log_z[m]))
        throw NumericError("canonical recursion: ln Zperp not finite at M = " +
                           std::to_string(m));
    }
  }

  t.class_occ.assign((static_cast<std::size_t>(n_max) + 1) * nc, 0.0);
  parallel_for(static_cast<std::size_t>(n_max) + 1, n_threads,
               [&](std::size_t m_begin, std::size_t m_end) {
                 for (std::size_t m = m_begin; m < m_end; ++m) {
                   double* row = t.class_occ.data() + m * nc;
                   for (std::size_t c = 0; c < nc; ++c) {
                     double be = beta * t.classes.energy[c];
                     double acc = 0.0;
                     for (std::size_t n = 1; n <= m; ++n)
                       acc += std::exp(-static_cast<double>(n) * be +
                                       t.log_z[m - n] - t.log_z[m]);
                     row[c] = acc;
                   }
                 }
               });
  return t;
}

// Balance factor of the equilibrium condition,
//   z(M,T) = e^{-beta eps0} Zperp(M-1,T) / Zperp(M,T),
// evaluated as a log-space difference.
inline double balance_factor(const CanonicalTable& table, const TrapSpectrum& spectrum,
                             int m_nc) {
  if (m_nc < 1 || m_nc > table.n_max)
    throw std::domain_error("balance_factor: need 1 <= m_nc <= n_max (no particle to move)");
  return std::exp(-table.beta * spectrum.epsilon0 + table.log_z[m_nc - 1] -
                  table.log_z[m_nc]);
}

}  // namespace condkin
