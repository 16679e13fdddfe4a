#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "condkin/canonical.hpp"
#include "condkin/errors.hpp"
#include "condkin/overlap.hpp"
#include "condkin/parallel.hpp"
#include "condkin/trap.hpp"
#include "condkin/window.hpp"

namespace condkin {

inline double rate_prefactor(const TrapConfig& c) {
  double ha_over_m = hbar * c.scattering_length / c.mass;
  return 16.0 * pi * pi * pi * ha_over_m * ha_over_m;
}

namespace detail {

// Fixed-size chunked summation: plain accumulation inside 1024-term chunks,
// compensated accumulation across chunk partials.  The chunk boundaries are a
// function of the index only, so results are reproducible and accurate enough
// for the 1e-12 cross-path comparisons.
inline constexpr std::size_t sum_chunk = 1024;

}  // namespace detail

// Precomputed triple-sum kernel.  The paper-scenario spectrum has ~4e3 modes
// and ~1e10 window-admissible mode triples, far too many to enumerate per
// value of N_perp.  Occupations and the window depend on mode energies only,
// so the triple sum is regrouped over energy classes:
//
//   lambda_+ = pref * sum_{A<=B,C} w(A,B,C) n_A n_B (n_C + 1)
//   lambda_- = pref * sum_{A<=B,C} w(A,B,C) (n_A+1)(n_B+1) n_C
//
// with w(A,B,C) = delta^(Gamma)(Delta_ABC) * sum of |zeta3d|^2 over all mode
// triples in the class triple (both (A,B) orders folded in).  The class
// weights are assembled once by convolving the per-axis squared overlap
// tensors over quanta within each degenerate-frequency group, which never
// visits individual mode triples for merged axes.  This regrouping is exact
// up to addition order; the direct per-mode path below is kept as the
// reference and the two must agree to 1e-12.
struct RateKernel {
  std::string spectrum_ref;
  EnergyWindow window;
  std::vector<std::uint32_t> class_a;  // a <= b
  std::vector<std::uint32_t> class_b;
  std::vector<std::uint32_t> class_c;
  std::vector<double> weight;          // |zeta|^2 sum x window value, s/m^6

  std::size_t size() const { return weight.size(); }

  // lambda_pm(n_nc) excluding the 16 pi^3 hbar^2 a^2 / m^2 prefactor
  std::pair<double, double> lambda_sums(const CanonicalTable& table, int n_nc) const {
    if (table.spectrum_ref != spectrum_ref)
      throw ConsistencyError("rate kernel and canonical table built on different spectra");
    if (n_nc < 0 || n_nc > table.n_max)
      throw ConsistencyError("occupation row " + std::to_string(n_nc) +
                             " missing from canonical table");
    const double* occ = table.occ_row(n_nc);
    KahanSum plus, minus;
    const std::size_t n = size();
    for (std::size_t chunk = 0; chunk < n; chunk += detail::sum_chunk) {
      std::size_t end = std::min(n, chunk + detail::sum_chunk);
      double p = 0.0, q = 0.0;
      for (std::size_t i = chunk; i < end; ++i) {
        double na = occ[class_a[i]];
        double nb = occ[class_b[i]];
        double nc = occ[class_c[i]];
        double w = weight[i];
        p += w * na * nb * (nc + 1.0);
        q += w * (na + 1.0) * (nb + 1.0) * nc;
      }
      plus.add(p);
      minus.add(q);
    }
    return {plus.value(), minus.value()};
  }
};

namespace detail {

// dense (cap+1)^3 tensor over group quanta
struct GroupTensor {
  int cap = 0;
  std::vector<double> v;

  void init(int c) {
    cap = c;
    v.assign(static_cast<std::size_t>(c + 1) * (c + 1) * (c + 1), 0.0);
  }
  double& at(int a, int b, int c) {
    std::size_t n = cap + 1;
    return v[(static_cast<std::size_t>(a) * n + b) * n + c];
  }
  double at(int a, int b, int c) const {
    std::size_t n = cap + 1;
    return v[(static_cast<std::size_t>(a) * n + b) * n + c];
  }
};

inline GroupTensor squared_axis_tensor(const OverlapTensor1D& t, int cap) {
  GroupTensor g;
  g.init(cap);
  for (int a = 0; a <= cap; ++a)
    for (int b = 0; b <= cap; ++b)
      for (int c = 0; c <= cap; ++c) {
        double z = t.at(a, b, c);
        g.at(a, b, c) = z * z;
      }
  return g;
}

// out[sa][sb][sc] = sum over componentwise decompositions sa=ia+ja etc.
inline GroupTensor convolve(const GroupTensor& A, const GroupTensor& B, int cap,
                            unsigned n_threads) {
  GroupTensor out;
  out.init(cap);
  parallel_for(static_cast<std::size_t>(cap) + 1, n_threads,
               [&](std::size_t sa_begin, std::size_t sa_end) {
                 for (std::size_t sa = sa_begin; sa < sa_end; ++sa) {
                   for (int sb = 0; sb <= cap; ++sb)
                     for (int sc = 0; sc <= cap; ++sc) {
                       double acc = 0.0;
                       int ia_lo = std::max(0, static_cast<int>(sa) - B.cap);
                       int ia_hi = std::min(A.cap, static_cast<int>(sa));
                       for (int ia = ia_lo; ia <= ia_hi; ++ia) {
                         int ja = static_cast<int>(sa) - ia;
                         int ib_lo = std::max(0, sb - B.cap);
                         int ib_hi = std::min(A.cap, sb);
                         for (int ib = ib_lo; ib <= ib_hi; ++ib) {
                           int jb = sb - ib;
                           int ic_lo = std::max(0, sc - B.cap);
                           int ic_hi = std::min(A.cap, sc);
                           for (int ic = ic_lo; ic <= ic_hi; ++ic) {
                             double a = A.at(ia, ib, ic);
                             if (a == 0.0) continue;
                             acc += a * B.at(ja, jb, sc - ic);
                           }
                         }
                       }
                       out.at(static_cast<int>(sa), sb, sc) = acc;
                     }
                 }
               });
  return out;
}

struct KeyWeight {
  std::uint64_t key;
  double w;
};

inline void sort_merge_entries(std::vector<KeyWeight>& raw, RateKernel& kernel,
                               std::size_t n_classes) {
  std::stable_sort(raw.begin(), raw.end(),
                   [](const KeyWeight& a, const KeyWeight& b) { return a.key < b.key; });
  std::size_t n_unique = 0;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i + 1;
    while (j < raw.size() && raw[j].key == raw[i].key) ++j;
    ++n_unique;
    i = j;
  }
  kernel.class_a.reserve(n_unique);
  kernel.class_b.reserve(n_unique);
  kernel.class_c.reserve(n_unique);
  kernel.weight.reserve(n_unique);
  for (std::size_t i = 0; i < raw.size();) {
    double acc = raw[i].w;
    std::size_t j = i + 1;
    while (j < raw.size() && raw[j].key == raw[i].key) acc += raw[j++].w;
    std::uint64_t key = raw[i].key;
    std::uint32_t c = static_cast<std::uint32_t>(key % n_classes);
    key /= n_classes;
    std::uint32_t b = static_cast<std::uint32_t>(key % n_classes);
    std::uint32_t a = static_cast<std::uint32_t>(key / n_classes);
    kernel.class_a.push_back(a);
    kernel.class_b.push_back(b);
    kernel.class_c.push_back(c);
    kernel.weight.push_back(acc);
    i = j;
  }
}

}  // namespace detail

// Assembles the class-triple kernel.  Traps with a repeated frequency (the
// production case omega_x = omega_y) go through the per-group convolution;
// fully anisotropic traps fall back to a direct scan of mode triples, which
// is fine for the moderate spectra where such traps are used here.
inline RateKernel build_rate_kernel(const TrapSpectrum& spectrum, const OverlapSet& overlaps,
                                    const EnergyClasses& classes, const EnergyWindow& window,
                                    unsigned n_threads = 1) {
  window.validate();
  RateKernel kernel;
  kernel.spectrum_ref = spectrum_identifier(spectrum);
  kernel.window = window;

  const std::size_t n_classes = classes.size();
  if (n_classes == 0) return kernel;
  const double support = window.support();
  const double eps0 = spectrum.epsilon0;

  std::vector<detail::KeyWeight> raw;
  auto key_of = [n_classes](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) * n_classes + b) * n_classes + c;
  };

  if (classes.n_groups <= 2) {
    // per-group caps and member axes
    std::array<int, 3> cap{0, 0, 0};
    for (const auto& q : classes.quanta)
      for (int g = 0; g < classes.n_groups; ++g) cap[g] = std::max(cap[g], q[g]);

    std::array<detail::GroupTensor, 2> group;
    for (int g = 0; g < classes.n_groups; ++g) {
      bool first = true;
      for (int ax = 0; ax < 3; ++ax) {
        if (classes.axis_group[ax] != g) continue;
        detail::GroupTensor axt = detail::squared_axis_tensor(
            overlaps.axis[ax], std::min(cap[g], overlaps.axis[ax].max_index));
        if (first) {
          group[g] = std::move(axt);
          first = false;
        } else {
          group[g] = detail::convolve(group[g], axt, cap[g], n_threads);
        }
      }
    }

    // quanta -> class id lookup
    std::vector<std::int32_t> id_map(
        static_cast<std::size_t>(cap[0] + 1) * (classes.n_groups == 2 ? cap[1] + 1 : 1), -1);
    auto slot = [&](int q0, int q1) {
      return static_cast<std::size_t>(q0) * (classes.n_groups == 2 ? cap[1] + 1 : 1) + q1;
    };
    for (std::size_t c = 0; c < n_classes; ++c)
      id_map[slot(classes.quanta[c][0], classes.quanta[c][1])] =
          static_cast<std::int32_t>(c);

    const detail::GroupTensor& g0 = group[0];
    if (classes.n_groups == 1) {
      for (int a = 0; a <= g0.cap; ++a)
        for (int b = 0; b <= g0.cap; ++b)
          for (int c = 0; c <= g0.cap; ++c) {
            double w = g0.at(a, b, c);
            if (w == 0.0) continue;
            std::int32_t ia = id_map[slot(a, 0)];
            std::int32_t ib = id_map[slot(b, 0)];
            std::int32_t ic = id_map[slot(c, 0)];
            if (ia < 0 || ib < 0 || ic < 0) continue;
            double delta = (classes.energy[ia] + classes.energy[ib] -
                            classes.energy[ic] - eps0) / hbar;
            if (std::abs(delta) > support) continue;
            raw.push_back({key_of(ia, ib, ic), w * energy_window_value(window, delta)});
          }
    } else {
      // nonzero cells of each group tensor
      struct Cell {
        int a, b, c;
        double w;
      };
      std::vector<Cell> cells0, cells1;
      const detail::GroupTensor& g1 = group[1];
      for (int a = 0; a <= g0.cap; ++a)
        for (int b = 0; b <= g0.cap; ++b)
          for (int c = 0; c <= g0.cap; ++c)
            if (double w = g0.at(a, b, c); w != 0.0) cells0.push_back({a, b, c, w});
      for (int a = 0; a <= g1.cap; ++a)
        for (int b = 0; b <= g1.cap; ++b)
          for (int c = 0; c <= g1.cap; ++c)
            if (double w = g1.at(a, b, c); w != 0.0) cells1.push_back({a, b, c, w});

      std::vector<std::vector<detail::KeyWeight>> partial(
          std::max<unsigned>(1, n_threads));
      parallel_for_indexed(cells0.size(), n_threads,
                           [&](unsigned worker, std::size_t begin, std::size_t end) {
        auto& out = partial[worker];
        for (std::size_t i = begin; i < end; ++i) {
          const Cell& c0 = cells0[i];
          for (const Cell& c1 : cells1) {
            std::int32_t ia = id_map[slot(c0.a, c1.a)];
            if (ia < 0) continue;
            std::int32_t ib = id_map[slot(c0.b, c1.b)];
            if (ib < 0) continue;
            std::int32_t ic = id_map[slot(c0.c, c1.c)];
            if (ic < 0) continue;
            double delta = (classes.energy[ia] + classes.energy[ib] -
                            classes.energy[ic] - eps0) / hbar;
            if (std::abs(delta) > support) continue;
            out.push_back(
                {key_of(ia, ib, ic), c0.w * c1.w * energy_window_value(window, delta)});
          }
        }
      });
      std::size_t total = 0;
      for (const auto& p : partial) total += p.size();
      raw.reserve(total);
      for (auto& p : partial) {
        raw.insert(raw.end(), p.begin(), p.end());
        p.clear();
        p.shrink_to_fit();
      }
    }
  } else {
    // fully anisotropic: direct scan over mode triples, m restricted to the
    // window by binary search on the energy-sorted mode list
    const std::size_t n_modes = spectrum.size();
    for (std::size_t i = 0; i < n_modes; ++i) {
      for (std::size_t j = i; j < n_modes; ++j) {
        double fold = (i == j) ? 1.0 : 2.0;
        double center = classes.energy[classes.mode_class[i]] +
                        classes.energy[classes.mode_class[j]] - eps0;
        double slack = hbar * support * 1e-12 + std::abs(center) * 1e-12;
        double lo = center - hbar * support - slack;
        double hi = center + hbar * support + slack;
        auto first = std::lower_bound(spectrum.energies.begin(), spectrum.energies.end(), lo);
        for (auto it = first; it != spectrum.energies.end() && *it <= hi; ++it) {
          std::size_t m = static_cast<std::size_t>(it - spectrum.energies.begin());
          std::uint32_t ia = classes.mode_class[i];
          std::uint32_t ib = classes.mode_class[j];
          std::uint32_t ic = classes.mode_class[m];
          double delta =
              (classes.energy[ia] + classes.energy[ib] - classes.energy[ic] - eps0) / hbar;
          if (std::abs(delta) > support) continue;
          double z = overlap_3d(overlaps, spectrum.modes[i], spectrum.modes[j],
                                spectrum.modes[m]);
          if (z == 0.0) continue;
          raw.push_back(
              {key_of(ia, ib, ic), fold * z * z * energy_window_value(window, delta)});
        }
      }
    }
  }

  detail::sort_merge_entries(raw, kernel, n_classes);
  return kernel;
}

// Reference evaluation of Eq.-style triple sums for one value of n_nc: plain
// loop over ordered mode pairs with the same window admissibility as the
// kernel.  O(n_modes^2 x window); for tests and toy spectra.
inline std::pair<double, double> lambda_rates(const TrapSpectrum& spectrum,
                                              const OverlapSet& overlaps,
                                              const CanonicalTable& table,
                                              const EnergyWindow& window, int n_nc) {
  window.validate();
  if (table.spectrum_ref != spectrum_identifier(spectrum))
    throw ConsistencyError("canonical table was built for a different spectrum");
  if (n_nc < 0 || n_nc > table.n_max)
    throw ConsistencyError("occupation row " + std::to_string(n_nc) +
                           " missing from canonical table");

  const EnergyClasses& classes = table.classes;
  const double* occ = table.occ_row(n_nc);
  const double support = window.support();
  const double eps0 = spectrum.epsilon0;
  const std::size_t n_modes = spectrum.size();

  KahanSum plus, minus;
  for (std::size_t i = 0; i < n_modes; ++i) {
    double na = occ[classes.mode_class[i]];
    for (std::size_t j = 0; j < n_modes; ++j) {
      double nb = occ[classes.mode_class[j]];
      double center = classes.energy[classes.mode_class[i]] +
                      classes.energy[classes.mode_class[j]] - eps0;
      double slack = hbar * support * 1e-12 + std::abs(center) * 1e-12;
      auto first = std::lower_bound(spectrum.energies.begin(), spectrum.energies.end(),
                                    center - hbar * support - slack);
      double p = 0.0, q = 0.0;
      for (auto it = first;
           it != spectrum.energies.end() && *it <= center + hbar * support + slack; ++it) {
        std::size_t m = static_cast<std::size_t>(it - spectrum.energies.begin());
        double delta = (classes.energy[classes.mode_class[i]] +
                        classes.energy[classes.mode_class[j]] -
                        classes.energy[classes.mode_class[m]] - eps0) / hbar;
        if (std::abs(delta) > support) continue;
        double z = overlap_3d(overlaps, spectrum.modes[i], spectrum.modes[j],
                              spectrum.modes[m]);
        if (z == 0.0) continue;
        double w = z * z * energy_window_value(window, delta);
        double nm = occ[classes.mode_class[m]];
        p += w * na * nb * (nm + 1.0);
        q += w * (na + 1.0) * (nb + 1.0) * nm;
      }
      plus.add(p);
      minus.add(q);
    }
  }
  return {plus.value(), minus.value()};
}

enum class RateMode { physical, balanced };
enum class RatePath { grouped, direct };

inline std::string to_string(RateMode m) {
  return m == RateMode::physical ? "physical" : "balanced";
}

struct RateBuildOptions {
  EnergyWindow window;
  RateMode mode = RateMode::physical;
  RatePath path = RatePath::grouped;
  int n_atoms = 0;
  unsigned n_threads = 1;
  std::string provenance;
};

// Per-N0 rates of the master equation.  lambda_plus[N0] is
// lambda_+(N - N0, T); xi_plus[N0] = 2 (N0+1) lambda_plus[N0] except
// xi_plus[N] which is never used by the generator and is stored as 0;
// xi_minus[N0] = 2 N0 lambda_minus[N0].
struct RateTable {
  int n_atoms = 0;
  RateMode mode = RateMode::physical;
  std::vector<double> lambda_plus;
  std::vector<double> lambda_minus;
  std::vector<double> xi_plus;
  std::vector<double> xi_minus;
  std::string provenance;
};

inline RateTable assemble_rate_table(const std::vector<double>& lambda_plus_of_m,
                                     const std::vector<double>& lambda_minus_of_m,
                                     int n_atoms, RateMode mode,
                                     const std::string& provenance) {
  RateTable t;
  t.n_atoms = n_atoms;
  t.mode = mode;
  t.provenance = provenance;
  std::size_t n = static_cast<std::size_t>(n_atoms);
  t.lambda_plus.assign(n + 1, 0.0);
  t.lambda_minus.assign(n + 1, 0.0);
  t.xi_plus.assign(n + 1, 0.0);
  t.xi_minus.assign(n + 1, 0.0);
  for (std::size_t n0 = 0; n0 <= n; ++n0) {
    std::size_t m = n - n0;
    double lp = lambda_plus_of_m[m];
    double lm = lambda_minus_of_m[m];
    if (!(lp >= 0.0) || !(lm >= 0.0))
      throw NumericError("negative transition rate at N0 = " + std::to_string(n0));
    t.lambda_plus[n0] = lp;
    t.lambda_minus[n0] = lm;
    t.xi_plus[n0] = n0 == n ? 0.0 : 2.0 * (static_cast<double>(n0) + 1.0) * lp;
    t.xi_minus[n0] = 2.0 * static_cast<double>(n0) * lm;
  }
  return t;
}

// Evaluates lambda_pm(M) for M = 0..N and assembles xi_pm.
//
// Balanced mode realizes the equilibrium limit exactly: lambda_- is kept from
// the physical sums and lambda_+(M) := z(M) lambda_-(M-1), which makes the
// product-form stationary state coincide with the projected Gibbs state
// identically.  (The equal-argument balance lambda_+(M) = z(M) lambda_-(M)
// differs from this by the lambda_-(M-1) ~ lambda_-(M) approximation used in
// the paper-level argument; see detailed_balance_residuals.)
inline RateTable build_rate_table(const TrapSpectrum& spectrum, const OverlapSet& overlaps,
                                  const CanonicalTable& table, const RateBuildOptions& opt,
                                  const RateKernel* kernel = nullptr) {
  if (opt.n_atoms < 1) throw ConfigError("rate table: n_atoms must be >= 1");
  if (table.n_max < opt.n_atoms)
    throw ConsistencyError("canonical table covers M <= " + std::to_string(table.n_max) +
                           " but N = " + std::to_string(opt.n_atoms));

  std::size_t n = static_cast<std::size_t>(opt.n_atoms);
  std::vector<double> lp(n + 1, 0.0), lm(n + 1, 0.0);
  const double pref = rate_prefactor(spectrum.config);

  RateKernel local;
  if (opt.path == RatePath::grouped && kernel == nullptr) {
    local = build_rate_kernel(spectrum, overlaps, table.classes, opt.window, opt.n_threads);
    kernel = &local;
  }

  if (opt.path == RatePath::grouped) {
    parallel_for(n + 1, opt.n_threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t m = begin; m < end; ++m) {
        auto [p, q] = kernel->lambda_sums(table, static_cast<int>(m));
        lp[m] = pref * p;
        lm[m] = pref * q;
      }
    });
  } else {
    parallel_for(n + 1, opt.n_threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t m = begin; m < end; ++m) {
        auto [p, q] = lambda_rates(spectrum, overlaps, table, opt.window,
                                   static_cast<int>(m));
        lp[m] = pref * p;
        lm[m] = pref * q;
      }
    });
  }

  if (opt.mode == RateMode::balanced) {
    std::vector<double> balanced(n + 1, 0.0);
    for (std::size_t m = 1; m <= n; ++m)
      balanced[m] =
          balance_factor(table, spectrum, static_cast<int>(m)) * lm[m - 1];
    lp = std::move(balanced);
  }
  return assemble_rate_table(lp, lm, opt.n_atoms, opt.mode, opt.provenance);
}

enum class BalanceResidualKind {
  equal_argument,   // lambda_+(M) / (z(M) lambda_-(M)) - 1, the Eq.-style condition
  jump_consistent,  // lambda_+(M) / (z(M) lambda_-(M-1)) - 1, exact for the chain
};

struct BalanceResidual {
  int n0 = 0;
  double residual = 0.0;
};

// Diagnostic only; entries whose reference lambda_- vanishes are absent.
inline std::vector<BalanceResidual> detailed_balance_residuals(
    const RateTable& rates, const CanonicalTable& table, const TrapSpectrum& spectrum,
    BalanceResidualKind kind = BalanceResidualKind::equal_argument) {
  std::vector<BalanceResidual> out;
  int n = rates.n_atoms;
  for (int n0 = 0; n0 <= n; ++n0) {
    int m = n - n0;
    if (m < 1) continue;
    double z = balance_factor(table, spectrum, m);
    double lam_plus = rates.lambda_plus[n0];
    double lam_minus_ref;
    if (kind == BalanceResidualKind::equal_argument) {
      lam_minus_ref = rates.lambda_minus[n0];  // lambda_-(M)
    } else {
      if (m - 1 < 1) continue;  // lambda_-(0) = 0, ratio undefined
      lam_minus_ref = rates.lambda_minus[n0 + 1];  // lambda_-(M-1)
    }
    if (!(lam_minus_ref > 0.0)) continue;
    out.push_back({n0, lam_plus / (z * lam_minus_ref) - 1.0});
  }
  return out;
}

}  // namespace condkin
