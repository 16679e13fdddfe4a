#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "condkin/canonical.hpp"
#include "condkin/constants.hpp"
#include "condkin/errors.hpp"
#include "condkin/master.hpp"
#include "condkin/overlap.hpp"
#include "condkin/rates.hpp"
#include "condkin/trap.hpp"

namespace condkin {

// 17 significant digits: round-trip exact for doubles.
inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: identical bytes on all platforms
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  return out;
}

inline void write_spectrum_csv(const std::string& path, const TrapSpectrum& s) {
  auto out = open_output(path);
  out << "kx,ky,kz,energy_j\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << s.modes[i].kx << ',' << s.modes[i].ky << ',' << s.modes[i].kz << ','
        << csv_double(s.energies[i]) << '\n';
}

inline void write_canonical_csv(const std::string& path, const CanonicalTable& t,
                                const TrapSpectrum& spectrum, bool include_occupations) {
  auto out = open_output(path);
  out << "m,ln_z_perp";
  if (include_occupations)
    for (std::size_t k = 0; k < spectrum.size(); ++k)
      out << ",occ_" << spectrum.modes[k].kx << '_' << spectrum.modes[k].ky << '_'
          << spectrum.modes[k].kz;
  out << '\n';
  for (int m = 0; m <= t.n_max; ++m) {
    out << m << ',' << csv_double(t.log_z[m]);
    if (include_occupations)
      for (std::size_t k = 0; k < spectrum.size(); ++k)
        out << ',' << csv_double(t.occupation(m, k));
    out << '\n';
  }
}

inline void write_rates_csv(const std::string& path, const RateTable& r) {
  auto out = open_output(path);
  out << "n0,lambda_plus,lambda_minus,xi_plus,xi_minus\n";
  for (std::size_t n0 = 0; n0 < r.xi_plus.size(); ++n0)
    out << n0 << ',' << csv_double(r.lambda_plus[n0]) << ',' << csv_double(r.lambda_minus[n0])
        << ',' << csv_double(r.xi_plus[n0]) << ',' << csv_double(r.xi_minus[n0]) << '\n';
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_output(path);
  out << "time_s,mean_N0,sigma0,var_N0,normalized_width\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const ObservableRow& r = traj.rows[i];
    out << csv_double(traj.times[i]) << ',' << csv_double(r.mean_n0) << ','
        << csv_double(r.sigma0) << ',' << csv_double(r.var_n0) << ','
        << csv_double(r.normalized_width) << '\n';
  }
}

inline void write_distributions_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_output(path);
  out << "time_s";
  if (!traj.states.empty())
    for (std::size_t n0 = 0; n0 < traj.states.front().p.size(); ++n0) out << ",p_" << n0;
  out << '\n';
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << csv_double(traj.times[i]);
    for (double v : traj.states[i].p) out << ',' << csv_double(v);
    out << '\n';
  }
}

inline void write_steady_csv(const std::string& path, const DistributionState& product,
                             const DistributionState& gibbs,
                             const DistributionState& asymptotic) {
  auto out = open_output(path);
  out << "n0,p_product,p_gibbs,p_asymptotic\n";
  for (std::size_t n0 = 0; n0 < product.p.size(); ++n0)
    out << n0 << ',' << csv_double(product.p[n0]) << ',' << csv_double(gibbs.p[n0]) << ','
        << csv_double(asymptotic.p[n0]) << '\n';
}

// ---------------------------------------------------------------------------
// Binary caches.  Local, platform-specific files; an explicit format version
// byte plus the full key is stored, and any mismatch triggers a rebuild.

namespace detail {

inline void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
inline bool get_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  return static_cast<bool>(in);
}
inline void put_u64(std::ofstream& out, std::uint64_t v) { put_bytes(out, &v, sizeof v); }
inline void put_f64(std::ofstream& out, double v) { put_bytes(out, &v, sizeof v); }
inline bool get_u64(std::ifstream& in, std::uint64_t& v) { return get_bytes(in, &v, sizeof v); }
inline bool get_f64(std::ifstream& in, double& v) { return get_bytes(in, &v, sizeof v); }

inline void put_vec(std::ofstream& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  put_bytes(out, v.data(), v.size() * sizeof(double));
}
inline bool get_vec(std::ifstream& in, std::vector<double>& v) {
  std::uint64_t n = 0;
  if (!get_u64(in, n)) return false;
  if (n > (1ull << 33)) return false;
  v.resize(n);
  return get_bytes(in, v.data(), n * sizeof(double));
}
inline void put_str(std::ofstream& out, const std::string& s) {
  put_u64(out, s.size());
  put_bytes(out, s.data(), s.size());
}
inline bool get_str(std::ifstream& in, std::string& s) {
  std::uint64_t n = 0;
  if (!get_u64(in, n)) return false;
  if (n > (1ull << 20)) return false;
  s.resize(n);
  return n == 0 || get_bytes(in, s.data(), n);
}

}  // namespace detail

// Overlap tensors, keyed by (omega, mass, max_index) per axis.
inline void save_overlap_cache(const std::string& path, const TrapConfig& trap,
                               const OverlapSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write cache file '" + path + "'");
  out.write("CKOV", 4);
  out.put(static_cast<char>(cache_format_version));
  for (int ax = 0; ax < 3; ++ax) {
    detail::put_f64(out, trap.omega(ax));
    detail::put_f64(out, trap.mass);
    detail::put_u64(out, static_cast<std::uint64_t>(set.axis[ax].max_index));
    detail::put_f64(out, set.axis[ax].oscillator_length);
    detail::put_vec(out, set.axis[ax].values);
  }
}

inline bool load_overlap_cache(const std::string& path, const TrapConfig& trap,
                               const std::array<int, 3>& max_index, OverlapSet& set) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[4];
  if (!detail::get_bytes(in, magic, 4) || std::memcmp(magic, "CKOV", 4) != 0) return false;
  int version = in.get();
  if (version != cache_format_version) return false;
  OverlapSet loaded;
  for (int ax = 0; ax < 3; ++ax) {
    double omega = 0.0, mass = 0.0, osc = 0.0;
    std::uint64_t k_max = 0;
    if (!detail::get_f64(in, omega) || !detail::get_f64(in, mass) ||
        !detail::get_u64(in, k_max) || !detail::get_f64(in, osc))
      return false;
    if (omega != trap.omega(ax) || mass != trap.mass ||
        k_max != static_cast<std::uint64_t>(max_index[ax]))
      return false;
    loaded.axis[ax].axis = ax;
    loaded.axis[ax].max_index = static_cast<int>(k_max);
    loaded.axis[ax].oscillator_length = osc;
    if (!detail::get_vec(in, loaded.axis[ax].values)) return false;
    std::size_t n = static_cast<std::size_t>(k_max) + 1;
    if (loaded.axis[ax].values.size() != n * n * n) return false;
  }
  set = std::move(loaded);
  return true;
}

// Rate tables, keyed by the physics config hash.
inline void save_rate_table_cache(const std::string& path, const RateTable& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write cache file '" + path + "'");
  out.write("CKRT", 4);
  out.put(static_cast<char>(cache_format_version));
  detail::put_str(out, r.provenance);
  detail::put_u64(out, static_cast<std::uint64_t>(r.n_atoms));
  detail::put_u64(out, r.mode == RateMode::physical ? 0 : 1);
  detail::put_vec(out, r.lambda_plus);
  detail::put_vec(out, r.lambda_minus);
  detail::put_vec(out, r.xi_plus);
  detail::put_vec(out, r.xi_minus);
}

inline bool load_rate_table_cache(const std::string& path, const std::string& provenance,
                                  int n_atoms, RateMode mode, RateTable& r) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[4];
  if (!detail::get_bytes(in, magic, 4) || std::memcmp(magic, "CKRT", 4) != 0) return false;
  int version = in.get();
  if (version != cache_format_version) return false;
  RateTable loaded;
  std::uint64_t n = 0, m = 0;
  if (!detail::get_str(in, loaded.provenance) || loaded.provenance != provenance) return false;
  if (!detail::get_u64(in, n) || n != static_cast<std::uint64_t>(n_atoms)) return false;
  if (!detail::get_u64(in, m) || m != (mode == RateMode::physical ? 0u : 1u)) return false;
  loaded.n_atoms = n_atoms;
  loaded.mode = mode;
  if (!detail::get_vec(in, loaded.lambda_plus) || !detail::get_vec(in, loaded.lambda_minus) ||
      !detail::get_vec(in, loaded.xi_plus) || !detail::get_vec(in, loaded.xi_minus))
    return false;
  std::size_t dim = static_cast<std::size_t>(n_atoms) + 1;
  if (loaded.lambda_plus.size() != dim || loaded.lambda_minus.size() != dim ||
      loaded.xi_plus.size() != dim || loaded.xi_minus.size() != dim)
    return false;
  r = std::move(loaded);
  return true;
}

}  // namespace condkin
