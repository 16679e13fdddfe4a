#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "condkin/constants.hpp"
#include "condkin/errors.hpp"
#include "condkin/hash.hpp"
#include "condkin/trap.hpp"
#include "condkin/window.hpp"
#include "condkin/rates.hpp"

namespace condkin {

enum class TemperatureMode { ratio, absolute };
enum class GammaMode { beta_hbar, absolute };
enum class InitialKind { delta, gibbs };
enum class GridKind { log, linear };

// Flat key = value configuration.  Every value is echoed verbatim into the
// run manifest; the physics-relevant subset feeds the config hash used for
// caching and provenance.
struct RunConfig {
  long n_atoms = 200;
  double mass_kg = rb87_mass;
  double scattering_length_m = 5.4e-9;
  double omega_x_hz = 42.0;
  double omega_y_hz = 42.0;
  double omega_z_hz = 120.0;
  TemperatureMode temperature_mode = TemperatureMode::ratio;
  double temperature = 0.4;  // T/Tc or K depending on mode
  GammaMode gamma_mode = GammaMode::beta_hbar;
  double gamma = 0.1;  // beta hbar Gamma or rad/s depending on mode
  WindowKind window_kind = WindowKind::lorentzian;
  double window_support_cut = 40.0;
  double energy_cutoff_factor = 12.0;  // x k_B T above eps0
  double energy_cutoff_hz = 0.0;       // absolute override (Hz above eps0) when > 0
  RateMode rate_mode = RateMode::physical;
  RatePath rate_path = RatePath::grouped;
  InitialKind initial_condition = InitialKind::delta;
  long initial_n0 = 0;
  double initial_gibbs_t_ratio = 1.0;  // T_init/Tc for the gibbs initial state
  GridKind time_grid = GridKind::log;
  double time_min_s = 1e-4;
  double time_max_s = 10.0;
  long time_samples = 200;
  double integrator_tol = 1e-10;
  long max_modes = 500000;
  long threads = 1;
  bool cache = true;
  std::string out_dir = "out";
  std::string cache_dir;  // defaults to <out_dir>/cache
  long rng_seed = 0;      // reserved; the deterministic core does not use it
  bool export_canonical_occupations = false;

  std::string effective_cache_dir() const {
    return cache_dir.empty() ? out_dir + "/cache" : cache_dir;
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number from '" + v + "'");
  }
}

inline long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse integer from '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected on/off, got '" + v + "'");
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

inline void apply_config_key(RunConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_long;
  if (key == "n_atoms") c.n_atoms = parse_long(key, value);
  else if (key == "mass_kg") c.mass_kg = parse_double(key, value);
  else if (key == "scattering_length_m") c.scattering_length_m = parse_double(key, value);
  else if (key == "omega_x_hz") c.omega_x_hz = parse_double(key, value);
  else if (key == "omega_y_hz") c.omega_y_hz = parse_double(key, value);
  else if (key == "omega_z_hz") c.omega_z_hz = parse_double(key, value);
  else if (key == "temperature_mode") {
    if (value == "ratio") c.temperature_mode = TemperatureMode::ratio;
    else if (value == "absolute") c.temperature_mode = TemperatureMode::absolute;
    else throw ConfigError("temperature_mode must be ratio|absolute, got '" + value + "'");
  } else if (key == "temperature") c.temperature = parse_double(key, value);
  else if (key == "gamma_mode") {
    if (value == "beta_hbar") c.gamma_mode = GammaMode::beta_hbar;
    else if (value == "absolute") c.gamma_mode = GammaMode::absolute;
    else throw ConfigError("gamma_mode must be beta_hbar|absolute, got '" + value + "'");
  } else if (key == "gamma") c.gamma = parse_double(key, value);
  else if (key == "window_kind") {
    if (value == "lorentzian") c.window_kind = WindowKind::lorentzian;
    else if (value == "gaussian") c.window_kind = WindowKind::gaussian;
    else if (value == "box") c.window_kind = WindowKind::box;
    else throw ConfigError("window_kind must be lorentzian|gaussian|box, got '" + value + "'");
  } else if (key == "window_support_cut") c.window_support_cut = parse_double(key, value);
  else if (key == "energy_cutoff_factor") c.energy_cutoff_factor = parse_double(key, value);
  else if (key == "energy_cutoff_hz") c.energy_cutoff_hz = parse_double(key, value);
  else if (key == "rate_mode") {
    if (value == "physical") c.rate_mode = RateMode::physical;
    else if (value == "balanced") c.rate_mode = RateMode::balanced;
    else throw ConfigError("rate_mode must be physical|balanced, got '" + value + "'");
  } else if (key == "rate_path") {
    if (value == "grouped") c.rate_path = RatePath::grouped;
    else if (value == "direct") c.rate_path = RatePath::direct;
    else throw ConfigError("rate_path must be grouped|direct, got '" + value + "'");
  } else if (key == "initial_condition") {
    if (value == "delta") c.initial_condition = InitialKind::delta;
    else if (value == "gibbs") c.initial_condition = InitialKind::gibbs;
    else throw ConfigError("initial_condition must be delta|gibbs, got '" + value + "'");
  } else if (key == "initial_n0") c.initial_n0 = parse_long(key, value);
  else if (key == "initial_gibbs_t_ratio") c.initial_gibbs_t_ratio = parse_double(key, value);
  else if (key == "time_grid") {
    if (value == "log") c.time_grid = GridKind::log;
    else if (value == "linear") c.time_grid = GridKind::linear;
    else throw ConfigError("time_grid must be log|linear, got '" + value + "'");
  } else if (key == "time_min_s") c.time_min_s = parse_double(key, value);
  else if (key == "time_max_s") c.time_max_s = parse_double(key, value);
  else if (key == "time_samples") c.time_samples = parse_long(key, value);
  else if (key == "integrator_tol") c.integrator_tol = parse_double(key, value);
  else if (key == "max_modes") c.max_modes = parse_long(key, value);
  else if (key == "threads") c.threads = parse_long(key, value);
  else if (key == "cache") c.cache = parse_bool(key, value);
  else if (key == "out_dir") c.out_dir = value;
  else if (key == "cache_dir") c.cache_dir = value;
  else if (key == "rng_seed") c.rng_seed = parse_long(key, value);
  else if (key == "export_canonical_occupations")
    c.export_canonical_occupations = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    apply_config_key(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return c;
}

// Ordered (key, value) echo of the effective configuration.
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c) {
  using detail::fmt_double;
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("n_atoms", std::to_string(c.n_atoms));
  kv.emplace_back("mass_kg", fmt_double(c.mass_kg));
  kv.emplace_back("scattering_length_m", fmt_double(c.scattering_length_m));
  kv.emplace_back("omega_x_hz", fmt_double(c.omega_x_hz));
  kv.emplace_back("omega_y_hz", fmt_double(c.omega_y_hz));
  kv.emplace_back("omega_z_hz", fmt_double(c.omega_z_hz));
  kv.emplace_back("temperature_mode",
                  c.temperature_mode == TemperatureMode::ratio ? "ratio" : "absolute");
  kv.emplace_back("temperature", fmt_double(c.temperature));
  kv.emplace_back("gamma_mode", c.gamma_mode == GammaMode::beta_hbar ? "beta_hbar" : "absolute");
  kv.emplace_back("gamma", fmt_double(c.gamma));
  kv.emplace_back("window_kind", to_string(c.window_kind));
  kv.emplace_back("window_support_cut", fmt_double(c.window_support_cut));
  kv.emplace_back("energy_cutoff_factor", fmt_double(c.energy_cutoff_factor));
  kv.emplace_back("energy_cutoff_hz", fmt_double(c.energy_cutoff_hz));
  kv.emplace_back("rate_mode", to_string(c.rate_mode));
  kv.emplace_back("rate_path", c.rate_path == RatePath::grouped ? "grouped" : "direct");
  kv.emplace_back("initial_condition",
                  c.initial_condition == InitialKind::delta ? "delta" : "gibbs");
  kv.emplace_back("initial_n0", std::to_string(c.initial_n0));
  kv.emplace_back("initial_gibbs_t_ratio", fmt_double(c.initial_gibbs_t_ratio));
  kv.emplace_back("time_grid", c.time_grid == GridKind::log ? "log" : "linear");
  kv.emplace_back("time_min_s", fmt_double(c.time_min_s));
  kv.emplace_back("time_max_s", fmt_double(c.time_max_s));
  kv.emplace_back("time_samples", std::to_string(c.time_samples));
  kv.emplace_back("integrator_tol", fmt_double(c.integrator_tol));
  kv.emplace_back("max_modes", std::to_string(c.max_modes));
  kv.emplace_back("threads", std::to_string(c.threads));
  kv.emplace_back("cache", c.cache ? "on" : "off");
  kv.emplace_back("out_dir", c.out_dir);
  kv.emplace_back("cache_dir", c.cache_dir);
  kv.emplace_back("rng_seed", std::to_string(c.rng_seed));
  kv.emplace_back("export_canonical_occupations",
                  c.export_canonical_occupations ? "on" : "off");
  return kv;
}

// Hash over the physics-relevant keys (output/caching/threading knobs do not
// change any computed number and are excluded).
inline std::string config_hash(const RunConfig& c) {
  Fnv1a h;
  for (const auto& [key, value] : config_echo(c)) {
    if (key == "out_dir" || key == "cache_dir" || key == "cache" || key == "threads")
      continue;
    h.add(key);
    h.add(value);
  }
  return h.hex();
}

inline void validate_config(const RunConfig& c) {
  if (c.n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
  if (!(c.mass_kg > 0.0)) throw ConfigError("mass_kg must be > 0");
  if (!(c.scattering_length_m >= 0.0)) throw ConfigError("scattering_length_m must be >= 0");
  if (!(c.omega_x_hz > 0.0) || !(c.omega_y_hz > 0.0) || !(c.omega_z_hz > 0.0))
    throw ConfigError("trap frequencies must be > 0");
  if (!(c.temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (!(c.gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(c.window_support_cut > 0.0)) throw ConfigError("window_support_cut must be > 0");
  if (!(c.energy_cutoff_factor > 0.0) && !(c.energy_cutoff_hz > 0.0))
    throw ConfigError("need a positive energy cutoff");
  if (c.initial_n0 < 0 || c.initial_n0 > c.n_atoms)
    throw ConfigError("initial_n0 must be in [0, n_atoms]");
  if (!(c.initial_gibbs_t_ratio > 0.0)) throw ConfigError("initial_gibbs_t_ratio must be > 0");
  if (!(c.time_min_s > 0.0) || !(c.time_max_s > c.time_min_s))
    throw ConfigError("need 0 < time_min_s < time_max_s");
  if (c.time_samples < 2) throw ConfigError("time_samples must be >= 2");
  if (!(c.integrator_tol > 0.0) || c.integrator_tol > 1e-4)
    throw ConfigError("integrator_tol must be in (0, 1e-4]");
  if (c.max_modes < 1) throw ConfigError("max_modes must be >= 1");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
}

// Physical scales derived from a validated config.
struct DerivedScales {
  TrapConfig trap;
  double t_critical = 0.0;   // K
  double temperature = 0.0;  // K
  double beta = 0.0;         // 1/J
  double gamma_rad = 0.0;    // rad/s
  double beta_hbar_gamma = 0.0;
  double cutoff_j = 0.0;     // above eps0
  EnergyWindow window;
};

inline DerivedScales derive_scales(const RunConfig& c) {
  validate_config(c);
  DerivedScales d;
  d.trap.omega_x = 2.0 * pi * c.omega_x_hz;
  d.trap.omega_y = 2.0 * pi * c.omega_y_hz;
  d.trap.omega_z = 2.0 * pi * c.omega_z_hz;
  d.trap.mass = c.mass_kg;
  d.trap.scattering_length = c.scattering_length_m;
  d.t_critical = critical_temperature(d.trap, c.n_atoms);
  d.temperature = c.temperature_mode == TemperatureMode::ratio
                      ? c.temperature * d.t_critical
                      : c.temperature;
  if (!(d.temperature > 0.0)) throw ConfigError("derived temperature must be > 0");
  d.beta = 1.0 / (k_boltzmann * d.temperature);
  d.gamma_rad = c.gamma_mode == GammaMode::beta_hbar ? c.gamma / (d.beta * hbar) : c.gamma;
  d.beta_hbar_gamma = d.beta * hbar * d.gamma_rad;
  d.cutoff_j = c.energy_cutoff_hz > 0.0
                   ? 2.0 * pi * hbar * c.energy_cutoff_hz
                   : c.energy_cutoff_factor * k_boltzmann * d.temperature;
  d.window.kind = c.window_kind;
  d.window.gamma = d.gamma_rad;
  d.window.support_cut = c.window_support_cut;
  return d;
}

inline std::vector<double> make_time_grid(const RunConfig& c) {
  std::vector<double> t(static_cast<std::size_t>(c.time_samples));
  long n = c.time_samples;
  for (long i = 0; i < n; ++i) {
    double f = static_cast<double>(i) / static_cast<double>(n - 1);
    t[i] = c.time_grid == GridKind::log
               ? c.time_min_s * std::pow(c.time_max_s / c.time_min_s, f)
               : c.time_min_s + (c.time_max_s - c.time_min_s) * f;
  }
  return t;
}

// Built-in presets; they go through the ordinary parser so the echo is the
// literal configuration text.
inline const std::map<std::string, std::string>& config_presets() {
  static const std::map<std::string, std::string> presets = {
      {"paper-n200",
       "# N = 200 Rb-87 atoms quenched to T/Tc = 0.4\n"
       "n_atoms = 200\n"
       "mass_kg = 1.44316e-25\n"
       "scattering_length_m = 5.4e-9\n"
       "omega_x_hz = 42.0\n"
       "omega_y_hz = 42.0\n"
       "omega_z_hz = 120.0\n"
       "temperature_mode = ratio\n"
       "temperature = 0.4\n"
       "gamma_mode = beta_hbar\n"
       "gamma = 0.1\n"
       "window_kind = lorentzian\n"
       "rate_mode = physical\n"
       "initial_condition = delta\n"
       "initial_n0 = 0\n"},
      {"toy-3mode",
       "# 3-mode isotropic toy system, N = 4; box window covering all triples\n"
       "n_atoms = 4\n"
       "mass_kg = 1.44316e-25\n"
       "scattering_length_m = 5.4e-9\n"
       "omega_x_hz = 50.0\n"
       "omega_y_hz = 50.0\n"
       "omega_z_hz = 50.0\n"
       "temperature_mode = absolute\n"
       "temperature = 5e-9\n"
       "gamma_mode = absolute\n"
       "gamma = 1e4\n"
       "window_kind = box\n"
       "energy_cutoff_hz = 75.0\n"
       "rate_mode = physical\n"
       "initial_condition = delta\n"
       "initial_n0 = 0\n"
       "time_max_s = 100.0\n"}};
  return presets;
}

}  // namespace condkin
