#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "condkin/canonical.hpp"
#include "condkin/config.hpp"
#include "condkin/io.hpp"
#include "condkin/master.hpp"
#include "condkin/oracles.hpp"
#include "condkin/overlap.hpp"
#include "condkin/rates.hpp"
#include "condkin/trap.hpp"

namespace condkin {

using ordered_json = nlohmann::ordered_json;

namespace detail {

class StageClock {
 public:
  void start() { t0_ = std::chrono::steady_clock::now(); }
  double stop_ms() {
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

// Everything computed for one configuration; kept in memory so callers
// (compare-steady, acceptance checks) can reuse the expensive pieces.
struct RunResult {
  RunConfig config;
  DerivedScales scales;
  std::string hash;
  DilutenessReport diluteness;
  TrapSpectrum spectrum;
  OverlapSet overlaps;
  CanonicalTable table;
  RateKernel kernel;
  RateTable rates;
  Trajectory trajectory;
  DistributionState steady_product;
  DistributionState steady_gibbs;
  DistributionState steady_asymptotic;
  bool rates_all_zero = false;
  bool asymptotic_converged = false;
  double asymptotic_time = 0.0;
  double equilibration_tv = 0.0;
  double tv_product_gibbs = 0.0;
  double tv_asymptotic_product = 0.0;
  double tv_asymptotic_gibbs = 0.0;
  ordered_json manifest;
};

namespace detail {

inline DistributionState initial_distribution(const RunConfig& config,
                                              const DerivedScales& scales,
                                              const TrapSpectrum& spectrum,
                                              unsigned threads) {
  if (config.initial_condition == InitialKind::delta)
    return delta_distribution(static_cast<int>(config.n_atoms),
                              static_cast<int>(config.initial_n0));
  double t_init = config.initial_gibbs_t_ratio * scales.t_critical;
  CanonicalTable warm =
      build_canonical_table(spectrum, t_init, static_cast<int>(config.n_atoms), threads);
  DistributionState s = steady_state_gibbs(warm, spectrum, static_cast<int>(config.n_atoms));
  s.time = 0.0;
  return s;
}

inline ordered_json oracle_checks(const RunResult& r) {
  ordered_json checks = ordered_json::array();
  const double beta = r.table.beta;
  std::vector<double> energies(r.spectrum.energies);

  // canonical recursion and occupations vs exhaustive enumeration
  double worst_z = 0.0, worst_occ = 0.0;
  for (int m = 0; m <= static_cast<int>(r.config.n_atoms); ++m) {
    oracle::EnumeratedEnsemble e = oracle::enumerate_canonical(energies, beta, m);
    worst_z = std::max(worst_z,
                       std::abs(std::exp(r.table.log_z[m] - std::log(e.z)) - 1.0));
    for (std::size_t k = 0; k < energies.size(); ++k) {
      double ref = e.occupations[k];
      double got = r.table.occupation(m, k);
      worst_occ = std::max(worst_occ, std::abs(got - ref) / (std::abs(ref) + 1e-300));
    }
  }
  checks.push_back({{"name", "canonical_partition_enumeration"},
                    {"max_rel_err", worst_z},
                    {"pass", worst_z < 1e-12}});
  checks.push_back({{"name", "canonical_occupations_enumeration"},
                    {"max_rel_err", worst_occ},
                    {"pass", worst_occ < 1e-12}});

  // projected Gibbs state vs exhaustive Boltzmann enumeration
  std::vector<double> p_ref = oracle::enumerate_gibbs_projection(
      r.spectrum.epsilon0, energies, beta, static_cast<int>(r.config.n_atoms));
  double worst_g = 0.0;
  for (std::size_t n0 = 0; n0 < p_ref.size(); ++n0)
    worst_g = std::max(worst_g, std::abs(r.steady_gibbs.p[n0] - p_ref[n0]) /
                                    (std::abs(p_ref[n0]) + 1e-300));
  checks.push_back({{"name", "gibbs_projection_enumeration"},
                    {"max_rel_err", worst_g},
                    {"pass", worst_g < 1e-12}});

  // balance factor vs enumeration partition ratio
  double worst_b = 0.0;
  for (int m = 1; m <= static_cast<int>(r.config.n_atoms); ++m) {
    double ref = std::exp(-beta * r.spectrum.epsilon0) *
                 oracle::enumerate_canonical(energies, beta, m - 1).z /
                 oracle::enumerate_canonical(energies, beta, m).z;
    double got = balance_factor(r.table, r.spectrum, m);
    worst_b = std::max(worst_b, std::abs(got / ref - 1.0));
  }
  checks.push_back({{"name", "balance_factor_enumeration"},
                    {"max_rel_err", worst_b},
                    {"pass", worst_b < 1e-12}});
  return checks;
}

}  // namespace detail

// Full pipeline: spectrum -> overlaps -> canonical table -> rates ->
// propagation -> steady-state comparison.  Writes nothing unless out_dir is
// non-empty in `write`; see run() below for the file-producing entry point.
inline RunResult run_pipeline(const RunConfig& config, bool write_files = false,
                              bool verbose = false) {
  RunResult r;
  r.config = config;
  r.scales = derive_scales(config);  // validates
  r.hash = config_hash(config);
  unsigned threads = static_cast<unsigned>(config.threads);

  detail::StageClock clock;
  ordered_json stage_ms;

  const int n_atoms = static_cast<int>(config.n_atoms);
  r.diluteness = diluteness_report(r.scales.trap, config.n_atoms, r.scales.temperature);

  if (verbose) {
    std::printf("condkin run %s\n", r.hash.c_str());
    for (const auto& [k, v] : config_echo(config)) std::printf("  %s = %s\n", k.c_str(), v.c_str());
    std::printf("  [derived] Tc = %.6g K via k_B*Tc = hbar*omega_bar*(N/zeta3)^(1/3) "
                "(geometric-mean frequency, no finite-size shift)\n", r.scales.t_critical);
    std::printf("  [derived] T = %.6g K, beta*hbar*Gamma = %.6g\n", r.scales.temperature,
                r.scales.beta_hbar_gamma);
    std::printf("  [derived] diluteness a*rho^(1/3) = %.6g (dilute: %s)\n",
                r.diluteness.a_rho_third, r.diluteness.dilute ? "yes" : "no");
    if (r.scales.temperature >= r.scales.t_critical)
      std::printf("  [warn] T >= Tc: no condensation expected, model still runs\n");
  }

  std::string cache_dir = config.effective_cache_dir();
  if (write_files) {
    std::filesystem::create_directories(config.out_dir);
    if (config.cache) std::filesystem::create_directories(cache_dir);
  }

  clock.start();
  r.spectrum = enumerate_modes(r.scales.trap, r.scales.cutoff_j,
                               static_cast<std::size_t>(config.max_modes));
  stage_ms["spectrum"] = clock.stop_ms();

  // overlap tensors (cached on disk keyed by omega/mass/max index)
  std::array<int, 3> max_index = {r.spectrum.max_axis_index(0), r.spectrum.max_axis_index(1),
                                  r.spectrum.max_axis_index(2)};
  std::string overlap_cache;
  bool overlap_hit = false;
  if (config.cache && write_files) {
    Fnv1a h;
    for (int ax = 0; ax < 3; ++ax) {
      h.add(r.scales.trap.omega(ax));
      h.add(max_index[ax]);
    }
    h.add(r.scales.trap.mass);
    overlap_cache = cache_dir + "/overlap_" + h.hex() + ".bin";
    overlap_hit = load_overlap_cache(overlap_cache, r.scales.trap, max_index, r.overlaps);
  }
  clock.start();
  if (!overlap_hit) {
    r.overlaps = build_overlaps(r.scales.trap, max_index);
    if (!overlap_cache.empty()) save_overlap_cache(overlap_cache, r.scales.trap, r.overlaps);
  }
  stage_ms["overlaps"] = clock.stop_ms();

  clock.start();
  r.table = build_canonical_table(r.spectrum, r.scales.temperature, n_atoms, threads);
  stage_ms["canonical"] = clock.stop_ms();

  // rate table (cached keyed by the physics config hash)
  std::string rate_provenance =
      r.hash + ":" + r.table.spectrum_ref + ":" + to_string(config.window_kind);
  std::string rate_cache;
  bool rate_hit = false;
  if (config.cache && write_files) {
    rate_cache = cache_dir + "/ratetable_" + r.hash + ".bin";
    rate_hit = load_rate_table_cache(rate_cache, rate_provenance, n_atoms, config.rate_mode,
                                     r.rates);
  }
  clock.start();
  r.kernel = build_rate_kernel(r.spectrum, r.overlaps, r.table.classes, r.scales.window,
                               threads);
  stage_ms["rate_kernel"] = clock.stop_ms();
  clock.start();
  if (!rate_hit) {
    RateBuildOptions opt;
    opt.window = r.scales.window;
    opt.mode = config.rate_mode;
    opt.path = config.rate_path;
    opt.n_atoms = n_atoms;
    opt.n_threads = threads;
    opt.provenance = rate_provenance;
    r.rates = build_rate_table(r.spectrum, r.overlaps, r.table, opt,
                               config.rate_path == RatePath::grouped ? &r.kernel : nullptr);
    if (!rate_cache.empty()) save_rate_table_cache(rate_cache, r.rates);
  }
  stage_ms["rates"] = clock.stop_ms();

  r.rates_all_zero = true;
  for (std::size_t i = 0; i < r.rates.xi_plus.size(); ++i)
    if (r.rates.xi_plus[i] != 0.0 || r.rates.xi_minus[i] != 0.0) r.rates_all_zero = false;

  clock.start();
  Generator gen = build_generator(r.rates);
  DistributionState initial = detail::initial_distribution(config, r.scales, r.spectrum, threads);
  std::vector<double> grid = make_time_grid(config);
  r.trajectory = propagate(gen, initial, grid, config.integrator_tol);
  stage_ms["propagation"] = clock.stop_ms();

  clock.start();
  r.steady_gibbs = steady_state_gibbs(r.table, r.spectrum, n_atoms);

  // asymptotic state: extend the propagation horizon, doubling each step,
  // until two consecutive horizons agree to 1e-8 in total variation
  r.steady_asymptotic = r.trajectory.states.back();
  r.asymptotic_time = r.trajectory.times.back();
  r.equilibration_tv = 1.0;
  if (r.rates_all_zero) {
    r.asymptotic_converged = true;
    r.equilibration_tv = 0.0;
  } else {
    double horizon = r.asymptotic_time;
    for (int step = 0; step < 48 && !r.asymptotic_converged; ++step) {
      std::vector<double> next_t = {r.steady_asymptotic.time + horizon};
      Trajectory ext = propagate(gen, r.steady_asymptotic, next_t, config.integrator_tol);
      r.equilibration_tv = total_variation(ext.states.back(), r.steady_asymptotic);
      r.steady_asymptotic = ext.states.back();
      r.asymptotic_time = r.steady_asymptotic.time;
      if (r.equilibration_tv < 1e-8) r.asymptotic_converged = true;
      horizon *= 2.0;
    }
    r.steady_product = steady_state_product(r.rates);
    r.tv_product_gibbs = total_variation(r.steady_product, r.steady_gibbs);
    r.tv_asymptotic_product = total_variation(r.steady_asymptotic, r.steady_product);
    r.tv_asymptotic_gibbs = total_variation(r.steady_asymptotic, r.steady_gibbs);
  }
  stage_ms["steady_states"] = clock.stop_ms();

  // manifest
  ordered_json m;
  m["tool"] = "condkin";
  m["cache_format_version"] = cache_format_version;
  m["config_hash"] = r.hash;
  ordered_json cfg;
  for (const auto& [k, v] : config_echo(config)) cfg[k] = v;
  m["config"] = cfg;
  m["derived"] = {
      {"t_critical_k", r.scales.t_critical},
      {"tc_formula", "k_B*Tc = hbar*omega_bar*(N/zeta3)^(1/3), omega_bar geometric mean, "
                     "no finite-size correction"},
      {"temperature_k", r.scales.temperature},
      {"beta_per_j", r.scales.beta},
      {"gamma_rad_s", r.scales.gamma_rad},
      {"beta_hbar_gamma", r.scales.beta_hbar_gamma},
      {"energy_cutoff_j_above_eps0", r.scales.cutoff_j},
      {"epsilon0_j", r.spectrum.epsilon0},
      {"mode_count", r.spectrum.size()},
      {"energy_class_count", r.table.classes.size()},
      {"kernel_entries", r.kernel.size()},
      {"ln_gibbs_partition", gibbs_log_partition(r.table, r.spectrum, n_atoms)},
      {"t_above_tc_warning", r.scales.temperature >= r.scales.t_critical}};
  m["diluteness"] = {{"a_rho_third", r.diluteness.a_rho_third},
                     {"peak_density_per_m3", r.diluteness.peak_density},
                     {"dilute", r.diluteness.dilute}};
  m["cache"] = {{"enabled", config.cache && write_files},
                {"overlap_hit", overlap_hit},
                {"rate_table_hit", rate_hit}};
  m["propagation"] = {{"samples", r.trajectory.times.size()},
                      {"clamp_events", r.trajectory.clamp_events},
                      {"integrator_tol", config.integrator_tol},
                      {"max_total_rate_per_s", gen.max_abs_diag()}};
  ObservableRow eq = observables(r.steady_gibbs, n_atoms);
  m["steady_state"] = {{"rates_all_zero", r.rates_all_zero},
                       {"tv_product_gibbs", r.tv_product_gibbs},
                       {"tv_asymptotic_product", r.tv_asymptotic_product},
                       {"tv_asymptotic_gibbs", r.tv_asymptotic_gibbs},
                       {"asymptotic_time_s", r.asymptotic_time},
                       {"asymptotic_converged", r.asymptotic_converged},
                       {"equilibration_tv", r.equilibration_tv},
                       {"gibbs_sigma0", eq.sigma0},
                       {"gibbs_var_n0", eq.var_n0}};

  if (r.spectrum.size() <= 5 && config.n_atoms <= 6) {
    m["oracle_checks"] = detail::oracle_checks(r);
    if (verbose) {
      for (const auto& chk : m["oracle_checks"])
        std::printf("  [oracle] %-38s %s (max rel err %.3g)\n",
                    chk["name"].get<std::string>().c_str(),
                    chk["pass"].get<bool>() ? "pass" : "FAIL",
                    chk["max_rel_err"].get<double>());
    }
  }

  if (write_files) {
    clock.start();
    const std::string& dir = config.out_dir;
    write_spectrum_csv(dir + "/spectrum.csv", r.spectrum);
    write_canonical_csv(dir + "/canonical.csv", r.table, r.spectrum,
                        config.export_canonical_occupations);
    write_rates_csv(dir + "/rates.csv", r.rates);
    write_trajectory_csv(dir + "/trajectory.csv", r.trajectory);
    write_distributions_csv(dir + "/distributions.csv", r.trajectory);
    if (!r.rates_all_zero)
      write_steady_csv(dir + "/steady_states.csv", r.steady_product, r.steady_gibbs,
                       r.steady_asymptotic);
    stage_ms["write_outputs"] = clock.stop_ms();
    ordered_json outputs = ordered_json::array();
    for (const char* f : {"spectrum.csv", "canonical.csv", "rates.csv", "trajectory.csv",
                          "distributions.csv"})
      outputs.push_back(f);
    if (!r.rates_all_zero) outputs.push_back("steady_states.csv");
    m["outputs"] = outputs;
  }
  m["stage_ms"] = stage_ms;

  r.manifest = std::move(m);
  if (write_files) {
    std::ofstream mf(config.out_dir + "/manifest.json", std::ios::binary);
    if (!mf) throw ConfigError("cannot write manifest to '" + config.out_dir + "'");
    mf << r.manifest.dump(2) << '\n';
  }
  if (verbose)
    std::printf("  steady state: TV(product,gibbs) = %.3g, TV(asymptotic,gibbs) = %.3g, "
                "clamp events = %llu\n",
                r.tv_product_gibbs, r.tv_asymptotic_gibbs,
                static_cast<unsigned long long>(r.trajectory.clamp_events));
  return r;
}

// The CLI `run` operation: validates, computes, writes all artifact files.
inline RunResult run(const RunConfig& config, bool verbose = true) {
  return run_pipeline(config, true, verbose);
}

struct CompareSteadyResult {
  double tv_product_gibbs = 0.0;
  double tv_asymptotic_product = 0.0;
  double tv_asymptotic_gibbs = 0.0;
  double tv_full_vs_half_a = 0.0;
  ordered_json report;
};

// Steady-state comparison report, plus the interaction-strength independence
// check: the run is repeated at a/2 (reusing the a-independent kernel, since
// the scattering length enters only through the a^2 prefactor) and the two
// product-form steady states are compared.
inline CompareSteadyResult compare_steady_states(const RunConfig& config, bool verbose = true,
                                                 bool write_files = true) {
  RunResult base = run_pipeline(config, false, verbose);
  if (base.rates_all_zero)
    throw NumericError("compare-steady: all rates vanish (a = 0), no steady state to compare");

  TrapSpectrum half = base.spectrum;
  half.config.scattering_length = 0.5 * half.config.scattering_length;
  RateBuildOptions opt;
  opt.window = base.scales.window;
  opt.mode = config.rate_mode;
  opt.path = config.rate_path;
  opt.n_atoms = static_cast<int>(config.n_atoms);
  opt.n_threads = static_cast<unsigned>(config.threads);
  opt.provenance = base.rates.provenance + ":half_a";
  RateTable rates_half = build_rate_table(half, base.overlaps, base.table, opt,
                                          config.rate_path == RatePath::grouped
                                              ? &base.kernel : nullptr);
  DistributionState steady_half = steady_state_product(rates_half);

  CompareSteadyResult cmp;
  cmp.tv_product_gibbs = base.tv_product_gibbs;
  cmp.tv_asymptotic_product = base.tv_asymptotic_product;
  cmp.tv_asymptotic_gibbs = base.tv_asymptotic_gibbs;
  cmp.tv_full_vs_half_a = total_variation(base.steady_product, steady_half);

  ordered_json rep;
  rep["config_hash"] = base.hash;
  rep["rate_mode"] = to_string(config.rate_mode);
  rep["tv_product_gibbs"] = cmp.tv_product_gibbs;
  rep["tv_asymptotic_product"] = cmp.tv_asymptotic_product;
  rep["tv_asymptotic_gibbs"] = cmp.tv_asymptotic_gibbs;
  rep["scattering_length_m"] = config.scattering_length_m;
  rep["tv_product_a_vs_half_a"] = cmp.tv_full_vs_half_a;
  cmp.report = rep;

  if (write_files) {
    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(config.out_dir + "/compare_steady.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write compare_steady.json");
    out << rep.dump(2) << '\n';
  }
  if (verbose)
    std::printf("compare-steady: TV(product,gibbs) = %.3g, TV(a vs a/2) = %.3g\n",
                cmp.tv_product_gibbs, cmp.tv_full_vs_half_a);
  return cmp;
}

}  // namespace condkin
