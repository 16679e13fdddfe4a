// condkin command-line driver: full pipeline runs, steady-state comparison
// reports, and the quick oracle suite.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "condkin/config.hpp"
#include "condkin/master.hpp"
#include "condkin/oracles.hpp"
#include "condkin/pipeline.hpp"

namespace {

condkin::RunConfig load_config(const std::string& source,
                               const std::vector<std::string>& overrides,
                               const std::string& out_dir, long threads, bool no_cache) {
  const auto& presets = condkin::config_presets();
  std::string text;
  if (auto it = presets.find(source); it != presets.end()) {
    text = it->second;
  } else {
    std::ifstream in(source);
    if (!in) throw condkin::ConfigError("config '" + source +
                                        "' is neither a preset nor a readable file");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  condkin::RunConfig config = condkin::parse_config_text(text);
  for (const std::string& kv : overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw condkin::ConfigError("--set expects key=value, got '" + kv + "'");
    condkin::apply_config_key(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (threads > 0) config.threads = threads;
  if (no_cache) config.cache = false;
  return config;
}

struct OracleReport {
  int failures = 0;

  void check(const std::string& name, double err, double tol) {
    bool ok = err < tol;
    if (!ok) ++failures;
    std::printf("[%s] %-44s err %.3g (tol %.1g)\n", ok ? "pass" : "FAIL", name.c_str(), err,
                tol);
  }
};

// Enumeration + quadrature oracle sweep; kept fast (< 1 s).
int run_oracle_suite() {
  using namespace condkin;
  OracleReport rep;

  // canonical recursion vs exhaustive enumeration on several toy spectra
  {
    TrapConfig iso{2 * pi * 50, 2 * pi * 50, 2 * pi * 50, rb87_mass, 5.4e-9};
    TrapConfig aniso{2 * pi * 41, 2 * pi * 57, 2 * pi * 103, rb87_mass, 5.4e-9};
    struct Case {
      TrapConfig trap;
      double cutoff_hz;
    };
    std::vector<Case> cases = {{iso, 75.0}, {aniso, 110.0}, {aniso, 165.0}, {iso, 105.0}};
    double worst = 0.0;
    for (const auto& c : cases) {
      TrapSpectrum s = enumerate_modes(c.trap, 2 * pi * hbar * c.cutoff_hz);
      if (s.size() > 5 || s.size() == 0) continue;
      double temperature = 4e-9;
      CanonicalTable t = build_canonical_table(s, temperature, 6);
      for (int m = 0; m <= 6; ++m) {
        auto e = oracle::enumerate_canonical(s.energies, t.beta, m);
        worst = std::max(worst, std::abs(std::exp(t.log_z[m] - std::log(e.z)) - 1.0));
        for (std::size_t k = 0; k < s.size(); ++k)
          worst = std::max(worst, std::abs(t.occupation(m, k) - e.occupations[k]) /
                                      (e.occupations[k] + 1e-300));
      }
    }
    rep.check("canonical recursion vs enumeration", worst, 1e-12);
  }

  // projected Gibbs state, 3-mode N = 4
  {
    TrapConfig iso{2 * pi * 50, 2 * pi * 50, 2 * pi * 50, rb87_mass, 5.4e-9};
    TrapSpectrum s = enumerate_modes(iso, 2 * pi * hbar * 75.0);
    CanonicalTable t = build_canonical_table(s, 5e-9, 4);
    DistributionState g = steady_state_gibbs(t, s, 4);
    auto ref = oracle::enumerate_gibbs_projection(s.epsilon0, s.energies, t.beta, 4);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
      worst = std::max(worst, std::abs(g.p[i] - ref[i]) / (ref[i] + 1e-300));
    rep.check("Gibbs projection vs Boltzmann enumeration", worst, 1e-12);
  }

  // tabulated 1D overlaps vs direct quadrature
  {
    double a = 1.3e-6;
    OverlapTensor1D t = overlap_1d(0, 10, a);
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> pick(0, 10);
    double worst = std::abs(t.at(0, 0, 0) - 1.0 / (a * std::sqrt(2.0 * pi))) *
                   (a * std::sqrt(2.0 * pi));
    for (int trial = 0; trial < 25; ++trial) {
      int k = pick(rng), l = pick(rng), m = pick(rng);
      if ((k + l + m) % 2) continue;
      double ref = oracle::quadrature_overlap_1d(k, l, m, a);
      worst = std::max(worst, std::abs(t.at(k, l, m) - ref) / (std::abs(ref) + 1e-300));
    }
    rep.check("1D overlaps vs Simpson quadrature", worst, 1e-10);
  }

  // window normalization
  {
    EnergyWindow lor{WindowKind::lorentzian, 3.0, 40.0};
    EnergyWindow gau{WindowKind::gaussian, 3.0, 40.0};
    auto integral = [](const EnergyWindow& w, double range) {
      return oracle::simpson_refined([&](double d) { return energy_window_value(w, d); },
                                     -range, range, 1e-13, 24);
    };
    rep.check("lorentzian window normalization", std::abs(integral(lor, 1e4 * 3.0) - 1.0),
              1e-3);
    rep.check("gaussian window normalization", std::abs(integral(gau, 40.0 * 3.0) - 1.0),
              1e-9);
  }

  // two-state closed form
  {
    double alpha = 3.0, gamma_rate = 7.0;
    RateTable rt;
    rt.n_atoms = 1;
    rt.lambda_plus = {alpha / 2.0, 0.0};
    rt.lambda_minus = {0.0, gamma_rate / 2.0};
    rt.xi_plus = {alpha, 0.0};
    rt.xi_minus = {0.0, gamma_rate};
    Generator gen = build_generator(rt);
    DistributionState init = delta_distribution(1, 0);
    std::vector<double> grid;
    for (int i = 1; i <= 40; ++i) grid.push_back(0.02 * i);
    Trajectory traj = propagate(gen, init, grid, 1e-12);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(traj.states[i].p[0] -
                                       oracle::two_state_p0(alpha, gamma_rate, 1.0, grid[i])));
    rep.check("two-state relaxation vs closed form", worst, 1e-8);
  }

  // 3-mode toy triple sum vs the 27-term expansion
  {
    TrapConfig iso{2 * pi * 50, 2 * pi * 50, 2 * pi * 50, rb87_mass, 5.4e-9};
    TrapSpectrum s = enumerate_modes(iso, 2 * pi * hbar * 75.0);
    CanonicalTable t = build_canonical_table(s, 5e-9, 4);
    OverlapSet ov = build_overlaps(iso, {1, 1, 1});
    EnergyWindow box{WindowKind::box, 1e4, 1.0};
    auto [lp, lm] = lambda_rates(s, ov, t, box, 2);
    double sp = 0.0, sm = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t m = 0; m < 3; ++m) {
          double z = overlap_3d(ov, s.modes[i], s.modes[j], s.modes[m]);
          double delta = (s.energies[i] + s.energies[j] - s.energies[m] - s.epsilon0) / hbar;
          double w = z * z * energy_window_value(box, delta);
          double na = t.occupation(2, i), nb = t.occupation(2, j), nm = t.occupation(2, m);
          sp += w * na * nb * (nm + 1.0);
          sm += w * (na + 1.0) * (nb + 1.0) * nm;
        }
    double worst = std::max(std::abs(lp / sp - 1.0), std::abs(lm / sm - 1.0));
    rep.check("3-mode triple sum vs 27-term expansion", worst, 1e-12);
  }

  std::printf("oracle-suite: %s\n", rep.failures == 0 ? "all passed" : "FAILURES");
  return rep.failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"condkin: number-conserving Bose-Einstein condensation kinetics"};
  app.require_subcommand(1);

  std::string config_source, out_dir;
  std::vector<std::string> overrides;
  long threads = 0;
  bool no_cache = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_source, "preset name (paper-n200, toy-3mode) or config file")
        ->required();
    sub->add_option("--set", overrides, "override a config key, e.g. --set gamma=0.01");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker thread count");
    sub->add_flag("--no-cache", no_cache, "disable binary caches");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "full pipeline run, writes all artifacts");
  add_common(cmd_run);
  CLI::App* cmd_cmp = app.add_subcommand("compare-steady",
                                         "steady-state comparison incl. a vs a/2");
  add_common(cmd_cmp);
  app.add_subcommand("oracle-suite", "run enumeration/quadrature oracles, print pass/fail");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("oracle-suite")) return run_oracle_suite();
    condkin::RunConfig config =
        load_config(config_source, overrides, out_dir, threads, no_cache);
    if (app.got_subcommand("run")) {
      condkin::run(config);
      return 0;
    }
    condkin::compare_steady_states(config);
    return 0;
  } catch (const condkin::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const condkin::ResourceLimitError& e) {
    std::fprintf(stderr, "resource limit: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 2;
  }
}
