#pragma once

// Independent brute-force oracles used by the test suites and the CLI
// oracle-suite subcommand.  Nothing here shares an evaluation path with the
// production recursion/kernel code: partition functions are exhaustive sums
// over occupation tuples, overlaps are integrated by refined Simpson
// quadrature, and the two-state relaxation is the closed-form solution.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "condkin/constants.hpp"

namespace condkin::oracle {

struct EnumeratedEnsemble {
  double z = 0.0;                    // partition function (linear scale)
  std::vector<double> occupations;   // <N_k> per mode
};

// Exhaustive canonical sum over occupation tuples {N_k} with sum N_k = m.
// Feasible for <= ~6 modes and m <= ~8.
inline EnumeratedEnsemble enumerate_canonical(const std::vector<double>& energies,
                                              double beta, int m) {
  EnumeratedEnsemble r;
  r.occupations.assign(energies.size(), 0.0);
  std::vector<int> occ(energies.size(), 0);
  std::function<void(std::size_t, int, double)> walk = [&](std::size_t mode, int left,
                                                           double log_w) {
    if (mode + 1 == energies.size()) {
      occ[mode] = left;
      double w = std::exp(log_w - beta * energies[mode] * left);
      r.z += w;
      for (std::size_t i = 0; i < energies.size(); ++i) r.occupations[i] += occ[i] * w;
      return;
    }
    for (int n = 0; n <= left; ++n) {
      occ[mode] = n;
      walk(mode + 1, left - n, log_w - beta * energies[mode] * n);
    }
  };
  if (energies.empty()) {
    r.z = (m == 0) ? 1.0 : 0.0;
    return r;
  }
  walk(0, m, 0.0);
  for (double& o : r.occupations) o /= r.z;
  return r;
}

// Condensate-number distribution of the projected Boltzmann state by
// exhaustive enumeration over all Fock states of n_atoms particles in
// {condensate + non-condensate modes}.
inline std::vector<double> enumerate_gibbs_projection(double condensate_energy,
                                                      const std::vector<double>& energies,
                                                      double beta, int n_atoms) {
  std::vector<double> weight(static_cast<std::size_t>(n_atoms) + 1, 0.0);
  for (int n0 = 0; n0 <= n_atoms; ++n0) {
    EnumeratedEnsemble rest = enumerate_canonical(energies, beta, n_atoms - n0);
    weight[n0] = std::exp(-beta * condensate_energy * n0) * rest.z;
  }
  double z = 0.0;
  for (double w : weight) z += w;
  for (double& w : weight) w /= z;
  return weight;
}

// psi_n for the 1D oscillator with unit length scale, via the orthonormal
// recurrence; used only inside the quadrature oracle.
inline double oscillator_eigenfunction(int n, double u) {
  const double pim4 = 0.7511255444649425;
  double p0 = pim4, p1 = std::sqrt(2.0) * u * pim4;
  if (n == 0) return p0 * std::exp(-0.5 * u * u);
  for (int j = 2; j <= n; ++j) {
    double p2 = u * std::sqrt(2.0 / j) * p1 - std::sqrt((j - 1.0) / j) * p0;
    p0 = p1;
    p1 = p2;
  }
  return p1 * std::exp(-0.5 * u * u);
}

// Composite Simpson with interval doubling until two refinements agree.
inline double simpson_refined(const std::function<double(double)>& f, double a, double b,
                              double rel_tol = 1e-13, int max_doublings = 22) {
  auto simpson = [&](std::size_t n) {
    double h = (b - a) / static_cast<double>(n);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) s += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  std::size_t n = 64;
  double prev = simpson(n);
  for (int d = 0; d < max_doublings; ++d) {
    n *= 2;
    double cur = simpson(n);
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur) + 1e-300) return cur;
    prev = cur;
  }
  return prev;
}

// int dx psi_k psi_l psi_m psi_0 for oscillator length a, by direct quadrature.
inline double quadrature_overlap_1d(int k, int l, int m, double a) {
  int top = std::max(k, std::max(l, m));
  double turning = std::sqrt(2.0 * top + 1.0);
  double limit = turning + 12.0;
  auto f = [&](double u) {
    return oscillator_eigenfunction(k, u) * oscillator_eigenfunction(l, u) *
           oscillator_eigenfunction(m, u) * oscillator_eigenfunction(0, u);
  };
  return simpson_refined(f, -limit, limit) / a;
}

// Two-state birth-death relaxation: generator [[-alpha, gamma], [alpha, -gamma]].
inline double two_state_p0(double alpha, double gamma_rate, double p0_initial, double t) {
  double s = alpha + gamma_rate;
  double p_inf = gamma_rate / s;
  return p_inf + (p0_initial - p_inf) * std::exp(-s * t);
}

}  // namespace condkin::oracle
