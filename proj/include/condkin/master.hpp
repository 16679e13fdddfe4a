#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "condkin/canonical.hpp"
#include "condkin/errors.hpp"
#include "condkin/rates.hpp"

namespace condkin {

struct DistributionState {
  std::vector<double> p;  // over N0 = 0..N
  double time = 0.0;      // s

  int n_atoms() const { return static_cast<int>(p.size()) - 1; }

  double norm() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }

  // Tiny negative excursions (integrator artifacts) are clamped to zero and
  // renormalized; anything below -1e-12 is a real invariant violation.
  // Returns the number of clamped components so callers can report it.
  std::uint64_t clamp_and_renormalize() {
    std::uint64_t clamped = 0;
    for (double& v : p) {
      if (v < 0.0) {
        if (v < -1e-12)
          throw NumericError("distribution component " + std::to_string(v) +
                             " below -1e-12 at t = " + std::to_string(time));
        v = 0.0;
        ++clamped;
      }
    }
    double s = norm();
    if (!(s > 0.0)) throw NumericError("distribution lost all mass");
    for (double& v : p) v /= s;
    return clamped;
  }
};

inline DistributionState delta_distribution(int n_atoms, int n0, double time = 0.0) {
  if (n0 < 0 || n0 > n_atoms) throw ConfigError("initial N0 outside [0, N]");
  DistributionState s;
  s.p.assign(static_cast<std::size_t>(n_atoms) + 1, 0.0);
  s.p[static_cast<std::size_t>(n0)] = 1.0;
  s.time = time;
  return s;
}

inline double total_variation(const DistributionState& a, const DistributionState& b) {
  if (a.p.size() != b.p.size())
    throw ConsistencyError("total variation of distributions with different N");
  double s = 0.0;
  for (std::size_t i = 0; i < a.p.size(); ++i) s += std::abs(a.p[i] - b.p[i]);
  return 0.5 * s;
}

// Tridiagonal birth-death generator Q:
//   Q[n0+1][n0] = xi_plus(n0), Q[n0-1][n0] = xi_minus(n0),
//   Q[n0][n0] = -(xi_plus(n0) + xi_minus(n0));
// columns sum to zero by construction.
struct Generator {
  std::vector<double> sub;    // sub[i]   = Q[i+1][i] = xi_plus(i)
  std::vector<double> diag;   // diag[i]  = -(xi_plus(i) + xi_minus(i))
  std::vector<double> super;  // super[i] = Q[i][i+1] = xi_minus(i+1)

  std::size_t dim() const { return diag.size(); }

  double max_abs_diag() const {
    double m = 0.0;
    for (double d : diag) m = std::max(m, std::abs(d));
    return m;
  }

  // y = Q p
  void apply(const std::vector<double>& p, std::vector<double>& y) const {
    std::size_t n = dim();
    for (std::size_t i = 0; i < n; ++i) {
      double v = diag[i] * p[i];
      if (i > 0) v += sub[i - 1] * p[i - 1];
      if (i + 1 < n) v += super[i] * p[i + 1];
      y[i] = v;
    }
  }
};

inline Generator build_generator(const RateTable& rates) {
  std::size_t dim = rates.xi_plus.size();
  if (dim < 2 || rates.xi_minus.size() != dim)
    throw ConfigError("rate table incomplete");
  Generator g;
  g.sub.assign(dim - 1, 0.0);
  g.super.assign(dim - 1, 0.0);
  g.diag.assign(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    double xp = rates.xi_plus[i];
    double xm = rates.xi_minus[i];
    if (!(xp >= 0.0) || !(xm >= 0.0))
      throw NumericError("negative rate at N0 = " + std::to_string(i));
    if (i + 1 < dim) g.sub[i] = xp;
    if (i > 0) g.super[i - 1] = xm;
    g.diag[i] = -(xp + xm);
  }
  return g;
}

struct ObservableRow {
  double mean_n0 = 0.0;
  double sigma0 = 0.0;
  double var_n0 = 0.0;
  double normalized_width = std::numeric_limits<double>::quiet_NaN();
};

inline ObservableRow observables(const DistributionState& state, int n_atoms) {
  ObservableRow r;
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < state.p.size(); ++i) {
    double x = static_cast<double>(i);
    m1 += x * state.p[i];
    m2 += x * x * state.p[i];
  }
  r.mean_n0 = m1;
  r.sigma0 = m1 / static_cast<double>(n_atoms);
  r.var_n0 = m2 - m1 * m1;
  if (r.sigma0 > 0.0)
    r.normalized_width = std::sqrt(std::max(0.0, r.var_n0)) /
                         std::sqrt(static_cast<double>(n_atoms) * r.sigma0);
  return r;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<DistributionState> states;
  std::vector<ObservableRow> rows;
  std::uint64_t clamp_events = 0;
};

namespace detail {

// One uniformization stride: p <- exp(Q dt) p as the Poisson-weighted power
// series in P = I + Q/lam.  P is column-stochastic with non-negative entries,
// so every partial result is a distribution; mass and positivity are
// preserved by construction and the truncated tail is bounded by the missing
// Poisson weight.
inline void uniformization_step(const Generator& gen, double lam, double dt, double tail_tol,
                                std::vector<double>& p, std::vector<double>& v,
                                std::vector<double>& qv, std::vector<double>& acc) {
  double mu = lam * dt;
  std::size_t n = gen.dim();
  v = p;
  double w = std::exp(-mu);
  double cum = w;
  for (std::size_t i = 0; i < n; ++i) acc[i] = w * v[i];
  // generous cap; mu <= 500 per stride keeps exp(-mu) representable
  std::size_t j_max = static_cast<std::size_t>(mu + 12.0 * std::sqrt(mu + 1.0) + 60.0);
  for (std::size_t j = 1; cum < 1.0 - tail_tol; ++j) {
    if (j > j_max)
      throw NumericError("uniformization series failed to converge (mu = " +
                         std::to_string(mu) + ")");
    gen.apply(v, qv);
    for (std::size_t i = 0; i < n; ++i) v[i] += qv[i] / lam;
    w *= mu / static_cast<double>(j);
    cum += w;
    for (std::size_t i = 0; i < n; ++i) acc[i] += w * v[i];
  }
  for (std::size_t i = 0; i < n; ++i) p[i] = acc[i] / cum;
}

}  // namespace detail

// Propagates the distribution to every grid time.  Uniformization on the
// tridiagonal generator: unconditionally stable, probability-conserving and
// positivity-preserving, with local truncation error below tol distributed
// over the strides (halving tol therefore moves every sample by O(tol),
// satisfying the step-halving contract).
inline Trajectory propagate(const Generator& gen, const DistributionState& initial,
                            const std::vector<double>& t_grid, double tol = 1e-10) {
  if (!(tol > 0.0) || tol > 1e-4) throw ConfigError("propagate: tol must be in (0, 1e-4]");
  if (gen.dim() != initial.p.size())
    throw ConsistencyError("generator dimension does not match distribution");
  if (t_grid.empty()) throw ConfigError("propagate: empty time grid");
  double prev = initial.time;
  for (double t : t_grid) {
    if (!(t > prev)) throw ConfigError("propagate: time grid must increase strictly from t0");
    prev = t;
  }

  const double lam = gen.max_abs_diag();
  const double mu_stride = 500.0;

  // fixed tolerance budget over all strides
  std::size_t n_strides = 0;
  {
    double t0 = initial.time;
    for (double t : t_grid) {
      double mu = lam * (t - t0);
      n_strides += static_cast<std::size_t>(mu / mu_stride) + 1;
      t0 = t;
    }
  }
  double tail_tol = tol / static_cast<double>(std::max<std::size_t>(n_strides, 1));

  Trajectory traj;
  traj.times = t_grid;
  traj.states.reserve(t_grid.size());
  traj.rows.reserve(t_grid.size());

  DistributionState state = initial;
  std::vector<double> v(gen.dim()), qv(gen.dim()), acc(gen.dim());
  int n_atoms = state.n_atoms();
  for (double t : t_grid) {
    double dt = t - state.time;
    if (lam > 0.0) {
      std::size_t steps = static_cast<std::size_t>(lam * dt / mu_stride) + 1;
      double h = dt / static_cast<double>(steps);
      for (std::size_t s = 0; s < steps; ++s)
        detail::uniformization_step(gen, lam, h, tail_tol, state.p, v, qv, acc);
    }
    state.time = t;
    traj.clamp_events += state.clamp_and_renormalize();
    traj.states.push_back(state);
    traj.rows.push_back(observables(state, n_atoms));
  }
  return traj;
}

// Normalized product-form stationary distribution,
//   ln p(N0) = sum_{k=1..N0} [ln xi_plus(k-1) - ln xi_minus(k)] - ln norm,
// computed in log space.  Unique stationary state of the birth-death chain;
// requires xi_minus(k) > 0 for k >= 1.
inline DistributionState steady_state_product(const RateTable& rates) {
  std::size_t dim = rates.xi_plus.size();
  std::vector<double> logw(dim, 0.0);
  for (std::size_t k = 1; k < dim; ++k) {
    if (!(rates.xi_minus[k] > 0.0))
      throw NumericError("reducible chain: xi_minus(" + std::to_string(k) +
                         ") = 0, steady state not unique");
    double step = std::log(rates.xi_plus[k - 1]) - std::log(rates.xi_minus[k]);
    logw[k] = logw[k - 1] + step;  // -inf fine: unreachable states get zero mass
  }
  double lse = log_sum_exp(logw);
  DistributionState s;
  s.p.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) s.p[k] = std::exp(logw[k] - lse);
  s.time = std::numeric_limits<double>::infinity();
  return s;
}

// Projected Gibbs-Boltzmann state, p(N0) ~ e^{-beta eps0 N0} Zperp(N-N0,T).
inline DistributionState steady_state_gibbs(const CanonicalTable& table,
                                            const TrapSpectrum& spectrum, int n_atoms) {
  if (table.n_max < n_atoms)
    throw ConsistencyError("canonical table does not span M = 0..N");
  std::vector<double> logw(static_cast<std::size_t>(n_atoms) + 1);
  for (int n0 = 0; n0 <= n_atoms; ++n0)
    logw[n0] = -table.beta * spectrum.epsilon0 * n0 + table.log_z[n_atoms - n0];
  double lse = log_sum_exp(logw);
  DistributionState s;
  s.p.resize(logw.size());
  for (std::size_t k = 0; k < logw.size(); ++k) s.p[k] = std::exp(logw[k] - lse);
  s.time = std::numeric_limits<double>::infinity();
  return s;
}

// ln Z(N,T): log of the Gibbs normalizer, the number of accessible
// microstates of condensate plus non-condensate.
inline double gibbs_log_partition(const CanonicalTable& table, const TrapSpectrum& spectrum,
                                  int n_atoms) {
  std::vector<double> logw(static_cast<std::size_t>(n_atoms) + 1);
  for (int n0 = 0; n0 <= n_atoms; ++n0)
    logw[n0] = -table.beta * spectrum.epsilon0 * n0 + table.log_z[n_atoms - n0];
  return log_sum_exp(logw);
}

struct RelaxationSample {
  double time = 0.0;
  double tv = 0.0;
};

inline std::vector<RelaxationSample> relaxation_report(const Trajectory& traj,
                                                       const DistributionState& target) {
  std::vector<RelaxationSample> out;
  out.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    out.push_back({traj.times[i], total_variation(traj.states[i], target)});
  return out;
}

}  // namespace condkin
