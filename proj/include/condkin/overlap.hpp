#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "condkin/constants.hpp"
#include "condkin/errors.hpp"
#include "condkin/trap.hpp"

namespace condkin {

// Gauss-Hermite nodes/weights for integrals against exp(-x^2), computed with
// Newton iteration on the orthonormal Hermite recurrence (see Numerical
// Recipes' gauher).  Accurate for the node counts used here (n <~ 200).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  const double eps = 1.0e-14;
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  const int max_iter = 100;

  GaussHermiteRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);

  int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * r.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * r.nodes[1];
    } else {
      z = 2.0 * z - r.nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= eps) break;
    }
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
    r.weights[i] = 2.0 / (pp * pp);
    r.weights[n - 1 - i] = r.weights[i];
  }
  return r;
}

// Orthonormal Hermite functions h_n(u) = p_n(u) exp(-u^2/2) with
// int h_n h_m du = delta_nm; fills p_n(u) for n = 0..n_max.
inline void hermite_orthonormal(double u, int n_max, std::vector<double>& p) {
  p.resize(n_max + 1);
  const double pim4 = 0.7511255444649425;
  p[0] = pim4;
  if (n_max == 0) return;
  p[1] = std::sqrt(2.0) * u * pim4;
  for (int n = 2; n <= n_max; ++n)
    p[n] = u * std::sqrt(2.0 / n) * p[n - 1] -
           std::sqrt((n - 1.0) / n) * p[n - 2];
}

// Per-axis table of zeta1d[k][l][m] = int dx psi_k psi_l psi_m psi_0, with
// psi_n the 1D oscillator eigenfunctions of oscillator length a.  Units 1/m.
// Exact parity zeros (k+l+m odd) are stored as literal 0.0 and the k<->l
// symmetry holds bitwise because entries are computed once per {k,l} set.
struct OverlapTensor1D {
  int axis = 0;  // 0=x 1=y 2=z
  int max_index = 0;
  double oscillator_length = 0.0;
  std::vector<double> values;  // (K+1)^3, index (k*(K+1)+l)*(K+1)+m

  double at(int k, int l, int m) const {
    if (k < 0 || l < 0 || m < 0 || k > max_index || l > max_index || m > max_index)
      throw std::out_of_range("OverlapTensor1D: index out of tabulated range");
    std::size_t n = static_cast<std::size_t>(max_index) + 1;
    return values[(static_cast<std::size_t>(k) * n + l) * n + m];
  }
};

// Tabulates the 1D overlaps by Gauss-Hermite quadrature.  After u = v/sqrt(2)
// the integrand is polynomial(degree <= 3K) x exp(-v^2), so 2K+8 nodes
// integrate it exactly up to rounding.
inline OverlapTensor1D overlap_1d(int axis, int max_index, double osc_length) {
  if (max_index < 0) throw std::invalid_argument("overlap_1d: max_index must be >= 0");
  if (!(osc_length > 0.0)) throw std::invalid_argument("overlap_1d: oscillator length must be > 0");

  OverlapTensor1D t;
  t.axis = axis;
  t.max_index = max_index;
  t.oscillator_length = osc_length;
  std::size_t n = static_cast<std::size_t>(max_index) + 1;
  t.values.assign(n * n * n, 0.0);

  int n_nodes = 2 * max_index + 8;
  GaussHermiteRule rule = gauss_hermite(n_nodes);

  // p_n(v_i / sqrt(2)) for all n, all nodes
  std::vector<std::vector<double>> p(n_nodes);
  std::vector<double> row;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n_nodes; ++i) {
    hermite_orthonormal(rule.nodes[i] * inv_sqrt2, max_index, row);
    p[i] = row;
  }

  const double pim4 = 0.7511255444649425;
  const double prefactor = pim4 / (osc_length * std::sqrt(2.0));
  for (int k = 0; k <= max_index; ++k) {
    for (int l = k; l <= max_index; ++l) {
      for (int m = 0; m <= max_index; ++m) {
        if ((k + l + m) % 2 != 0) continue;  // parity selection rule
        double acc = 0.0;
        for (int i = 0; i < n_nodes; ++i)
          acc += rule.weights[i] * p[i][k] * p[i][l] * p[i][m];
        double v = prefactor * acc;
        t.values[(static_cast<std::size_t>(k) * n + l) * n + m] = v;
        t.values[(static_cast<std::size_t>(l) * n + k) * n + m] = v;
      }
    }
  }
  return t;
}

// The three per-axis tables for one trap; the 3D overlap factorizes because
// trap and eigenfunctions are separable.
struct OverlapSet {
  std::array<OverlapTensor1D, 3> axis;

  const OverlapTensor1D& x() const { return axis[0]; }
  const OverlapTensor1D& y() const { return axis[1]; }
  const OverlapTensor1D& z() const { return axis[2]; }
};

inline OverlapSet build_overlaps(const TrapConfig& config, const std::array<int, 3>& max_index) {
  OverlapSet s;
  for (int ax = 0; ax < 3; ++ax)
    s.axis[ax] = overlap_1d(ax, max_index[ax], oscillator_length(config, ax));
  return s;
}

// zeta_{kl}^{m0} = prod_axis zeta1d; units 1/m^3.
inline double overlap_3d(const OverlapSet& t, const ModeIndex& k, const ModeIndex& l,
                         const ModeIndex& m) {
  return t.axis[0].at(k.kx, l.kx, m.kx) *
         t.axis[1].at(k.ky, l.ky, m.ky) *
         t.axis[2].at(k.kz, l.kz, m.kz);
}

}  // namespace condkin
