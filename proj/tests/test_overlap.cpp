#include <doctest.h>

#include <cmath>
#include <random>

#include "condkin/oracles.hpp"
#include "condkin/overlap.hpp"

using namespace condkin;

TEST_CASE("Gauss-Hermite rule integrates moments of exp(-x^2)") {
  GaussHermiteRule r = gauss_hermite(24);
  double s0 = 0.0, s2 = 0.0;
  for (int i = 0; i < 24; ++i) {
    s0 += r.weights[i];
    s2 += r.weights[i] * r.nodes[i] * r.nodes[i];
  }
  CHECK(s0 == doctest::Approx(std::sqrt(pi)).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(0.5 * std::sqrt(pi)).epsilon(1e-13));
}

TEST_CASE("1D overlap: analytic ground-state value") {
  double a = 1.664e-6;
  OverlapTensor1D t = overlap_1d(0, 6, a);
  CHECK(t.at(0, 0, 0) == doctest::Approx(1.0 / (a * std::sqrt(2.0 * pi))).epsilon(1e-13));
}

TEST_CASE("1D overlap: parity-odd entries are exactly zero") {
  OverlapTensor1D t = overlap_1d(0, 7, 2.0e-6);
  CHECK(t.at(1, 0, 0) == 0.0);
  for (int k = 0; k <= 7; ++k)
    for (int l = 0; l <= 7; ++l)
      for (int m = 0; m <= 7; ++m)
        if ((k + l + m) % 2 != 0) CHECK(t.at(k, l, m) == 0.0);
}

TEST_CASE("1D overlap: symmetric under k<->l bitwise") {
  OverlapTensor1D t = overlap_1d(1, 9, 0.8e-6);
  for (int k = 0; k <= 9; ++k)
    for (int l = 0; l <= 9; ++l)
      for (int m = 0; m <= 9; ++m) CHECK(t.at(k, l, m) == t.at(l, k, m));
}

TEST_CASE("1D overlap: tabulated values match direct quadrature to 1e-10") {
  double a = 1.3e-6;
  OverlapTensor1D t = overlap_1d(0, 12, a);

  CHECK(t.at(1, 1, 0) ==
        doctest::Approx(oracle::quadrature_overlap_1d(1, 1, 0, a)).epsilon(1e-10));

  std::mt19937 rng(777);
  std::uniform_int_distribution<int> pick(0, 12);
  int tested = 0;
  while (tested < 30) {
    int k = pick(rng), l = pick(rng), m = pick(rng);
    if ((k + l + m) % 2 != 0) continue;
    ++tested;
    double ref = oracle::quadrature_overlap_1d(k, l, m, a);
    CHECK(t.at(k, l, m) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("3D overlap factorization") {
  TrapConfig iso{2 * pi * 50, 2 * pi * 50, 2 * pi * 50, rb87_mass, 5.4e-9};
  OverlapSet s = build_overlaps(iso, {4, 4, 4});
  double a = oscillator_length(iso, 0);
  double one_d = 1.0 / (a * std::sqrt(2.0 * pi));

  CHECK(overlap_3d(s, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}) ==
        doctest::Approx(one_d * one_d * one_d).epsilon(1e-12));
  CHECK(overlap_3d(s, {1, 0, 0}, {0, 0, 0}, {0, 0, 0}) == 0.0);  // odd on x

  std::mt19937 rng(41);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    ModeIndex k{pick(rng), pick(rng), pick(rng)};
    ModeIndex l{pick(rng), pick(rng), pick(rng)};
    ModeIndex m{pick(rng), pick(rng), pick(rng)};
    CHECK(overlap_3d(s, k, l, m) == overlap_3d(s, l, k, m));
  }
}

TEST_CASE("3D overlap: out-of-range index is rejected") {
  TrapConfig iso{2 * pi * 50, 2 * pi * 50, 2 * pi * 50, rb87_mass, 5.4e-9};
  OverlapSet s = build_overlaps(iso, {2, 2, 2});
  CHECK_THROWS_AS(overlap_3d(s, {3, 0, 0}, {0, 0, 0}, {0, 0, 0}), std::out_of_range);
}
