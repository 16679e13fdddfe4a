#include <doctest.h>

#include <cmath>

#include "condkin/constants.hpp"
#include "condkin/trap.hpp"

using namespace condkin;

namespace {

TrapConfig isotropic(double f_hz) {
  return {2 * pi * f_hz, 2 * pi * f_hz, 2 * pi * f_hz, rb87_mass, 5.4e-9};
}

TrapConfig paper_trap() {
  return {2 * pi * 42.0, 2 * pi * 42.0, 2 * pi * 120.0, rb87_mass, 5.4e-9};
}

}  // namespace

TEST_CASE("mode enumeration: first excited shell of the isotropic trap") {
  TrapConfig c = isotropic(50.0);
  TrapSpectrum s = enumerate_modes(c, 1.5 * hbar * c.omega_x);
  REQUIRE(s.size() == 3);
  CHECK(s.modes[0] == ModeIndex{1, 0, 0});
  CHECK(s.modes[1] == ModeIndex{0, 1, 0});
  CHECK(s.modes[2] == ModeIndex{0, 0, 1});
}

TEST_CASE("mode enumeration: paper trap below 130 Hz") {
  TrapSpectrum s = enumerate_modes(paper_trap(), hbar * 2 * pi * 130.0);
  REQUIRE(s.size() == 6);
  CHECK(s.modes[0] == ModeIndex{1, 0, 0});
  CHECK(s.modes[1] == ModeIndex{0, 1, 0});
  CHECK(s.modes[2] == ModeIndex{2, 0, 0});
  CHECK(s.modes[3] == ModeIndex{1, 1, 0});
  CHECK(s.modes[4] == ModeIndex{0, 2, 0});
  CHECK(s.modes[5] == ModeIndex{0, 0, 1});
}

TEST_CASE("mode enumeration: cutoff below the first gap gives no modes") {
  TrapConfig c = isotropic(50.0);
  TrapSpectrum s = enumerate_modes(c, 0.5 * hbar * c.omega_x);
  CHECK(s.size() == 0);
}

TEST_CASE("mode enumeration: hard mode limit raises a resource error naming the count") {
  TrapConfig c = isotropic(50.0);
  CHECK_THROWS_AS(enumerate_modes(c, 20.0 * hbar * c.omega_x, 5), ResourceLimitError);
  try {
    enumerate_modes(c, 20.0 * hbar * c.omega_x, 5);
  } catch (const ResourceLimitError& e) {
    CHECK(std::string(e.what()).find("6") != std::string::npos);
  }
}

TEST_CASE("mode enumeration: energies sorted, stored bit-exact, cutoff complete") {
  TrapConfig c{2 * pi * 37.0, 2 * pi * 61.0, 2 * pi * 113.0, rb87_mass, 5.4e-9};
  double cutoff = hbar * 2 * pi * 700.0;
  TrapSpectrum s = enumerate_modes(c, cutoff);
  REQUIRE(s.size() > 0);

  for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(s.energies[i] <= s.energies[i + 1]);
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(s.energies[i] == single_particle_energy(c, s.modes[i]));  // bit-for-bit

  // brute-force box scan finds no in-cutoff mode missing from the list
  double eps_max = s.epsilon0 + cutoff;
  int box = static_cast<int>(cutoff / (hbar * c.omega_x)) + 2;
  std::size_t found = 0;
  for (int kx = 0; kx <= box; ++kx)
    for (int ky = 0; ky <= box; ++ky)
      for (int kz = 0; kz <= box; ++kz) {
        ModeIndex k{kx, ky, kz};
        if (k.is_condensate()) continue;
        if (single_particle_energy(c, k) > eps_max) continue;
        ++found;
        bool present = false;
        for (const auto& m : s.modes)
          if (m == k) present = true;
        CHECK(present);
      }
  CHECK(found == s.size());
}

TEST_CASE("single-particle energies") {
  TrapConfig iso = isotropic(80.0);
  CHECK(single_particle_energy(iso, {0, 0, 0}) ==
        doctest::Approx(1.5 * hbar * iso.omega_x).epsilon(1e-15));

  TrapConfig p = paper_trap();
  CHECK(single_particle_energy(p, {1, 0, 0}) ==
        doctest::Approx(hbar * 2 * pi * 144.0).epsilon(1e-14));
  CHECK(single_particle_energy(p, {0, 0, 2}) ==
        doctest::Approx(hbar * 2 * pi * 342.0).epsilon(1e-14));
}

TEST_CASE("critical temperature of the paper scenario") {
  double tc = critical_temperature(paper_trap(), 200);
  CHECK(tc == doctest::Approx(1.5731e-8).epsilon(2e-4));  // ~15.7 nK

  double omega_bar = std::cbrt(paper_trap().omega_x * paper_trap().omega_y *
                               paper_trap().omega_z);
  CHECK(critical_temperature(paper_trap(), 1) ==
        doctest::Approx(hbar * omega_bar * std::cbrt(1.0 / zeta3) / k_boltzmann)
            .epsilon(1e-14));

  TrapConfig twice = paper_trap();
  twice.omega_x *= 2.0;
  twice.omega_y *= 2.0;
  twice.omega_z *= 2.0;
  CHECK(critical_temperature(twice, 200) ==
        doctest::Approx(2.0 * tc).epsilon(1e-12));
}

TEST_CASE("diluteness report") {
  TrapConfig ideal = paper_trap();
  ideal.scattering_length = 0.0;
  DilutenessReport r0 = diluteness_report(ideal, 200, 1e-8);
  CHECK(r0.a_rho_third == 0.0);
  CHECK(r0.dilute);

  DilutenessReport r = diluteness_report(paper_trap(), 200, 1e-8);
  CHECK(r.a_rho_third > 0.0);
  CHECK(r.a_rho_third < 0.1);
  CHECK(r.a_rho_third == doctest::Approx(0.01276).epsilon(1e-2));
  CHECK(r.dilute);

  TrapConfig strong = paper_trap();
  strong.scattering_length *= 1000.0;
  CHECK_FALSE(diluteness_report(strong, 200, 1e-8).dilute);
}

TEST_CASE("trap config validation") {
  TrapConfig c = paper_trap();
  c.omega_y = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(enumerate_modes(c, 1e-30), ConfigError);
  TrapConfig m = paper_trap();
  m.mass = 0.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}
