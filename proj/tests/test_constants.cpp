#include <doctest.h>

#include <cmath>
#include <random>

#include "iontrap/constants.hpp"

using namespace iontrap;

TEST_CASE("codata literals carry at least 6 significant digits") {
  const auto pc = PhysicalConstants<double>::codata2018();
  CHECK(pc.hbar == doctest::Approx(1.054571817e-34).epsilon(1e-9));
  CHECK(pc.c == doctest::Approx(299792458.0).epsilon(1e-12));
  CHECK(pc.k_B == doctest::Approx(1.380649e-23).epsilon(1e-9));
  CHECK(pc.amu == doctest::Approx(1.66053906660e-27).epsilon(1e-9));
  CHECK_NOTHROW(pc.validate());

  PhysicalConstants<double> bad = pc;
  bad.c = 0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("gaussian squared charge") {
  const auto pc = PhysicalConstants<double>::codata2018();

  CHECK(gaussian_q2(pc, 0) == 0.0);

  // oracle: e^2/(4 pi eps0) recomputed here from the CODATA literals
  const double e = 1.602176634e-19;
  const double eps0 = 8.8541878128e-12;
  const double oracle = e * e / (4.0 * M_PI * eps0);
  CHECK(gaussian_q2(pc, 1) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(gaussian_q2(pc, 1) == doctest::Approx(2.307e-28).epsilon(1e-3));

  CHECK(gaussian_q2(pc, 2) == doctest::Approx(4.0 * gaussian_q2(pc, 1)).epsilon(1e-15));
  CHECK_THROWS_AS(gaussian_q2(pc, -1), std::domain_error);
}

TEST_CASE("trap length scale") {
  CHECK(trap_length_scale(1.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));

  const auto pc = PhysicalConstants<double>::codata2018();
  const auto ba = ba138(pc);
  CHECK(ba.mass == doctest::Approx(137.905 * pc.amu).epsilon(1e-12));
  CHECK(ba.charge_number == 1);

  const double omega_z = 2.0 * M_PI * 100e3;
  const double d0 = trap_length_scale(gaussian_q2(pc, 1), ba.mass, omega_z);
  CHECK(d0 == doctest::Approx(13.67e-6).epsilon(5e-3));  // quoted as 14 um
  CHECK(std::abs(d0 - 14e-6) / 14e-6 < 0.05);

  // power law: omega_z -> 4 omega_z divides d0 by 4^{2/3}
  const double d0_4 = trap_length_scale(gaussian_q2(pc, 1), ba.mass, 4.0 * omega_z);
  CHECK(d0_4 == doctest::Approx(d0 / std::pow(4.0, 2.0 / 3.0)).epsilon(1e-14));

  CHECK_THROWS_AS(trap_length_scale(0.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(trap_length_scale(1.0, -1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(trap_length_scale(1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("trap length scale properties") {
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> dist(0.1, 10.0);
  for (int k = 0; k < 50; ++k) {
    const double q2 = dist(gen), m = dist(gen), wz = dist(gen), lam = dist(gen);
    const double d0 = trap_length_scale(q2, m, wz);

    // homogeneity: q^2 -> lambda^3 q^2 scales d0 by lambda
    CHECK(trap_length_scale(lam * lam * lam * q2, m, wz) ==
          doctest::Approx(lam * d0).epsilon(1e-13));

    // round trip m omega_z^2 d0^3 = q^2
    CHECK(m * wz * wz * d0 * d0 * d0 == doctest::Approx(q2).epsilon(1e-14));
  }
}
