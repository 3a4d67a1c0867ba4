#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "iontrap/spin.hpp"

using namespace iontrap;

namespace {

// closed-form two-level evolution under a constant transverse field:
// overlap of exp(-iHt)|psi0> with the drive-free evolution, H = w0/2 sz + eps sx
std::complex<double> static_overlap_oracle(double omega0, double eps, double t) {
  const double big_omega = std::sqrt(omega0 * omega0 + 4.0 * eps * eps);
  const double c = std::cos(0.5 * big_omega * t);
  const double s = std::sin(0.5 * big_omega * t);
  const double nx = 2.0 * eps / big_omega;
  const double nz = omega0 / big_omega;
  return {c * std::cos(0.5 * omega0 * t) + nz * s * std::sin(0.5 * omega0 * t),
          -nx * s * std::cos(0.5 * omega0 * t)};
}

// Simpson quadrature of |f|^2/omega0, the independent oracle for the closed form
double phase_by_quadrature(const TransverseDrive<double>& drive, double t, double omega0,
                           int panels = 20000) {
  const auto integrand = [&](double tau) { return drive.field(tau).squaredNorm(); };
  const double h = t / panels;
  double sum = integrand(0.0) + integrand(t);
  for (int k = 1; k < panels; ++k) sum += (k % 2 ? 4.0 : 2.0) * integrand(k * h);
  return sum * h / (3.0 * omega0);
}

}  // namespace

TEST_CASE("zero drive leaves the interaction-picture amplitudes fixed") {
  const auto s0 = SpinState<double>::equal_superposition();
  TransverseDrive<double> none;
  const auto s = evolve_exact(1e4, none, s0, 1.25, 50);
  CHECK(std::abs(s.amp_plus - s0.amp_plus) < 1e-15);
  CHECK(std::abs(s.amp_minus - s0.amp_minus) < 1e-15);
  CHECK(overlap(s0, s).real() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("static field matches the closed-form two-level solution") {
  const double omega0 = 1e4;
  const double eps = 100.0;  // r = 1e-2
  const auto s0 = SpinState<double>::equal_superposition();
  const auto drive = TransverseDrive<double>::constant(eps);
  std::vector<double> times;
  for (int k = 1; k <= 6; ++k) times.push_back(0.5 * omega0 / (eps * eps) * k);  // Phi up to 3
  const auto states = evolve_sampled(omega0, drive, s0, times, 200);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto ov = overlap(s0, states[k]);
    const auto oracle = static_overlap_oracle(omega0, eps, times[k]);
    CHECK(std::abs(ov - oracle) < 1e-8);
  }
}

TEST_CASE("norm drift is caught when the step is too coarse") {
  const double omega0 = 1e4;
  const auto drive = TransverseDrive<double>::constant(100.0);
  const auto s0 = SpinState<double>::equal_superposition();
  // 2.5e5 steps at 50/period drift to ~1e-7, beyond the 1e-9/1e6-step budget
  CHECK_THROWS_AS(evolve_exact(omega0, drive, s0, M_PI * omega0 / 1e4, 50), IntegrationError);
  CHECK_NOTHROW(evolve_exact(omega0, drive, s0, M_PI * omega0 / 1e4, 200));
}

TEST_CASE("step halving leaves the slow-sinusoid result stable") {
  const double omega0 = 1e4;
  const auto drive = TransverseDrive<double>::sinusoid_x(omega0 / 100.0, omega0 / 1000.0);
  const auto s0 = SpinState<double>::equal_superposition();
  const double t = 2.0 * M_PI;
  const auto a = evolve_exact(omega0, drive, s0, t, 200);
  const auto b = evolve_exact(omega0, drive, s0, t, 400);
  CHECK(std::abs(a.amp_plus - b.amp_plus) + std::abs(a.amp_minus - b.amp_minus) < 1e-6);
  CHECK(std::abs(a.norm() - 1.0) < 1e-9);
}

TEST_CASE("evolve argument checks") {
  const auto s0 = SpinState<double>::equal_superposition();
  TransverseDrive<double> none;
  CHECK_THROWS_AS(evolve_exact(0.0, none, s0, 1.0), std::domain_error);
  CHECK_THROWS_AS(evolve_exact(1e4, none, s0, -1.0), std::domain_error);
  CHECK_THROWS_AS(evolve_exact(1e4, none, s0, 1.0, 10), std::invalid_argument);
  TransverseDrive<double> bad;
  bad.components.push_back({{1.0, 0.0}, -2.0, 0.0});
  CHECK_THROWS_AS(evolve_exact(1e4, bad, s0, 1.0), std::domain_error);
}

TEST_CASE("dynamical phase closed forms") {
  const double omega0 = 1e4;
  TransverseDrive<double> none;
  CHECK(dynamical_phase(none, 5.0, omega0) == 0.0);

  const double eps = 3.0;
  const auto constant = TransverseDrive<double>::constant(eps);
  for (double t : {0.1, 2.0, 50.0})
    CHECK(dynamical_phase(constant, t, omega0) ==
          doctest::Approx(eps * eps * t / omega0).epsilon(1e-14));

  const double big_om = 7.0;
  const auto sine = TransverseDrive<double>::sinusoid_x(eps, big_om);
  for (double t : {0.3, 1.7, 12.0}) {
    const double expected =
        eps * eps / omega0 * (t / 2.0 + std::sin(2.0 * big_om * t) / (4.0 * big_om));
    CHECK(dynamical_phase(sine, t, omega0) == doctest::Approx(expected).epsilon(1e-13));
  }

  // cross terms: two sinusoids plus a constant offset, against quadrature
  TransverseDrive<double> mixed;
  mixed.components.push_back({{1.3, 0.4}, 2.1, 0.3});
  mixed.components.push_back({{-0.5, 0.9}, 5.7, -1.1});
  mixed.components.push_back({{0.2, -0.6}, 0.0, 0.0});
  for (double t : {0.9, 4.2}) {
    CHECK(dynamical_phase(mixed, t, omega0) ==
          doctest::Approx(phase_by_quadrature(mixed, t, omega0)).epsilon(1e-9));
  }

  CHECK_THROWS_AS(dynamical_phase(constant, -1.0, omega0), std::domain_error);
}

TEST_CASE("ideal overlap and slow amplitudes") {
  CHECK(ideal_overlap(0.0) == 1.0);
  CHECK(ideal_overlap(M_PI / 2.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ideal_overlap(M_PI) == doctest::Approx(-1.0).epsilon(1e-15));

  const auto s0 = SpinState<double>::equal_superposition();
  const auto s = predicted_slow_amplitudes(M_PI / 2.0, s0);
  CHECK(s.amp_plus.imag() == doctest::Approx(-s0.amp_plus.real()).epsilon(1e-15));
  CHECK(s.amp_minus.imag() == doctest::Approx(s0.amp_minus.real()).epsilon(1e-15));
  CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("adiabaticity diagnostics") {
  const double omega0 = 1e4;

  TransverseDrive<double> none;
  const auto rep0 = adiabaticity_check(none, omega0);
  CHECK(rep0.amplitude_ratio == 0.0);
  CHECK(rep0.slowness_ratio == 0.0);
  CHECK(std::isinf(rep0.breakdown_time));
  CHECK_FALSE(rep0.flagged);

  const auto constant = TransverseDrive<double>::constant(5.0);
  const auto repc = adiabaticity_check(constant, omega0);
  CHECK(std::isinf(repc.breakdown_time));
  CHECK(repc.slowness_ratio == 0.0);

  const double eps = 5.0, big_om = 20.0;
  const auto sine = TransverseDrive<double>::sinusoid_x(eps, big_om);
  const auto reps = adiabaticity_check(sine, omega0);
  CHECK(reps.amplitude_ratio == doctest::Approx(eps / omega0).epsilon(1e-14));
  CHECK(reps.slowness_ratio == doctest::Approx(big_om / omega0).epsilon(1e-14));
  CHECK(reps.breakdown_time ==
        doctest::Approx(omega0 * omega0 * omega0 / (eps * big_om * eps * big_om))
            .epsilon(1e-14));
  CHECK_FALSE(reps.flagged);

  const auto fast = TransverseDrive<double>::sinusoid_x(0.2 * omega0, big_om);
  CHECK(adiabaticity_check(fast, omega0).flagged);
}

TEST_CASE("static-field excess precession matches dPhi/dt") {
  // (sqrt(w0^2 + 4 eps^2) - w0)/2 vs eps^2/w0, to relative order (eps/w0)^2
  for (double r : {1e-2, 1e-3, 1e-4}) {
    const double omega0 = 1e4, eps = r * omega0;
    const double exact = 0.5 * (std::sqrt(omega0 * omega0 + 4.0 * eps * eps) - omega0);
    const double adiabatic = eps * eps / omega0;
    CHECK(std::abs(exact - adiabatic) / adiabatic < 2.0 * r * r);
  }
}

TEST_CASE("adiabatic overlap accuracy over a full phase sweep" * doctest::timeout(600)) {
  const double omega0 = 1e4;
  const auto s0 = SpinState<double>::equal_superposition();
  struct Case {
    double r;
    int spp;
  };
  for (const Case c : {Case{1e-2, 200}, Case{1e-3, 100}}) {
    const double eps = c.r * omega0;
    const auto drive = TransverseDrive<double>::constant(eps);
    std::vector<double> times;
    for (int k = 1; k <= 8; ++k)
      times.push_back(M_PI * omega0 / (eps * eps) * k / 8.0);  // Phi = pi k/8
    const auto states = evolve_sampled(omega0, drive, s0, times, c.spp);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double phi = dynamical_phase(drive, times[k], omega0);
      CHECK(std::abs(overlap(s0, states[k]).real() - ideal_overlap(phi)) <=
            10.0 * c.r * c.r);
    }
  }
}

TEST_CASE("slow sinusoid tracks cos Phi at the percent level") {
  const double omega0 = 1e4;
  const auto drive = TransverseDrive<double>::sinusoid_x(omega0 / 100.0, omega0 / 1000.0);
  const auto s0 = SpinState<double>::equal_superposition();
  std::vector<double> times;
  for (int k = 1; k <= 8; ++k) times.push_back(2.0 * M_PI * k / 8.0);  // Phi spans ~[0, pi]
  const auto states = evolve_sampled(omega0, drive, s0, times, 200);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double phi = dynamical_phase(drive, times[k], omega0);
    CHECK(std::abs(overlap(s0, states[k]).real() - std::cos(phi)) < 1e-2);
  }
}

TEST_CASE("rotating drive leaves a geometric phase residual") {
  const double omega0 = 1e4;
  const double eps = 100.0, big_om = 50.0;
  const double t = 1.0;
  const double residual_static =
      adiabatic_phase_residual(omega0, TransverseDrive<double>::constant(eps), t, 200);
  const double residual_circular =
      adiabatic_phase_residual(omega0, TransverseDrive<double>::circular(eps, big_om), t, 200);
  CHECK(std::abs(residual_static) < 1e-3);  // only the (eps/omega0)^2 corrections remain
  CHECK(std::abs(residual_circular) > 5.0 * std::abs(residual_static));
  CHECK(std::abs(residual_circular) < 0.05);  // far below the dynamical phase ~ 1
}
