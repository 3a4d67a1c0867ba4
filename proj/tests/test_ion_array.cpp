#include <doctest.h>

#include <cmath>

#include "iontrap/ion_array.hpp"

using namespace iontrap;

namespace {

const PhysicalConstants<double> kPc = PhysicalConstants<double>::codata2018();

TrapConfig<double> ba_config(int n) {
  TrapConfig<double> cfg;
  cfg.n_ions = n;
  cfg.omega_z = 2.0 * M_PI * 100e3;
  cfg.omega_t = 2.0 * M_PI * 20e6;
  cfg.species = ba138(kPc);
  return cfg;
}

}  // namespace

TEST_CASE("single ion sits at the trap centre") {
  const auto arr = solve_equilibrium(ba_config(1), kPc);
  REQUIRE(arr.size() == 1);
  CHECK(std::abs(arr.positions_scaled[0]) < 1e-12);
  CHECK(longitudinal_mode_frequencies(arr)[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(spacings(arr), std::domain_error);
}

TEST_CASE("two and three ions match the analytic roots") {
  const double z2 = std::cbrt(0.25);
  const auto a2 = solve_equilibrium(ba_config(2), kPc);
  CHECK(a2.positions_scaled[0] == doctest::Approx(-z2).epsilon(1e-12));
  CHECK(a2.positions_scaled[1] == doctest::Approx(z2).epsilon(1e-12));

  const double u = std::cbrt(1.25);
  const auto a3 = solve_equilibrium(ba_config(3), kPc);
  CHECK(a3.positions_scaled[0] == doctest::Approx(-u).epsilon(1e-12));
  CHECK(std::abs(a3.positions_scaled[1]) < 1e-12);
  CHECK(a3.positions_scaled[2] == doctest::Approx(u).epsilon(1e-12));

  const auto sp2 = spacings(a2);
  CHECK(sp2.gaps.size() == 1);
  CHECK(sp2.s0 == doctest::Approx(2.0 * z2).epsilon(1e-12));
  CHECK(sp2.s0 == doctest::Approx(1.2599).epsilon(1e-4));

  const auto sp3 = spacings(a3);
  CHECK(sp3.gaps[0] == doctest::Approx(u).epsilon(1e-12));
  CHECK(sp3.gaps[1] == doctest::Approx(u).epsilon(1e-12));
  CHECK(sp3.s0 == doctest::Approx(1.07722).epsilon(1e-5));
}

TEST_CASE("invariants of the solved chain") {
  for (int n : {2, 5, 16, 51}) {
    SolveTrace<double> trace;
    const auto arr = solve_equilibrium(ba_config(n), kPc, {}, &trace);

    CHECK(arr.residual_gradient_norm <= 1e-12);

    for (Eigen::Index i = 1; i < arr.size(); ++i)
      CHECK(arr.positions_scaled[i] > arr.positions_scaled[i - 1]);

    // mirror antisymmetry
    for (Eigen::Index i = 0; i < arr.size(); ++i)
      CHECK(std::abs(arr.positions_scaled[i] + arr.positions_scaled[arr.size() - 1 - i]) <
            1e-9);

    // energy decreases across accepted iterates (within rounding)
    for (std::size_t k = 1; k < trace.energies.size(); ++k)
      CHECK(trace.energies[k] <=
            trace.energies[k - 1] + 1e-12 * std::max(1.0, std::abs(trace.energies[k - 1])));

    // the minimum gap sits at the centre
    const auto sp = spacings(arr);
    Eigen::Index argmin = 0;
    sp.gaps.minCoeff(&argmin);
    CHECK(std::abs(double(argmin) - double(n - 2) / 2.0) <= 0.5 + 1e-12);
    CHECK(sp.s0 <= sp.gaps.mean());
  }
}

TEST_CASE("equilibrium does not depend on the seed") {
  const int n = 40;
  const auto cfg = ba_config(n);
  const auto from_continuum = solve_equilibrium(cfg, kPc);
  const auto from_uniform = solve_equilibrium_from(uniform_seed<double>(n), cfg, kPc);
  const auto prev = solve_equilibrium(ba_config(n - 1), kPc);
  const auto from_extended =
      solve_equilibrium_from(extended_seed(prev.positions_scaled), cfg, kPc);

  CHECK((from_uniform.positions_scaled - from_continuum.positions_scaled)
            .cwiseAbs()
            .maxCoeff() < 1e-8);
  CHECK((from_extended.positions_scaled - from_continuum.positions_scaled)
            .cwiseAbs()
            .maxCoeff() < 1e-8);
}

TEST_CASE("degenerate starts are split before relaxing") {
  const auto cfg = ba_config(4);
  VectorX<double> coincident = VectorX<double>::Zero(4);
  const auto arr = solve_equilibrium_from(coincident, cfg, kPc);
  const auto ref = solve_equilibrium(cfg, kPc);
  CHECK((arr.positions_scaled - ref.positions_scaled).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("mode spectrum") {
  const auto a2 = solve_equilibrium(ba_config(2), kPc);
  const auto m2 = longitudinal_mode_frequencies(a2);
  CHECK(m2[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m2[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

  const auto a3 = solve_equilibrium(ba_config(3), kPc);
  const auto m3 = longitudinal_mode_frequencies(a3);
  CHECK(m3[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m3[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(m3[2] == doctest::Approx(std::sqrt(29.0 / 5.0)).epsilon(1e-12));

  // centre-of-mass mode pinned at omega_z for larger chains
  for (int n : {5, 10, 50}) {
    const auto modes = longitudinal_mode_frequencies(solve_equilibrium(ba_config(n), kPc));
    CHECK(std::abs(modes[0] - 1.0) < 1e-8);
    for (Eigen::Index i = 1; i < modes.size(); ++i) CHECK(modes[i] > modes[i - 1]);
  }
}

TEST_CASE("solver error paths") {
  TrapConfig<double> bad = ba_config(0);
  CHECK_THROWS_AS(solve_equilibrium(bad, kPc), std::domain_error);

  // too few iterations from a poor seed
  SolveOptions<double> strict;
  strict.max_iter = 1;
  try {
    solve_equilibrium_from(uniform_seed<double>(50), ba_config(50), kPc, strict);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }

  CHECK_THROWS_AS(solve_equilibrium(ba_config(2), kPc, {0.0, 200}), std::invalid_argument);
}

TEST_CASE("linear regime advisory flag") {
  auto cfg = ba_config(10);
  CHECK_FALSE(cfg.linear_regime_flagged());  // omega_t / omega_z = 200
  cfg.omega_t = 5.0 * cfg.omega_z;
  CHECK(cfg.linear_regime_flagged());
  CHECK_NOTHROW(cfg.validate());  // advisory, not an error
}

TEST_CASE("large chains track the fluid-model minimum gap" * doctest::timeout(300)) {
  // exact minimum gap over the fluid prediction stays within 5% up to N=1000,
  // and the length-weighted mean spacing scales as N^{-2/3} ln N
  std::vector<int> ns = {100, 200, 300, 500, 800, 1000};
  std::vector<double> mean_weighted;
  for (const int n : ns) {
    const auto arr = solve_equilibrium(ba_config(n), kPc, {1e-11, 200});
    const auto sp = spacings(arr);
    const double dubin = min_spacing<double>(n, ContinuumModel::DubinFluid);
    const double ratio = sp.s0 / dubin;
    CHECK(ratio > 0.95);
    CHECK(ratio < 1.05);
    mean_weighted.push_back(sp.gaps.squaredNorm() / sp.gaps.sum());
  }

  // two-parameter fit quality: the ln N basis must beat the bare power law
  const auto rms_residual = [&](bool with_log) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      double basis = std::pow(double(ns[i]), -2.0 / 3.0);
      if (with_log) basis *= std::log(double(ns[i]));
      num += mean_weighted[i] * basis;
      den += basis * basis;
    }
    const double c = num / den;
    double ss = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      double basis = std::pow(double(ns[i]), -2.0 / 3.0);
      if (with_log) basis *= std::log(double(ns[i]));
      ss += std::pow(mean_weighted[i] - c * basis, 2);
    }
    return std::sqrt(ss / double(ns.size()));
  };
  CHECK(rms_residual(true) < rms_residual(false));
}
