#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "iontrap/constants.hpp"
#include "iontrap/continuum.hpp"
#include "iontrap/ion_array.hpp"
#include "iontrap/sums.hpp"

namespace iontrap {

/// Optical transition of the qubit. multipole_a = 1 for electric dipole (E1),
/// 2 for quadrupole (E2); the perturbation from a displaced neighbour falls
/// off as r^{-(a+2)}.
template <class Scalar = double>
struct TransitionSpec {
  int multipole_a = 2;
  Scalar omega_0 = Scalar(0);           // rad/s
  Scalar tau_s = Scalar(0);             // s, spontaneous decay time
  Scalar coupling_constant = Scalar(1); // order-one knob for the d_a^2 proportionality

  void validate() const {
    if (multipole_a != 1 && multipole_a != 2)
      throw std::domain_error("TransitionSpec: multipole_a must be 1 (E1) or 2 (E2)");
    if (!(omega_0 > Scalar(0)) || !(tau_s > Scalar(0)) || !(coupling_constant > Scalar(0)))
      throw std::domain_error("TransitionSpec: omega_0, tau_s, coupling must be positive");
  }

  Scalar k0(const PhysicalConstants<Scalar>& pc) const { return omega_0 / pc.c; }

  /// 138Ba+ 6s S1/2 <-> 5d D5/2 quadrupole line: omega_0 = 2 pi 1.7e14 rad/s,
  /// tau_s = 35 s.
  static TransitionSpec ba138_quadrupole() {
    TransitionSpec t;
    t.multipole_a = 2;
    t.omega_0 = Scalar(2) * pi_v<Scalar> * Scalar(1.7e14);
    t.tau_s = Scalar(35);
    return t;
  }
};

/// Squared a-pole matrix element, d_a^2 = coupling * hbar / (tau_s k0^{2a+1}).
template <class Scalar>
Scalar coupling_d2(const TransitionSpec<Scalar>& spec, const PhysicalConstants<Scalar>& pc) {
  spec.validate();
  return spec.coupling_constant * pc.hbar / (spec.tau_s * ipow(spec.k0(pc), 2 * spec.multipole_a + 1));
}

/// Mode-occupation factor coth(hbar omega_t / 2 k_B T); 1 at T = 0.
template <class Scalar>
Scalar thermal_factor(Scalar omega_t, Scalar temperature, const PhysicalConstants<Scalar>& pc) {
  if (!(temperature >= Scalar(0)))
    throw std::domain_error("thermal_factor: temperature must be non-negative");
  if (temperature == Scalar(0)) return Scalar(1);
  using std::tanh;
  return Scalar(1) / tanh(pc.hbar * omega_t / (Scalar(2) * pc.k_B * temperature));
}

namespace detail {

/// q^2 d_a^2 coth(...) / (2 pi hbar m omega_0 omega_t) -- multiplies the SI
/// lattice sum S_{2a+4} to give a per-ion rate.
template <class Scalar>
Scalar rate_prefactor(const TransitionSpec<Scalar>& spec, const TrapConfig<Scalar>& config,
                      const PhysicalConstants<Scalar>& pc) {
  const Scalar q2 = gaussian_q2(pc, config.species.charge_number);
  return q2 * coupling_d2(spec, pc) *
         thermal_factor(config.omega_t, config.temperature, pc) /
         (Scalar(2) * pi_v<Scalar> * pc.hbar * config.species.mass * spec.omega_0 *
          config.omega_t);
}

}  // namespace detail

/// Dephasing rate of ion i, tau_i^{-1} = prefactor * S_{2a+4}(i) in SI units.
template <class Scalar>
Scalar per_ion_rate(Eigen::Index i, const IonArray<Scalar>& array,
                    const TransitionSpec<Scalar>& spec, const TrapConfig<Scalar>& config,
                    const PhysicalConstants<Scalar>& pc) {
  const int n = 2 * spec.multipole_a + 4;
  const Scalar sum_si = s_n_exact(array, i, n) / ipow(array.d0, n);
  return detail::rate_prefactor(spec, config, pc) * sum_si;
}

template <class Scalar>
VectorX<Scalar> per_ion_rates(const IonArray<Scalar>& array, const TransitionSpec<Scalar>& spec,
                              const TrapConfig<Scalar>& config,
                              const PhysicalConstants<Scalar>& pc) {
  VectorX<Scalar> rates(array.size());
  for (Eigen::Index i = 0; i < array.size(); ++i)
    rates[i] = per_ion_rate(i, array, spec, config, pc);
  return rates;
}

/// Whole-chain rate: tau_vib^{-2} = sum_i tau_i^{-2}.
template <class Scalar>
Scalar total_vib_rate_from(const VectorX<Scalar>& rates) {
  std::vector<Scalar> squares(static_cast<std::size_t>(rates.size()));
  for (Eigen::Index i = 0; i < rates.size(); ++i)
    squares[static_cast<std::size_t>(i)] = rates[i] * rates[i];
  using std::sqrt;
  return sqrt(sum_descending(squares));
}

template <class Scalar>
Scalar total_vib_rate(const IonArray<Scalar>& array, const TransitionSpec<Scalar>& spec,
                      const TrapConfig<Scalar>& config, const PhysicalConstants<Scalar>& pc) {
  return total_vib_rate_from(per_ion_rates(array, spec, config, pc));
}

/// Continuum estimates of tau_vib^{-1}. The three paths agree on the constant
/// conventions: ClosedForm9 and ClosedForm11 are the same expression written
/// in different variables (identical to machine precision); SumPipeline keeps
/// the 2 zeta(2a+4) sqrt(T_{4a+8}) chain explicit.
enum class RatePath { ClosedForm9, ClosedForm11, SumPipeline };

template <class Scalar>
Scalar vib_rate_continuum(int n_ions, const TransitionSpec<Scalar>& spec,
                          const TrapConfig<Scalar>& config, const PhysicalConstants<Scalar>& pc,
                          ContinuumModel model, RatePath path) {
  if (n_ions < 2) throw std::domain_error("vib_rate_continuum: need at least 2 ions");
  spec.validate();
  using std::sqrt;
  const int a = spec.multipole_a;
  const Scalar d0 = config.d0(pc);
  const Scalar s0 = min_spacing<Scalar>(n_ions, model) * d0;  // SI
  const Scalar th = thermal_factor(config.omega_t, config.temperature, pc);
  switch (path) {
    case RatePath::ClosedForm9:
      return sqrt(Scalar(n_ions)) * gaussian_q2(pc, config.species.charge_number) *
             coupling_d2(spec, pc) * th /
             (Scalar(2) * pi_v<Scalar> * pc.hbar * config.species.mass * spec.omega_0 *
              config.omega_t * ipow(s0, 2 * a + 4));
    case RatePath::ClosedForm11: {
      const Scalar k0 = spec.k0(pc);
      return spec.coupling_constant * th / (Scalar(2) * pi_v<Scalar>) *
             sqrt(Scalar(n_ions)) / spec.tau_s * ipow(d0 / s0, 3) *
             (config.omega_z * config.omega_z) / (spec.omega_0 * config.omega_t) /
             ipow(k0 * s0, 2 * a + 1);
    }
    case RatePath::SumPipeline: {
      const int m = 4 * a + 8;
      const Scalar t_si =
          t_n_continuum<Scalar>(n_ions, m, model, TnForm::Asymptotic) / ipow(d0, m);
      return detail::rate_prefactor(spec, config, pc) *
             Scalar(2) * riemann_zeta_int<Scalar>(2 * a + 4) * sqrt(t_si);
    }
  }
  throw std::logic_error("vib_rate_continuum: unknown path");
}

/// Spontaneous-emission window: 2 tau_s / N with N/2 ions excited on average.
/// The factor 2 can be dropped for the more conservative tau_s / N bound.
template <class Scalar>
Scalar radiative_window(int n_ions, Scalar tau_s, bool factor_two = true) {
  if (n_ions < 1) throw std::domain_error("radiative_window: need at least one ion");
  if (!(tau_s > Scalar(0))) throw std::domain_error("radiative_window: tau_s must be positive");
  return (factor_two ? Scalar(2) : Scalar(1)) * tau_s / Scalar(n_ions);
}

/// Rates add: t_dec = (tau_rad^{-1} + tau_vib^{-1})^{-1}.
template <class Scalar>
Scalar combined_decoherence(Scalar tau_vib, Scalar tau_rad) {
  if (!(tau_vib > Scalar(0)) || !(tau_rad > Scalar(0)))
    throw std::domain_error("combined_decoherence: times must be positive");
  return Scalar(1) / (Scalar(1) / tau_vib + Scalar(1) / tau_rad);
}

template <class Scalar = double>
struct FidelityPoint {
  Scalar exact = Scalar(1);     // prod_i cos^2(t / tau_i)
  Scalar gaussian = Scalar(1);  // exp(-t^2 / tau_vib^2)
};

template <class Scalar>
FidelityPoint<Scalar> fidelity_profile(Scalar t, const VectorX<Scalar>& rates) {
  if (!(t >= Scalar(0))) throw std::domain_error("fidelity_profile: t must be non-negative");
  using std::cos;
  using std::exp;
  FidelityPoint<Scalar> p;
  Scalar sum_sq = Scalar(0);
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    const Scalar c = cos(t * rates[i]);
    p.exact *= c * c;
    sum_sq += rates[i] * rates[i];
  }
  p.gaussian = exp(-t * t * sum_sq);
  return p;
}

template <class Scalar = double>
struct DecoherenceReport {
  int n_ions = 0;
  ContinuumModel model = ContinuumModel::DubinFluid;
  VectorX<Scalar> per_ion_rates;  // 1/s; empty when built from a continuum path
  Scalar tau_vib = Scalar(0);     // s
  Scalar tau_rad = Scalar(0);     // s
  Scalar t_dec = Scalar(0);       // s
  Scalar d0 = Scalar(0);          // m
  Scalar s0_exact = std::numeric_limits<Scalar>::quiet_NaN();  // m
  Scalar s0_model = Scalar(0);    // m
};

template <class Scalar>
DecoherenceReport<Scalar> report_exact(const IonArray<Scalar>& array,
                                       const TransitionSpec<Scalar>& spec,
                                       const TrapConfig<Scalar>& config,
                                       const PhysicalConstants<Scalar>& pc,
                                       ContinuumModel model = ContinuumModel::DubinFluid,
                                       bool radiative_factor_two = true) {
  DecoherenceReport<Scalar> r;
  r.n_ions = static_cast<int>(array.size());
  r.model = model;
  r.per_ion_rates = per_ion_rates(array, spec, config, pc);
  r.tau_vib = Scalar(1) / total_vib_rate_from(r.per_ion_rates);
  r.tau_rad = radiative_window(r.n_ions, spec.tau_s, radiative_factor_two);
  r.t_dec = combined_decoherence(r.tau_vib, r.tau_rad);
  r.d0 = array.d0;
  r.s0_exact = spacings(array).s0 * array.d0;
  r.s0_model = min_spacing<Scalar>(r.n_ions, model) * array.d0;
  return r;
}

template <class Scalar>
DecoherenceReport<Scalar> report_continuum(const TransitionSpec<Scalar>& spec,
                                           const TrapConfig<Scalar>& config,
                                           const PhysicalConstants<Scalar>& pc,
                                           ContinuumModel model = ContinuumModel::DubinFluid,
                                           RatePath path = RatePath::SumPipeline,
                                           bool radiative_factor_two = true) {
  DecoherenceReport<Scalar> r;
  r.n_ions = config.n_ions;
  r.model = model;
  r.tau_vib = Scalar(1) / vib_rate_continuum(config.n_ions, spec, config, pc, model, path);
  r.tau_rad = radiative_window(r.n_ions, spec.tau_s, radiative_factor_two);
  r.t_dec = combined_decoherence(r.tau_vib, r.tau_rad);
  r.d0 = config.d0(pc);
  r.s0_model = min_spacing<Scalar>(r.n_ions, model) * r.d0;
  return r;
}

// ---------------------------------------------------------------------------
// N-scaling sweeps
// ---------------------------------------------------------------------------

enum class SweepRegime { FixedS0, FixedOmegaZ };
enum class SweepPath { Exact, Continuum };

template <class Scalar = double>
struct SweepOptions {
  SweepRegime regime = SweepRegime::FixedOmegaZ;
  SweepPath path = SweepPath::Continuum;
  ContinuumModel model = ContinuumModel::DubinFluid;
  int exact_n_cap = 2000;  // dense-Hessian cost guard for the exact path
  bool radiative_factor_two = true;
  SolveOptions<Scalar> solve{Scalar(1e-10), 200};
};

template <class Scalar = double>
struct SweepPoint {
  int n_ions = 0;
  Scalar omega_z = Scalar(0);      // rad/s (softened per N in the FixedS0 regime)
  Scalar s0 = Scalar(0);           // m (exact minimum gap on the exact path)
  Scalar tau_vib_inv = Scalar(0);  // 1/s, physical rate at this configuration
  Scalar tau_rad_inv = Scalar(0);  // 1/s
  Scalar t_dec = Scalar(0);        // s
  Scalar fit_observable = Scalar(0);  // rate referred to the base stiffness
};

template <class Scalar = double>
struct SweepResult {
  std::vector<SweepPoint<Scalar>> points;
  Scalar fitted_exponent = Scalar(0);
  Scalar fit_residual_rms = Scalar(0);
};

namespace detail {

template <class Scalar>
void fit_log_slope(const std::vector<Scalar>& x, const std::vector<Scalar>& y, Scalar& slope,
                   Scalar& residual_rms) {
  const auto n = static_cast<Scalar>(x.size());
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const Scalar intercept = (sy - slope * sx) / n;
  Scalar ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Scalar r = y[i] - slope * x[i] - intercept;
    ss += r * r;
  }
  using std::sqrt;
  residual_rms = sqrt(ss / n);
}

}  // namespace detail

/// Sweeps tau_vib^{-1} over chain sizes under one of two operating regimes.
///
/// FixedOmegaZ holds the trap frequencies; the minimum spacing then shrinks
/// with N. FixedS0 softens omega_z per N so the model minimum spacing stays at
/// the base configuration's value; its scaling law is conventionally quoted at
/// the reference stiffness, so the fitted observable rescales the physical
/// rate by (omega_z_ref / omega_z(N))^2. The exponent fit divides out the
/// regime's logarithmic correction before taking the log-log slope.
template <class Scalar>
SweepResult<Scalar> scaling_sweep(const std::vector<int>& n_list,
                                  const TransitionSpec<Scalar>& spec,
                                  const TrapConfig<Scalar>& base_config,
                                  const PhysicalConstants<Scalar>& pc,
                                  const SweepOptions<Scalar>& opts) {
  if (n_list.empty()) throw std::invalid_argument("scaling_sweep: empty n_list");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 10) throw std::invalid_argument("scaling_sweep: every N must be >= 10");
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("scaling_sweep: n_list must be strictly ascending");
  }
  base_config.validate();
  spec.validate();

  using std::log;
  using std::pow;
  using std::sqrt;
  const Scalar q2 = gaussian_q2(pc, base_config.species.charge_number);
  const Scalar mass = base_config.species.mass;
  const Scalar omega_z_ref = base_config.omega_z;
  const Scalar d0_ref = base_config.d0(pc);
  const Scalar s0_base =
      min_spacing<Scalar>(base_config.n_ions, opts.model) * d0_ref;  // FixedS0 pin, SI

  SweepResult<Scalar> result;
  std::vector<Scalar> xs, ys;
  for (const int n : n_list) {
    TrapConfig<Scalar> cfg = base_config;
    cfg.n_ions = n;
    if (opts.regime == SweepRegime::FixedS0) {
      const Scalar d0_n = s0_base / min_spacing<Scalar>(n, opts.model);
      cfg.omega_z = sqrt(q2 / (mass * ipow(d0_n, 3)));
    }

    SweepPoint<Scalar> pt;
    pt.n_ions = n;
    pt.omega_z = cfg.omega_z;
    if (opts.path == SweepPath::Exact) {
      if (n > opts.exact_n_cap)
        throw std::domain_error(
            "scaling_sweep: exact path refused for N > " + std::to_string(opts.exact_n_cap) +
            " (dense-Hessian cost); raise exact_n_cap or use the continuum path");
      const IonArray<Scalar> array = solve_equilibrium(cfg, pc, opts.solve);
      pt.tau_vib_inv = total_vib_rate(array, spec, cfg, pc);
      pt.s0 = spacings(array).s0 * array.d0;
    } else {
      pt.tau_vib_inv = vib_rate_continuum(n, spec, cfg, pc, opts.model, RatePath::SumPipeline);
      pt.s0 = min_spacing<Scalar>(n, opts.model) * cfg.d0(pc);
    }
    pt.tau_rad_inv = Scalar(1) / radiative_window(n, spec.tau_s, opts.radiative_factor_two);
    pt.t_dec = combined_decoherence(Scalar(1) / pt.tau_vib_inv, Scalar(1) / pt.tau_rad_inv);

    const Scalar stiffness_scale = opts.regime == SweepRegime::FixedS0
                                       ? (omega_z_ref * omega_z_ref) / (cfg.omega_z * cfg.omega_z)
                                       : Scalar(1);
    pt.fit_observable = pt.tau_vib_inv * stiffness_scale;

    const Scalar log_correction =
        opts.regime == SweepRegime::FixedS0
            ? log(Scalar(n))
            : pow(log(dubin_log_constant<Scalar>() * Scalar(n)),
                  Scalar(2 * spec.multipole_a + 4) / Scalar(3));
    xs.push_back(log(Scalar(n)));
    ys.push_back(log(pt.fit_observable * log_correction));
    result.points.push_back(pt);
  }

  if (result.points.size() >= 2) {
    detail::fit_log_slope(xs, ys, result.fitted_exponent, result.fit_residual_rms);
  }
  return result;
}

}  // namespace iontrap
