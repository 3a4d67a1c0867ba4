#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "iontrap/constants.hpp"
#include "iontrap/continuum.hpp"
#include "iontrap/errors.hpp"
#include "iontrap/summation.hpp"

namespace iontrap {

template <class Scalar = double>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar = double>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar = double>
struct TrapConfig {
  int n_ions = 1;
  Scalar omega_z = Scalar(0);  // rad/s
  Scalar omega_t = Scalar(0);  // rad/s
  IonSpecies<Scalar> species;
  Scalar temperature = Scalar(0);  // K
  Scalar linear_regime_threshold = Scalar(10);

  void validate() const {
    if (n_ions < 1) throw std::domain_error("TrapConfig: need at least one ion");
    if (!(omega_z > Scalar(0)) || !(omega_t > Scalar(0)))
      throw std::domain_error("TrapConfig: trap frequencies must be positive");
    if (!(temperature >= Scalar(0)))
      throw std::domain_error("TrapConfig: temperature must be non-negative");
    species.validate();
  }

  /// Advisory, not an error: the fluid structure laws assume omega_t >> omega_z.
  bool linear_regime_flagged() const {
    return omega_t < linear_regime_threshold * omega_z;
  }

  Scalar d0(const PhysicalConstants<Scalar>& pc) const {
    return trap_length_scale(gaussian_q2(pc, species.charge_number), species.mass, omega_z);
  }
};

/// Equilibrium chain. Positions are dimensionless (units of d0), strictly
/// increasing and mirror-antisymmetric about the trap centre.
template <class Scalar = double>
struct IonArray {
  VectorX<Scalar> positions_scaled;
  Scalar d0 = Scalar(1);  // m
  Scalar residual_gradient_norm = Scalar(0);

  Eigen::Index size() const { return positions_scaled.size(); }
  VectorX<Scalar> positions_si() const { return positions_scaled * d0; }
};

// ---------------------------------------------------------------------------
// Dimensionless chain potential U(z) = sum_i z_i^2/2 + sum_{i<j} 1/(z_j - z_i)
// ---------------------------------------------------------------------------

template <class Derived>
typename Derived::Scalar chain_energy(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = z.size();
  CompensatedSum<Scalar> acc;
  for (Eigen::Index i = 0; i < n; ++i) acc.add(Scalar(0.5) * z[i] * z[i]);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) acc.add(Scalar(1) / (z[j] - z[i]));
  return acc.value();
}

/// Gradient of U. Coulomb terms are accumulated nearest-neighbour first with
/// compensation: the two half-chain sums nearly cancel against z_i near
/// equilibrium, so the summation itself must not add error on top of the
/// unavoidable per-term rounding.
template <class Derived>
VectorX<typename Derived::Scalar> chain_gradient(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = z.size();
  VectorX<Scalar> g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    CompensatedSum<Scalar> acc;
    acc.add(z[i]);
    for (Eigen::Index k = 1; k < n; ++k) {
      const bool left = i - k >= 0;
      const bool right = i + k < n;
      if (left) {
        const Scalar d = z[i] - z[i - k];
        acc.add(Scalar(-1) / (d * d));
      }
      if (right) {
        const Scalar d = z[i + k] - z[i];
        acc.add(Scalar(1) / (d * d));
      }
      if (!left && !right) break;
    }
    g[i] = acc.value();
  }
  return g;
}

/// Hessian of U. The diagonal is built from the off-diagonal row sums, so the
/// matrix annihilates uniform translations up to the trap term exactly: the
/// centre-of-mass eigenvalue is 1 in floating point, not just analytically.
template <class Derived>
MatrixX<typename Derived::Scalar> chain_hessian(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = z.size();
  MatrixX<Scalar> h = MatrixX<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar d = z[j] - z[i];
      const Scalar w = Scalar(-2) / (d * d * d);
      h(i, j) = w;
      h(j, i) = w;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    CompensatedSum<Scalar> acc;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) acc.add(-h(i, j));
    h(i, i) = Scalar(1) + acc.value();
  }
  return h;
}

// ---------------------------------------------------------------------------
// Initial guesses
// ---------------------------------------------------------------------------

/// Seed from the continuum cumulative count: ion i goes where n(z) = i + 1/2.
template <class Scalar = double>
VectorX<Scalar> continuum_seed(int n_ions) {
  if (n_ions < 1) throw std::domain_error("continuum_seed: need at least one ion");
  VectorX<Scalar> z(n_ions);
  if (n_ions == 1) {
    z[0] = Scalar(0);
    return z;
  }
  const Scalar L = half_length<Scalar>(n_ions, ContinuumModel::DubinFluid);
  for (int i = 0; i < n_ions; ++i) {
    const Scalar target = (Scalar(i) + Scalar(0.5)) / Scalar(n_ions);
    Scalar lo = Scalar(-1), hi = Scalar(1);
    for (int it = 0; it < 80; ++it) {
      const Scalar mid = (lo + hi) / Scalar(2);
      const Scalar val = (Scalar(2) + Scalar(3) * mid - mid * mid * mid) / Scalar(4);
      (val < target ? lo : hi) = mid;
    }
    z[i] = (lo + hi) / Scalar(2) * L;
  }
  return z;
}

/// Equally spaced seed spanning the DubinFluid extent.
template <class Scalar = double>
VectorX<Scalar> uniform_seed(int n_ions) {
  if (n_ions < 1) throw std::domain_error("uniform_seed: need at least one ion");
  VectorX<Scalar> z(n_ions);
  if (n_ions == 1) {
    z[0] = Scalar(0);
    return z;
  }
  const Scalar L = half_length<Scalar>(n_ions, ContinuumModel::DubinFluid);
  for (int i = 0; i < n_ions; ++i)
    z[i] = -L + Scalar(2) * L * Scalar(i) / Scalar(n_ions - 1);
  return z;
}

/// Seed for N+1 ions from a solved N-ion chain: append one ion past the end
/// at the last gap, then recentre.
template <class Scalar>
VectorX<Scalar> extended_seed(const VectorX<Scalar>& previous) {
  const Eigen::Index m = previous.size();
  if (m < 1) throw std::domain_error("extended_seed: empty chain");
  VectorX<Scalar> z(m + 1);
  z.head(m) = previous;
  z[m] = m >= 2 ? previous[m - 1] + (previous[m - 1] - previous[m - 2])
                : previous[m - 1] + Scalar(1);
  z.array() -= z.mean();
  return z;
}

// ---------------------------------------------------------------------------
// Newton relaxation
// ---------------------------------------------------------------------------

template <class Scalar = double>
struct SolveOptions {
  Scalar tol = Scalar(1e-12);  // max-norm of the dimensionless gradient
  int max_iter = 200;
};

template <class Scalar = double>
struct SolveTrace {
  std::vector<Scalar> energies;  // at each accepted iterate, starting value first
  int iterations = 0;
};

namespace detail {

template <class Scalar>
bool strictly_increasing(const VectorX<Scalar>& z) {
  for (Eigen::Index i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1])) return false;
  return true;
}

/// Gradient max-norm measured against the per-ion force scale 1 + 2|z_i|.
/// The trap and Coulomb forces on an edge ion both reach ~|z|, and the
/// rounding of each 1/(z_i - z_j)^2 term scales the same way, so the raw
/// max-norm has an N-dependent floor (~2e-11 at N=1000) that this weighting
/// removes; at small N the two norms coincide up to a factor of ~2.
template <class Scalar>
Scalar gradient_residual(const VectorX<Scalar>& z, const VectorX<Scalar>& g) {
  using std::abs;
  Scalar worst = Scalar(0);
  for (Eigen::Index i = 0; i < z.size(); ++i)
    worst = std::max(worst, abs(g[i]) / (Scalar(1) + Scalar(2) * abs(z[i])));
  return worst;
}

}  // namespace detail

/// Newton's method with backtracking on the dimensionless chain potential.
/// Far from the optimum the step must make Armijo progress on the energy;
/// once energy differences fall below double rounding the step is accepted on
/// gradient-norm descent instead. Throws ConvergenceError (carrying the last
/// residual) if the tolerance is not reached.
template <class Scalar>
VectorX<Scalar> relax_chain(VectorX<Scalar> z, Scalar tol, int max_iter,
                            Scalar* residual_out = nullptr,
                            SolveTrace<Scalar>* trace = nullptr) {
  if (z.size() == 0) throw std::domain_error("relax_chain: empty chain");
  if (!(tol > Scalar(0))) throw std::invalid_argument("relax_chain: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("relax_chain: max_iter must be >= 1");

  std::sort(z.data(), z.data() + z.size());
  if (!detail::strictly_increasing(z)) {
    // split coincident ions before the Coulomb terms are evaluated
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += Scalar(1e-6) * Scalar(i);
    std::sort(z.data(), z.data() + z.size());
  }

  if (trace) {
    trace->energies.clear();
    trace->energies.push_back(chain_energy(z));
    trace->iterations = 0;
  }

  VectorX<Scalar> g = chain_gradient(z);
  Scalar gn = detail::gradient_residual(z, g);
  for (int it = 0; it < max_iter && gn > tol; ++it) {
    const MatrixX<Scalar> h = chain_hessian(z);
    Eigen::LLT<MatrixX<Scalar>> llt(h);
    const VectorX<Scalar> step =
        llt.info() == Eigen::Success ? VectorX<Scalar>(llt.solve(g)) : g;
    const Scalar e0 = chain_energy(z);
    const Scalar slope = g.dot(step);

    bool accepted = false;
    bool progressed = false;
    Scalar t = Scalar(1);
    for (int ls = 0; ls < 60; ++ls, t /= Scalar(2)) {
      VectorX<Scalar> znew = z - t * step;
      if (!detail::strictly_increasing(znew)) continue;
      VectorX<Scalar> gnew = chain_gradient(znew);
      const Scalar gnnew = detail::gradient_residual(znew, gnew);
      const Scalar enew = chain_energy(znew);
      if (enew <= e0 - Scalar(1e-4) * t * slope || gnnew < gn) {
        progressed = enew < e0 || gnnew < gn;
        z = std::move(znew);
        g = std::move(gnew);
        gn = gnnew;
        accepted = true;
        break;
      }
    }
    if (trace) {
      trace->energies.push_back(chain_energy(z));
      trace->iterations = it + 1;
    }
    if (!accepted || !progressed) break;  // stalled at the rounding floor
  }

  if (gn > tol)
    throw ConvergenceError("relax_chain: gradient residual above tolerance", double(gn));

  // Restore exact mirror antisymmetry when it does not spoil the residual.
  VectorX<Scalar> zs = Scalar(0.5) * (z - z.reverse().eval());
  if (detail::strictly_increasing(zs)) {
    const Scalar gns = detail::gradient_residual(zs, chain_gradient(zs));
    if (gns <= tol) {
      z = std::move(zs);
      gn = gns;
    }
  }

  if (residual_out) *residual_out = gn;
  return z;
}

/// Equilibrium positions for the trap configuration, continuum-seeded.
template <class Scalar>
IonArray<Scalar> solve_equilibrium(const TrapConfig<Scalar>& config,
                                   const PhysicalConstants<Scalar>& pc,
                                   const SolveOptions<Scalar>& opts = {},
                                   SolveTrace<Scalar>* trace = nullptr) {
  config.validate();
  Scalar residual = Scalar(0);
  VectorX<Scalar> z = relax_chain(continuum_seed<Scalar>(config.n_ions), opts.tol,
                                  opts.max_iter, &residual, trace);
  return IonArray<Scalar>{std::move(z), config.d0(pc), residual};
}

/// Same relaxation from a caller-supplied seed.
template <class Scalar>
IonArray<Scalar> solve_equilibrium_from(VectorX<Scalar> seed, const TrapConfig<Scalar>& config,
                                        const PhysicalConstants<Scalar>& pc,
                                        const SolveOptions<Scalar>& opts = {},
                                        SolveTrace<Scalar>* trace = nullptr) {
  config.validate();
  if (seed.size() != config.n_ions)
    throw std::invalid_argument("solve_equilibrium_from: seed size != n_ions");
  Scalar residual = Scalar(0);
  VectorX<Scalar> z = relax_chain(std::move(seed), opts.tol, opts.max_iter, &residual, trace);
  return IonArray<Scalar>{std::move(z), config.d0(pc), residual};
}

// ---------------------------------------------------------------------------
// Normal modes and spacings
// ---------------------------------------------------------------------------

/// Longitudinal mode frequencies in units of omega_z, ascending. The lowest is
/// the centre-of-mass mode at exactly 1. Throws InstabilityError if any
/// curvature is non-positive.
template <class Scalar>
VectorX<Scalar> longitudinal_mode_frequencies(const IonArray<Scalar>& array) {
  if (array.size() < 1) throw std::domain_error("mode_frequencies: empty chain");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(chain_hessian(array.positions_scaled),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("mode_frequencies: eigensolver failed");
  VectorX<Scalar> lam = es.eigenvalues();
  if (!(lam[0] > Scalar(0)))
    throw InstabilityError("mode_frequencies: non-positive curvature, not a stable equilibrium");
  return lam.cwiseSqrt();
}

template <class Scalar = double>
struct Spacings {
  VectorX<Scalar> gaps;  // N-1 gaps, units of d0
  Scalar s0 = Scalar(0);  // minimum gap
};

template <class Scalar>
Spacings<Scalar> spacings(const IonArray<Scalar>& array) {
  const Eigen::Index n = array.size();
  if (n < 2) throw std::domain_error("spacings: need at least 2 ions");
  Spacings<Scalar> out;
  out.gaps = array.positions_scaled.tail(n - 1) - array.positions_scaled.head(n - 1);
  out.s0 = out.gaps.minCoeff();
  return out;
}

}  // namespace iontrap
