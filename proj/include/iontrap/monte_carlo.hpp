#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "iontrap/decoherence.hpp"
#include "iontrap/ion_array.hpp"
#include "iontrap/spin.hpp"

namespace iontrap {

/// SplitMix64: the per-trial streams are derived by counter splitting, so the
/// sampled values depend only on (seed, trial index), never on scheduling.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via explicit Box-Muller; std distributions are
  /// implementation-defined and would break the bit-identical contract.
  double gauss() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
};

inline SplitMix64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
  SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ull * (trial + 1)));
  mix.next();
  mix.next();
  return mix;
}

template <class Scalar = double>
struct McOptions {
  Scalar horizon = Scalar(3);  // time span in units of the predicted tau_i
  int n_points = 400;
  int n_threads = 0;  // 0: hardware concurrency
  Scalar amplitude_scale = Scalar(1);  // scales the sampled amplitudes; 0 freezes the chain
};

template <class Scalar = double>
struct McResult {
  VectorX<Scalar> times;              // s
  VectorX<Scalar> mean_overlap;       // trial average of cos Phi(t)
  VectorX<Scalar> mean_phase;         // trial average of Phi(t), rad
  VectorX<Scalar> predicted_overlap;  // cos of the ensemble-mean phase
  Scalar tau_i = Scalar(0);           // per-ion pi-wander time from the second moment
  Scalar empirical_pi_time = std::numeric_limits<Scalar>::infinity();
  Scalar max_phase_rate = Scalar(0);  // largest |f|^2/omega_0 over trials; bounds dPhi/dt
};

/// Stochastic realization of the dephasing mechanism for one ion: every
/// neighbour oscillates as u_j(t) = A_j cos(omega_t t + phi_j) with Gaussian
/// A_j (time-averaged <u_j^2> = hbar / m omega_t) and uniform phase. The
/// resulting field detunes the ion; each trial accumulates the dynamical
/// phase in closed form and the trial mean of cos Phi is reported against the
/// second-moment prediction.
///
/// Trials are partitioned into fixed 64-trial blocks reduced in block order,
/// so the output is bit-identical for any thread count.
template <class Scalar>
McResult<Scalar> monte_carlo_dephasing(const IonArray<Scalar>& array,
                                       const TrapConfig<Scalar>& config,
                                       const TransitionSpec<Scalar>& spec,
                                       const PhysicalConstants<Scalar>& pc,
                                       Eigen::Index ion_index, int trials, std::uint64_t seed,
                                       const McOptions<Scalar>& opts = {}) {
  if (trials < 1) throw std::invalid_argument("monte_carlo_dephasing: trials must be >= 1");
  if (opts.n_points < 2) throw std::invalid_argument("monte_carlo_dephasing: need >= 2 points");
  if (!(opts.horizon > Scalar(0)))
    throw std::invalid_argument("monte_carlo_dephasing: horizon must be positive");
  const Eigen::Index n = array.size();
  if (n < 2) throw std::domain_error("monte_carlo_dephasing: need at least 2 ions");
  if (ion_index < 0 || ion_index >= n)
    throw std::out_of_range("monte_carlo_dephasing: ion index out of range");
  config.validate();
  spec.validate();

  using std::cos;
  using std::sin;
  using std::sqrt;

  const int a = spec.multipole_a;
  const Scalar q = sqrt(gaussian_q2(pc, config.species.charge_number));
  const Scalar d_a = sqrt(coupling_d2(spec, pc));
  const Scalar var_u = pc.hbar / (config.species.mass * config.omega_t);  // <u_j^2>
  const Scalar sum_si = s_n_exact(array, ion_index, 2 * a + 4) / ipow(array.d0, 2 * a + 4);

  // second-moment rate: tau_i^{-1} = (q^2 d_a^2 / 2 pi hbar^2 omega_0) <u^2> S_{2a+4}
  const Scalar tau_inv = q * q * d_a * d_a /
                         (Scalar(2) * pi_v<Scalar> * pc.hbar * pc.hbar * spec.omega_0) *
                         var_u * sum_si;
  McResult<Scalar> result;
  result.tau_i = Scalar(1) / tau_inv;

  result.times.resize(opts.n_points);
  const Scalar t_max = opts.horizon * result.tau_i;
  for (int p = 0; p < opts.n_points; ++p)
    result.times[p] = t_max * Scalar(p) / Scalar(opts.n_points - 1);

  // field coefficients c_j = d_a q / |z_i - z_j|^{a+2} in SI
  std::vector<Scalar> coeff;
  coeff.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == ion_index) continue;
    using std::abs;
    const Scalar r = abs(array.positions_scaled[j] - array.positions_scaled[ion_index]) * array.d0;
    coeff.push_back(d_a * q / ipow(r, a + 2));
  }

  constexpr int kBlock = 64;
  const int n_blocks = (trials + kBlock - 1) / kBlock;
  std::vector<std::vector<Scalar>> block_cos(n_blocks), block_phi(n_blocks);
  std::vector<Scalar> block_max_rate(static_cast<std::size_t>(n_blocks), Scalar(0));

  if (!(opts.amplitude_scale >= Scalar(0)))
    throw std::invalid_argument("monte_carlo_dephasing: amplitude_scale must be >= 0");
  const Scalar sigma_amp = opts.amplitude_scale * sqrt(Scalar(2) * var_u);
  const auto run_block = [&](int b) {
    std::vector<Scalar>& acc_cos = block_cos[b];
    std::vector<Scalar>& acc_phi = block_phi[b];
    acc_cos.assign(static_cast<std::size_t>(opts.n_points), Scalar(0));
    acc_phi.assign(static_cast<std::size_t>(opts.n_points), Scalar(0));
    const int lo = b * kBlock;
    const int hi = std::min(trials, lo + kBlock);
    for (int trial = lo; trial < hi; ++trial) {
      SplitMix64 rng = trial_stream(seed, static_cast<std::uint64_t>(trial));
      // all neighbours share omega_t, so the net detuning is one sinusoid
      Scalar rx = Scalar(0), ry = Scalar(0);
      for (const Scalar c : coeff) {
        const Scalar amp = sigma_amp * Scalar(rng.gauss());
        const Scalar phase = Scalar(2) * pi_v<Scalar> * Scalar(rng.uniform01());
        rx += c * amp * cos(phase);
        ry += c * amp * sin(phase);
      }
      using std::atan2;
      using std::hypot;
      const Scalar dv_amp = hypot(rx, ry);
      const Scalar theta = atan2(ry, rx);
      // f along x with |f| = deltaV / 2 hbar
      const Scalar f_amp = dv_amp / (Scalar(2) * pc.hbar);
      const TransverseDrive<Scalar> drive =
          TransverseDrive<Scalar>::sinusoid_x(f_amp, config.omega_t, theta);
      block_max_rate[static_cast<std::size_t>(b)] = std::max(
          block_max_rate[static_cast<std::size_t>(b)], f_amp * f_amp / spec.omega_0);
      for (int p = 0; p < opts.n_points; ++p) {
        const Scalar phi = dynamical_phase(drive, result.times[p], spec.omega_0);
        acc_phi[static_cast<std::size_t>(p)] += phi;
        acc_cos[static_cast<std::size_t>(p)] += cos(phi);
      }
    }
  };

  int n_threads = opts.n_threads > 0 ? opts.n_threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, n_blocks));
  if (n_threads == 1) {
    for (int b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        for (int b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) run_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  result.mean_overlap.setZero(opts.n_points);
  result.mean_phase.setZero(opts.n_points);
  for (int b = 0; b < n_blocks; ++b) {  // fixed reduction order
    for (int p = 0; p < opts.n_points; ++p) {
      result.mean_overlap[p] += block_cos[b][static_cast<std::size_t>(p)];
      result.mean_phase[p] += block_phi[b][static_cast<std::size_t>(p)];
    }
    result.max_phase_rate =
        std::max(result.max_phase_rate, block_max_rate[static_cast<std::size_t>(b)]);
  }
  result.mean_overlap /= Scalar(trials);
  result.mean_phase /= Scalar(trials);

  // ensemble-mean phase grows at pi / (2 tau_i); overlap prediction cos(mean)
  result.predicted_overlap.resize(opts.n_points);
  for (int p = 0; p < opts.n_points; ++p)
    result.predicted_overlap[p] =
        cos(pi_v<Scalar> / Scalar(2) * result.times[p] / result.tau_i);

  // first crossing of the mean excess precession 2 Phi through pi
  for (int p = 1; p < opts.n_points; ++p) {
    const Scalar prev = Scalar(2) * result.mean_phase[p - 1];
    const Scalar cur = Scalar(2) * result.mean_phase[p];
    if (cur >= pi_v<Scalar>) {
      const Scalar frac = (pi_v<Scalar> - prev) / (cur - prev);
      result.empirical_pi_time =
          result.times[p - 1] + frac * (result.times[p] - result.times[p - 1]);
      break;
    }
  }
  return result;
}

}  // namespace iontrap
