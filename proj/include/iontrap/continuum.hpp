#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "iontrap/errors.hpp"
#include "iontrap/special_functions.hpp"

namespace iontrap {

/// Large-N structure laws for the chain. SimpleBalance is the nearest-neighbour
/// force-balance estimate, DubinFluid the uniform-charge-ellipsoid result, and
/// HughesFit a numerical fit that defines only the minimum spacing.
enum class ContinuumModel { SimpleBalance, DubinFluid, HughesFit };

inline const char* to_string(ContinuumModel model) {
  switch (model) {
    case ContinuumModel::SimpleBalance: return "simple-balance";
    case ContinuumModel::DubinFluid: return "dubin-fluid";
    case ContinuumModel::HughesFit: return "hughes-fit";
  }
  return "?";
}

/// The constant inside the DubinFluid logarithm, 6 e^{gamma - 13/5}.
/// Quoted as 0.8 in displays; the exact value is used in all computations.
template <class Scalar = double>
Scalar dubin_log_constant() {
  using std::exp;
  return Scalar(6) * exp(euler_gamma_v<Scalar> - Scalar(13) / Scalar(5));
}

namespace detail {
inline void require_chain(int n_ions) {
  if (n_ions < 2) throw std::domain_error("continuum: need at least 2 ions");
}
}  // namespace detail

/// Half-length L of the chain in units of d0 (ions span [-L, L]).
template <class Scalar = double>
Scalar half_length(int n_ions, ContinuumModel model) {
  detail::require_chain(n_ions);
  using std::cbrt;
  using std::log;
  switch (model) {
    case ContinuumModel::SimpleBalance:
      return cbrt(pi_v<Scalar> * pi_v<Scalar> * Scalar(n_ions) / Scalar(2));
    case ContinuumModel::DubinFluid: {
      const Scalar arg = dubin_log_constant<Scalar>() * Scalar(n_ions);
      if (!(arg > Scalar(1)))
        throw std::domain_error("half_length: DubinFluid logarithm is not positive");
      return cbrt(Scalar(3) * Scalar(n_ions) * log(arg));
    }
    case ContinuumModel::HughesFit:
      throw UnsupportedModelError("half_length: HughesFit defines only the minimum spacing");
  }
  throw std::logic_error("half_length: unknown model");
}

/// Minimum (central) spacing s0 in units of d0.
template <class Scalar = double>
Scalar min_spacing(int n_ions, ContinuumModel model) {
  detail::require_chain(n_ions);
  using std::pow;
  switch (model) {
    case ContinuumModel::SimpleBalance: {
      const Scalar L = half_length<Scalar>(n_ions, ContinuumModel::SimpleBalance);
      return Scalar(2) * pi_v<Scalar> * pi_v<Scalar> / (L * L);
    }
    case ContinuumModel::DubinFluid:
      return Scalar(4) * half_length<Scalar>(n_ions, ContinuumModel::DubinFluid) /
             (Scalar(3) * Scalar(n_ions));
    case ContinuumModel::HughesFit:
      return Scalar(2) * pow(Scalar(n_ions), Scalar(-0.56));
  }
  throw std::logic_error("min_spacing: unknown model");
}

/// Local spacing s(z) = s0 / (1 - z^2/L^2), z in units of d0. The profile
/// diverges toward the ends, which the models do not treat; |z| >= L is an
/// error rather than a clamp. The boundary test carries a few-ulp guard band
/// so a caller-recomputed half-length cannot land on the wrong side.
template <class Scalar = double>
Scalar spacing_profile(Scalar z, int n_ions, ContinuumModel model) {
  const Scalar L = half_length<Scalar>(n_ions, model);
  using std::abs;
  const Scalar guard = Scalar(4) * std::numeric_limits<Scalar>::epsilon();
  if (!(abs(z) < L * (Scalar(1) - guard)))
    throw std::domain_error("spacing_profile: |z| must be below the half-length");
  const Scalar x = z / L;
  return min_spacing<Scalar>(n_ions, model) / (Scalar(1) - x * x);
}

/// Cumulative ion count n(z) = N (2 + 3x - x^3)/4 with x = z/L, normalized so
/// n(-L) = 0, n(0) = N/2, n(L) = N. For DubinFluid this is exactly the
/// integral of 1/s(z).
template <class Scalar = double>
Scalar ion_count_profile(Scalar z, int n_ions, ContinuumModel model) {
  const Scalar L = half_length<Scalar>(n_ions, model);
  using std::abs;
  const Scalar guard = Scalar(4) * std::numeric_limits<Scalar>::epsilon();
  if (!(abs(z) <= L * (Scalar(1) + guard)))
    throw std::domain_error("ion_count_profile: |z| must be within the half-length");
  const Scalar x = std::clamp(z / L, Scalar(-1), Scalar(1));
  return Scalar(n_ions) * (Scalar(2) + Scalar(3) * x - x * x * x) / Scalar(4);
}

}  // namespace iontrap
