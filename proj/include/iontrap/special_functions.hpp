#pragma once

#include <cmath>
#include <stdexcept>

#include "iontrap/constants.hpp"

namespace iontrap {

template <class Scalar = double>
inline constexpr Scalar euler_gamma_v = Scalar(0.577215664901532860606512090082L);

/// Riemann zeta at integer argument n >= 2.
/// Partial sum to M=16 plus the Euler-Maclaurin tail through B8; the first
/// dropped term is below 1e-14 for every n >= 2.
template <class Scalar = double>
Scalar riemann_zeta_int(int n) {
  if (n < 2) throw std::domain_error("riemann_zeta_int: defined for n >= 2");
  using std::pow;
  constexpr int M = 16;
  Scalar s = Scalar(0);
  for (int j = M - 1; j >= 1; --j) s += pow(Scalar(j), Scalar(-n));
  const Scalar mn = pow(Scalar(M), Scalar(-n));
  s += mn * Scalar(M) / Scalar(n - 1);  // M^{1-n}/(n-1)
  s += mn / Scalar(2);
  // B_{2k}/(2k)! for 2k = 2, 4, 6, 8
  const Scalar bern[] = {Scalar(1.0) / Scalar(12), Scalar(-1.0) / Scalar(720),
                         Scalar(1.0) / Scalar(30240), Scalar(-1.0) / Scalar(1209600)};
  for (int k = 1; k <= 4; ++k) {
    Scalar poch = Scalar(1);
    for (int i = 0; i < 2 * k - 1; ++i) poch *= Scalar(n + i);
    s += bern[k - 1] * poch * pow(Scalar(M), Scalar(-(n + 2 * k - 1)));
  }
  return s;
}

/// Gamma(x) for x > 0 via the Lanczos approximation (g = 7, 9 terms).
/// Relative error stays below 1e-12 over the range used here (x <= 30).
template <class Scalar = double>
Scalar gamma_lanczos(Scalar x) {
  if (!(x > Scalar(0))) throw std::domain_error("gamma_lanczos: requires x > 0");
  using std::exp;
  using std::pow;
  using std::sqrt;
  static const Scalar coef[9] = {
      Scalar(0.99999999999980993),    Scalar(676.5203681218851),
      Scalar(-1259.1392167224028),    Scalar(771.32342877765313),
      Scalar(-176.61502916214059),    Scalar(12.507343278686905),
      Scalar(-0.13857109526572012),   Scalar(9.9843695780195716e-6),
      Scalar(1.5056327351493116e-7)};
  const Scalar g = Scalar(7);
  const Scalar z = x - Scalar(1);
  Scalar a = coef[0];
  for (int i = 1; i < 9; ++i) a += coef[i] / (z + Scalar(i));
  const Scalar t = z + g + Scalar(0.5);
  return sqrt(Scalar(2) * pi_v<Scalar>) * pow(t, z + Scalar(0.5)) * exp(-t) * a;
}

/// I(n) = int_{-1}^{1} (1 - x^2)^{n+1} dx = sqrt(pi) Gamma(n+2) / Gamma(n+5/2).
template <class Scalar = double>
Scalar shape_integral(int n) {
  if (n < 0) throw std::domain_error("shape_integral: requires n >= 0");
  using std::sqrt;
  return sqrt(pi_v<Scalar>) * gamma_lanczos<Scalar>(Scalar(n + 2)) /
         gamma_lanczos<Scalar>(Scalar(n) + Scalar(2.5));
}

/// Large-n asymptotic form of the same integral, sqrt(4 pi / (4n + 7)).
template <class Scalar = double>
Scalar shape_integral_asymptotic(int n) {
  if (n < 0) throw std::domain_error("shape_integral_asymptotic: requires n >= 0");
  using std::sqrt;
  return sqrt(Scalar(4) * pi_v<Scalar> / Scalar(4 * n + 7));
}

}  // namespace iontrap
