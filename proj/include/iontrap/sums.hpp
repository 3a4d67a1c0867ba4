#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "iontrap/continuum.hpp"
#include "iontrap/ion_array.hpp"
#include "iontrap/special_functions.hpp"
#include "iontrap/summation.hpp"

namespace iontrap {

template <class Scalar = double>
struct SumComparison {
  Scalar exact = Scalar(0);
  Scalar continuum = Scalar(0);
  Scalar relative_error = Scalar(0);
};

template <class Scalar>
SumComparison<Scalar> make_comparison(Scalar exact, Scalar continuum) {
  using std::abs;
  SumComparison<Scalar> c{exact, continuum, Scalar(0)};
  if (exact != Scalar(0)) c.relative_error = abs(exact - continuum) / abs(exact);
  return c;
}

/// S_n(i) = sum_{j != i} |z_i - z_j|^{-n}. Terms enter nearest-neighbour first
/// (descending magnitude) under compensated summation; with n up to 16 they
/// span many decades.
template <class Scalar>
Scalar s_n_exact(const IonArray<Scalar>& array, Eigen::Index i, int n) {
  const Eigen::Index count = array.size();
  if (count < 2) throw std::domain_error("s_n_exact: need at least 2 ions");
  if (i < 0 || i >= count) throw std::out_of_range("s_n_exact: ion index out of range");
  if (n < 2) throw std::domain_error("s_n_exact: requires n >= 2");
  const auto& z = array.positions_scaled;
  CompensatedSum<Scalar> acc;
  for (Eigen::Index k = 1; k < count; ++k) {
    const bool left = i - k >= 0;
    const bool right = i + k < count;
    if (left) acc.add(Scalar(1) / ipow(z[i] - z[i - k], n));
    if (right) acc.add(Scalar(1) / ipow(z[i + k] - z[i], n));
    if (!left && !right) break;
  }
  return acc.value();
}

/// Continuum estimate 2 zeta(n) / s^n for a locally uniform chain of spacing s.
template <class Scalar>
Scalar s_n_continuum(Scalar s_local, int n) {
  if (!(s_local > Scalar(0))) throw std::domain_error("s_n_continuum: spacing must be positive");
  return Scalar(2) * riemann_zeta_int<Scalar>(n) / ipow(s_local, n);
}

/// Discrete local spacing: mean of the adjacent gaps for interior ions, the
/// single adjacent gap at the ends.
template <class Scalar>
VectorX<Scalar> local_spacings(const IonArray<Scalar>& array) {
  const Eigen::Index n = array.size();
  if (n < 2) throw std::domain_error("local_spacings: need at least 2 ions");
  const auto& z = array.positions_scaled;
  VectorX<Scalar> s(n);
  s[0] = z[1] - z[0];
  s[n - 1] = z[n - 1] - z[n - 2];
  for (Eigen::Index i = 1; i < n - 1; ++i)
    s[i] = (z[i + 1] - z[i - 1]) / Scalar(2);
  return s;
}

/// T_n = sum_i s_i^{-n} over the discrete local spacings.
template <class Scalar>
Scalar t_n_exact(const IonArray<Scalar>& array, int n) {
  if (n < 0) throw std::domain_error("t_n_exact: requires n >= 0");
  const VectorX<Scalar> s = local_spacings(array);
  std::vector<Scalar> terms(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i)
    terms[static_cast<std::size_t>(i)] = Scalar(1) / ipow(s[i], n);
  return sum_descending(terms);
}

enum class TnForm { Integral, Asymptotic };

/// Continuum T_n from an explicit profile (half-length L and central spacing
/// s0, both in d0 units): (L / s0^{n+1}) times the shape integral or its
/// asymptotic form.
template <class Scalar>
Scalar t_n_continuum_profile(Scalar L, Scalar s0, int n, TnForm form) {
  if (!(L > Scalar(0)) || !(s0 > Scalar(0)))
    throw std::domain_error("t_n_continuum_profile: L and s0 must be positive");
  if (n < 0) throw std::domain_error("t_n_continuum_profile: requires n >= 0");
  const Scalar shape = form == TnForm::Integral ? shape_integral<Scalar>(n)
                                                : shape_integral_asymptotic<Scalar>(n);
  return L / ipow(s0, n + 1) * shape;
}

/// Continuum T_n with L and s0 taken from the structure model.
template <class Scalar = double>
Scalar t_n_continuum(int n_ions, int n, ContinuumModel model, TnForm form) {
  return t_n_continuum_profile(half_length<Scalar>(n_ions, model),
                               min_spacing<Scalar>(n_ions, model), n, form);
}

}  // namespace iontrap
