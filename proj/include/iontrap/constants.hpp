#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace iontrap {

template <class Scalar = double>
inline constexpr Scalar pi_v = Scalar(3.14159265358979323846264338328L);

/// SI constants with the charge algebra kept in the Gaussian convention:
/// coulomb_q2_unit is e^2/(4 pi eps0) in J*m, so q^2/r is directly an energy.
template <class Scalar = double>
struct PhysicalConstants {
  Scalar hbar = Scalar(0);             // J s
  Scalar c = Scalar(0);                // m/s
  Scalar k_B = Scalar(0);              // J/K
  Scalar coulomb_q2_unit = Scalar(0);  // J m
  Scalar amu = Scalar(0);              // kg

  /// CODATA 2018. h, e, k_B are exact by definition; eps0 is the measured
  /// 8.8541878128e-12 F/m; amu is 1.66053906660e-27 kg.
  static PhysicalConstants codata2018() {
    const Scalar elementary_charge = Scalar(1.602176634e-19);  // C
    const Scalar epsilon0 = Scalar(8.8541878128e-12);          // F/m
    PhysicalConstants pc;
    pc.hbar = Scalar(1.054571817e-34);
    pc.c = Scalar(299792458.0);
    pc.k_B = Scalar(1.380649e-23);
    pc.coulomb_q2_unit =
        elementary_charge * elementary_charge / (Scalar(4) * pi_v<Scalar> * epsilon0);
    pc.amu = Scalar(1.66053906660e-27);
    return pc;
  }

  void validate() const {
    if (!(hbar > Scalar(0)) || !(c > Scalar(0)) || !(k_B > Scalar(0)) ||
        !(coulomb_q2_unit > Scalar(0)) || !(amu > Scalar(0))) {
      throw std::domain_error("PhysicalConstants: all fields must be strictly positive");
    }
  }
};

template <class Scalar = double>
struct IonSpecies {
  std::string name;
  Scalar mass = Scalar(0);  // kg
  int charge_number = 1;

  void validate() const {
    if (!(mass > Scalar(0))) throw std::domain_error("IonSpecies: mass must be positive");
    if (charge_number < 0) throw std::domain_error("IonSpecies: negative charge number");
  }
};

/// 138Ba+ : mass 137.905 u, singly charged.
template <class Scalar>
IonSpecies<Scalar> ba138(const PhysicalConstants<Scalar>& pc) {
  return IonSpecies<Scalar>{"138Ba+", Scalar(137.905) * pc.amu, 1};
}

/// Squared charge Z^2 e^2/(4 pi eps0) in J*m.
template <class Scalar>
Scalar gaussian_q2(const PhysicalConstants<Scalar>& pc, int charge_number) {
  if (charge_number < 0) throw std::domain_error("gaussian_q2: negative charge number");
  return Scalar(charge_number) * Scalar(charge_number) * pc.coulomb_q2_unit;
}

/// Trap length scale d0 = (q^2 / (m omega_z^2))^{1/3}.
template <class Scalar>
Scalar trap_length_scale(Scalar q2, Scalar mass, Scalar omega_z) {
  if (!(q2 > Scalar(0)) || !(mass > Scalar(0)) || !(omega_z > Scalar(0))) {
    throw std::domain_error("trap_length_scale: all inputs must be positive");
  }
  using std::cbrt;
  return cbrt(q2 / (mass * omega_z * omega_z));
}

}  // namespace iontrap
