#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace iontrap {

/// Iterative solver stopped before reaching the requested tolerance.
/// Carries the last residual so callers can decide whether to retry.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (last residual " + format(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }

  double residual_;
};

/// Mode analysis found a non-positive curvature: the configuration is not a
/// stable equilibrium.
class InstabilityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The requested quantity is not defined for the chosen continuum model.
class UnsupportedModelError : public std::domain_error {
  using std::domain_error::domain_error;
};

/// A fixed-step integrator drifted beyond its accuracy budget.
class IntegrationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace iontrap
