#pragma once

// Integrals over [0, inf) through the compactifying map x = tan(theta/2),
// which turns u = (x^2-1)/(x^2+1) into -cos(theta).

#include <complex>
#include <functional>

namespace tmat::oracle {

enum class QuadRule { GaussLegendreMapped, TanhSinh };

/// `PrincipalValue` integrates h(x)/(x - x0) in the principal-value sense;
/// `PrincipalValuePlusResidue` adds i pi h(x0), i.e. the kernel 1/(x - x0 - i0).
enum class PoleHandling { None, PrincipalValue, PrincipalValuePlusResidue };

struct QuadratureSpec {
  QuadRule rule = QuadRule::GaussLegendreMapped;
  int points = 200;
  double target_tol = 1e-10;
  PoleHandling pole_handling = PoleHandling::None;
  double pole = 0.0;    // x0 > 0, used only with pole handling
  int max_doublings = 4;
};

struct HalflineResult {
  std::complex<double> value;
  double error = 0.0;
  int points = 0;
};

/// Without pole handling: integral of f over [0, inf). With pole handling, f is
/// the regular numerator h and the kernel 1/(x - x0) is implied. The error is
/// the difference between the two finest rules; QuadratureFailure is thrown if
/// it stays above target_tol * max(1, |value|).
HalflineResult integrate_halfline(const std::function<std::complex<double>(double)>& f,
                                  const QuadratureSpec& spec);

/// PV of the integral of (1 + x0^2) / ((1 + x^2)(x - x0)) over [0, inf).
double pv_lorentz_kernel(double x0);

}  // namespace tmat::oracle
