#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "tmat/errors.hpp"

namespace tmat::specfun {

using cd = std::complex<double>;

/// Logarithm of the gamma function for complex argument (Stirling series after
/// an upward shift, reflection for Re w < 1/2). The imaginary part is a branch of arg Gamma(w),
/// so only exp(ln_gamma(w)) is meaningful. Throws PoleOfGamma at 0, -1, -2, ...
cd ln_gamma(cd w);

/// log |Gamma(x)| for real x; throws PoleOfGamma at non-positive integers.
double ln_gamma(double x);

/// Sign of Gamma(x) for real x away from the poles.
double gamma_sign(double x);

/// Rising factorial (a)_n as the product a (a+1) ... (a+n-1).
template <class T>
T pochhammer(T a, int n) {
  require(n >= 0, ErrorKind::InvalidArgument, "pochhammer needs n >= 0");
  T p(1);
  for (int k = 0; k < n; ++k) p *= a + T(k);
  return p;
}

/// (a)_n as Gamma(a+n)/Gamma(a), evaluated in log space.
cd pochhammer_gamma_ratio(cd a, int n);

/// A value stored as exp(log_mag) * unit with |unit| = 1 (a sign for reals).
/// Used for sequences whose magnitudes leave the double range.
template <class T>
struct ScaledValue {
  double log_mag = -std::numeric_limits<double>::infinity();
  T unit = T(1);

  T value() const { return std::isinf(log_mag) && log_mag < 0 ? T(0) : unit * std::exp(log_mag); }
  bool is_zero() const { return std::isinf(log_mag) && log_mag < 0; }

  friend ScaledValue operator*(const ScaledValue& a, const ScaledValue& b) {
    return {a.log_mag + b.log_mag, a.unit * b.unit};
  }
  friend ScaledValue operator/(const ScaledValue& a, const ScaledValue& b) {
    return {a.log_mag - b.log_mag, a.unit / b.unit};
  }
};

template <class T>
ScaledValue<T> make_scaled(T v) {
  const double m = std::abs(v);
  if (m == 0.0) return {};
  return {std::log(m), v / T(m)};
}

/// (a)_n in scaled form, accumulated factor by factor.
template <class T>
ScaledValue<T> log_pochhammer(T a, int n) {
  require(n >= 0, ErrorKind::InvalidArgument, "log_pochhammer needs n >= 0");
  ScaledValue<T> acc{0.0, T(1)};
  for (int k = 0; k < n; ++k) {
    acc = acc * make_scaled(a + T(k));
    if (acc.is_zero()) return acc;
  }
  return acc;
}

/// Gegenbauer polynomial C_n^lambda(x) by the standard three-term recurrence.
double gegenbauer(int n, double lambda, double x);

/// C_0^lambda(x) ... C_nmax^lambda(x).
Eigen::VectorXd gegenbauer_sequence(int nmax, double lambda, double x);

/// Legendre function of the second kind Q_l(zeta) for real zeta > 1.
double legendre_q(int l, double zeta);

template <class T>
struct Hyp2F1Params {
  T a{}, b{}, c{}, z{};
  double tol = 1e-14;
};

enum class Hyp2F1Route { Trivial, Terminating, GaussSum, DirectSeries, Pfaff, EulerIntegral, Accelerated };

/// Which evaluation path hyp2f1 takes for these parameters. Throws DomainError
/// outside the supported region (|z| > 1, or |z| = 1 with Re(c-a-b) <= 0).
template <class T>
Hyp2F1Route hyp2f1_route(const Hyp2F1Params<T>& p);

/// Gauss hypergeometric function 2F1(a, b; c; z) for |z| <= 1.
///
/// Terminating series are summed exactly. Otherwise: the power series for
/// |z| <= 3/4, the Pfaff transformation when |z/(z-1)| <= 3/4, Euler's integral
/// (tanh-sinh) when Re c > Re a > 0 or Re c > Re b > 0, and an epsilon-accelerated
/// series as the last resort. Throws ConvergenceFailure if no path meets `tol`.
template <class T>
T hyp2f1(const Hyp2F1Params<T>& p);

/// First `count` terms of the defining power series (for diagnostics).
template <class T>
std::vector<T> hyp2f1_series_terms(const Hyp2F1Params<T>& p, int count);

/// 2F1(-n, b; c; z) as a finite sum in the arithmetic of `Real`. Instantiating
/// with an extended-precision type keeps the alternating sum free of
/// cancellation.
template <class Real>
Real hyp2f1_terminating(int n, const Real& b, const Real& c, const Real& z) {
  Real term(1);
  Real sum(1);
  for (int k = 0; k < n; ++k) {
    term *= Real(k - n) * (b + Real(k)) / ((c + Real(k)) * Real(k + 1)) * z;
    sum += term;
  }
  return sum;
}

}  // namespace tmat::specfun
