#include "tmat/oracle/halfline.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tmat/errors.hpp"
#include "tmat/oracle/quadrature.hpp"

namespace tmat::oracle {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// The integrand as a function of theta on [0, pi].
std::function<cd(double)> theta_integrand(const std::function<cd(double)>& f, const QuadratureSpec& spec) {
  if (spec.pole_handling == PoleHandling::None) {
    return [&f](double theta) {
      const double x = std::tan(0.5 * theta);
      return f(x) * (0.5 * (1.0 + x * x));
    };
  }
  const double x0 = spec.pole;
  const cd h0 = f(x0);
  auto subtracted = [&f, x0, h0](double x) {
    const double w = (1.0 + x0 * x0) / (1.0 + x * x);
    return (f(x) - h0 * w) / (x - x0);
  };
  return [subtracted, x0](double theta) {
    const double x = std::tan(0.5 * theta);
    const double jac = 0.5 * (1.0 + x * x);
    const double delta = 1e-5 * (1.0 + x0);
    if (std::abs(x - x0) < 1e-9 * (1.0 + x0)) {
      return 0.5 * (subtracted(x0 + delta) + subtracted(x0 - delta)) * jac;
    }
    return subtracted(x) * jac;
  };
}

cd gauss_pass(const std::function<cd(double)>& g, int n) {
  const GaussRule rule = map_rule(gauss_legendre(n), 0.0, kPi);
  cd sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.weights(i) * g(rule.nodes(i));
  return sum;
}

}  // namespace

double pv_lorentz_kernel(double x0) { return -std::log(x0) - 0.5 * kPi * x0; }

HalflineResult integrate_halfline(const std::function<cd(double)>& f, const QuadratureSpec& spec) {
  require(spec.points >= 2, ErrorKind::InvalidArgument, "quadrature needs at least two points");
  require(spec.target_tol > 0.0, ErrorKind::InvalidArgument, "quadrature tolerance must be positive");
  const bool pole = spec.pole_handling != PoleHandling::None;
  if (pole) {
    require(std::isfinite(spec.pole) && spec.pole > 0.0, ErrorKind::InvalidArgument,
            "principal-value mode needs a pole location x0 > 0");
  }
  const auto g = theta_integrand(f, spec);

  HalflineResult out;
  if (spec.rule == QuadRule::TanhSinh) {
    auto wrapped = [&g](double theta, double, double) { return g(theta); };
    try {
      const auto r = integrate_tanh_sinh(wrapped, 0.0, kPi, spec.target_tol, 12);
      out.value = r.value;
      out.error = r.error;
      out.points = r.evaluations;
    } catch (const Error& e) {
      throw Error(ErrorKind::QuadratureFailure, e.what());
    }
  } else {
    int n = spec.points;
    cd coarse = gauss_pass(g, n);
    cd fine = coarse;
    double err = 0.0;
    for (int k = 0; k <= spec.max_doublings; ++k) {
      fine = gauss_pass(g, 2 * n);
      err = std::abs(fine - coarse);
      n *= 2;
      if (err <= spec.target_tol * std::max(1.0, std::abs(fine))) break;
      coarse = fine;
    }
    out.value = fine;
    out.error = err;
    out.points = n;
  }
  if (!(out.error <= spec.target_tol * std::max(1.0, std::abs(out.value)))) {
    throw Error(ErrorKind::QuadratureFailure,
                "half-line quadrature error estimate " + std::to_string(out.error) + " above tolerance");
  }
  if (pole) {
    const cd h0 = f(spec.pole);
    out.value += h0 * pv_lorentz_kernel(spec.pole);
    if (spec.pole_handling == PoleHandling::PrincipalValuePlusResidue) out.value += cd(0.0, kPi) * h0;
  }
  // A doubled rule that agrees to roundoff still reports a nonzero estimate.
  out.error = std::max(out.error, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(out.value));
  return out;
}

}  // namespace tmat::oracle
