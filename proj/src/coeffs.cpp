#include "tmat/coeffs.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tmat/errors.hpp"
#include "tmat/opmatrix.hpp"

namespace tmat {

namespace {

using specfun::ScaledValue;

template <class T>
ScaledValue<T> scaled_power(T base, int p) {
  const double m = std::abs(base);
  if constexpr (std::is_same_v<T, double>) {
    return {p * std::log(m), (base < 0.0 && p % 2 != 0) ? -1.0 : 1.0};
  } else {
    return {p * std::log(m), std::polar(1.0, p * std::arg(base))};
  }
}

template <class T>
ScaledValue<cd> widen(const ScaledValue<T>& v) {
  return {v.log_mag, cd(v.unit)};
}

// R_n = omega^{n+1} (2l+1)_{n+1} / (l+1+kappa)_{n+1} 2F1(n+1, -l+kappa; n+l+2+kappa; omega^2).
template <class T>
ScaledValue<T> r_closed_impl(int n, int l, T omega, T kappa) {
  if (n == -1) return {0.0, T(1)};
  // l+1+kappa = -j puts the energy on the level n+l+1 = -kappa; the hypergeometric
  // parameter c hits zero at n = j-1 before the Pochhammer denominator vanishes.
  const cd shifted = cd(T(l + 1) + kappa);
  const double j = std::round(-shifted.real());
  if (j >= 0.0 && std::abs(shifted + j) <= 1e-12 * (1.0 + j)) {
    throw Error(ErrorKind::ZeroDivisor, "the energy sits on the bound state n+l+1 = " +
                                            std::to_string(static_cast<int>(j) + l + 1));
  }
  const auto num = specfun::log_pochhammer(T(2 * l + 1), n + 1);
  const auto den = specfun::log_pochhammer(T(l + 1) + kappa, n + 1);
  if (den.is_zero()) {
    throw Error(ErrorKind::ZeroDivisor,
                "(l+1+kappa)_{n+1} vanishes: the energy sits on a bound state, n=" + std::to_string(n));
  }
  const specfun::Hyp2F1Params<T> p{T(n + 1), T(-l) + kappa, T(n + l + 2) + kappa, omega * omega, 1e-14};
  const T f = specfun::hyp2f1(p);
  return scaled_power(omega, n + 1) * num / den * specfun::make_scaled(f);
}

// ((n+2)/2)_l
double half_pochhammer(int n, int l) {
  double p = 1.0;
  for (int k = 0; k < l; ++k) p *= 0.5 * (n + 2) + k;
  return p;
}

}  // namespace

CoeffContext make_coeff_context(int l, const DimensionlessState& state, int sigma) {
  require(l >= 0, ErrorKind::IndexError, "l must be >= 0");
  require(sigma >= -1 && sigma <= 1, ErrorKind::InvalidArgument, "sigma must be -1, 0 or +1");
  if (state.special_point()) {
    throw Error(ErrorKind::BranchExclusion, "y = -1: omega2 vanishes and A is diagonal; use the special route");
  }
  if (state.y.imag() == 0.0 && state.y.real() < 0.0 && !state.negative_real()) {
    throw Error(ErrorKind::BranchMismatch, "negative real y must use the t-branch");
  }
  require(std::abs(state.y - 1.0) >= 1e-6, ErrorKind::DegenerateEnergy,
          "y within 1e-6 of 1: the coefficient 2 sigma rho / (y - 1) is singular");
  require(std::abs(state.y) > 1e-12, ErrorKind::DomainError, "y = 0: rho / sqrt(y) diverges");

  CoeffContext ctx;
  ctx.l = l;
  ctx.state = state;
  ctx.sigma = sigma;
  ctx.branch = state.branch;
  if (state.negative_real()) {
    const double st = std::sqrt(state.t);
    ctx.omega2 = (st - 1.0) / (st + 1.0);
    ctx.kappa = state.rho * sigma / st;
  } else {
    const cd sy = state.sqrt_y;
    const cd i(0.0, 1.0);
    ctx.omega2 = (sy - i) / (sy + i);
    ctx.kappa = i * state.rho * static_cast<double>(sigma) / sy;
  }
  return ctx;
}

ScaledCd r_closed_scaled(int n, const CoeffContext& ctx) {
  require(n >= -1, ErrorKind::IndexError, "R_n needs n >= -1");
  if (ctx.negative_real()) {
    return widen(r_closed_impl<double>(n, ctx.l, ctx.omega2.real(), ctx.kappa.real()));
  }
  return r_closed_impl<cd>(n, ctx.l, ctx.omega2, ctx.kappa);
}

cd r_closed(int n, const CoeffContext& ctx) { return r_closed_scaled(n, ctx).value(); }

double r_recurrence_residual(int n, const CoeffContext& ctx, cd r_nm1, cd r_n, cd r_np1) {
  require(n >= 0, ErrorKind::IndexError, "recurrence residual needs n >= 0");
  const cd y = ctx.state.y;
  require(std::abs(y - 1.0) >= 1e-6, ErrorKind::DegenerateEnergy, "y within 1e-6 of 1");
  require(ctx.state.x.has_value(), ErrorKind::BranchExclusion, "x is undefined at y = -1");
  const cd x = *ctx.state.x;
  const int l = ctx.l;
  const cd t1 = double(n + 1) * r_np1;
  const cd t2 = -2.0 * x * (double(n + l + 1) - 2.0 * ctx.sigma * ctx.state.rho / (y - 1.0)) * r_n;
  const cd t3 = double(n + 2 * l + 1) * r_nm1;
  const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
  if (scale == 0.0) return 0.0;
  return std::abs(t1 + t2 + t3) / scale;
}

cd q_of_r(int n, int l, cd r_n) {
  require(n >= -1 && l >= 0, ErrorKind::IndexError, "Q_n needs n >= -1, l >= 0");
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign * r_n / half_pochhammer(n, l);
}

ScaledCd q_of_r(int n, int l, const ScaledCd& r_n) {
  require(n >= -1 && l >= 0, ErrorKind::IndexError, "Q_n needs n >= -1, l >= 0");
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return {r_n.log_mag - std::log(half_pochhammer(n, l)), sign * r_n.unit};
}

CoeffSequence beta_seq(int N, const CoeffContext& ctx, cd r_minus1) {
  require(N >= 0, ErrorKind::InvalidArgument, "sequence length must be >= 0");
  require(r_minus1 != 0.0, ErrorKind::ZeroDivisor, "R_{-1} must be non-zero");
  CoeffSequence seq;
  seq.l = ctx.l;
  seq.N = N;
  seq.r_minus1 = r_minus1;
  const ScaledCd scale = specfun::make_scaled(r_minus1);
  seq.r.reserve(N + 2);
  seq.q.reserve(N + 2);
  for (int n = -1; n <= N; ++n) {
    const ScaledCd r = r_closed_scaled(n, ctx) * scale;
    if (r.is_zero() && n < N) {
      throw Error(ErrorKind::ZeroDivisor, "R_" + std::to_string(n) + " vanishes; beta_" +
                                              std::to_string(n + 1) + " is undefined");
    }
    seq.r.push_back(r);
    seq.q.push_back(q_of_r(n, ctx.l, r));
  }
  seq.beta.resize(N + 1);
  for (int n = 0; n <= N; ++n) seq.beta[n] = seq.q_ratio(n, n - 1);
  return seq;
}

double beta_recurrence_residual(int n, const CoeffContext& ctx, const CoeffSequence& seq) {
  require(n >= 0 && n + 1 <= seq.N, ErrorKind::IndexError, "residual needs beta_n and beta_{n+1}");
  const cd phi2 = -(ctx.state.y + 1.0) / (2.0 * ctx.state.rho) * phi_gamma_quotient(n, ctx.l);
  const cd lambda = (ctx.state.y - 1.0) / (2.0 * ctx.state.rho) * double(n + ctx.l + 1) - double(ctx.sigma);
  const cd lhs = phi2 * (seq.beta[n + 1] + 1.0 / seq.beta[n]);
  const double scale = std::max({std::abs(lambda), std::abs(phi2 * seq.beta[n + 1]), std::abs(phi2 / seq.beta[n])});
  return std::abs(lhs - lambda) / scale;
}

TailCoefficient tail_coefficient(int n1, const CoeffContext& ctx) {
  require(n1 >= 1, ErrorKind::IndexError, "tail coefficient needs n1 >= 1");
  const int l = ctx.l;
  const ScaledCd q = q_of_r(n1, l, r_closed_scaled(n1, ctx));
  const cd ph = phi(n1, l, ctx.state);
  const double sign = n1 % 2 == 0 ? 1.0 : -1.0;
  TailCoefficient out;
  out.exact = sign * (q * specfun::make_scaled(std::sqrt(1.0 / (n1 + l + 1.0)) / ph)).value();

  // 2^{l+1/2} Gamma(l+1+kappa)/Gamma(2l+1) omega^{n+1} n^{-kappa} (1-omega^2)^{l-kappa} / n,
  // divided by the constant part i sqrt((y+1)/(2 rho)) of phi_n.
  const cd kappa = ctx.kappa;
  const cd w = ctx.omega2;
  const cd log_est = (l + 0.5) * std::log(2.0) + specfun::ln_gamma(cd(l + 1.0) + kappa) -
                     specfun::ln_gamma(cd(2.0 * l + 1.0)) - kappa * std::log(double(n1)) +
                     (double(l) - kappa) * std::log(1.0 - w * w) - std::log(double(n1));
  const ScaledCd power = specfun::make_scaled(std::exp(log_est)) * ScaledCd{(n1 + 1) * std::log(std::abs(w)),
                                                                            std::polar(1.0, (n1 + 1) * std::arg(w))};
  const cd phi_const = cd(0.0, 1.0) * std::sqrt((ctx.state.y + 1.0) / (2.0 * ctx.state.rho));
  out.asymptotic = (power / specfun::make_scaled(phi_const)).value();
  return out;
}

}  // namespace tmat
