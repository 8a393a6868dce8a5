#include "tmat/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "tmat/oracle/quadrature.hpp"
#include "tmat/oracle/series.hpp"

namespace tmat::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

// Bernoulli coefficients B_2k / (2k (2k - 1)) of the Stirling series.
constexpr std::array<double, 8> kStirling = {
    1.0 / 12.0,         -1.0 / 360.0,          1.0 / 1260.0,   -1.0 / 1680.0,
    1.0 / 1188.0,       -691.0 / 360360.0,     1.0 / 156.0,    -3617.0 / 122400.0};

double re(double v) { return v; }
double re(const cd& v) { return v.real(); }
double im(double) { return 0.0; }
double im(const cd& v) { return v.imag(); }

// m >= 0 with v == -m, if v is a non-positive integer.
template <class T>
bool nonpositive_integer(const T& v, int* m = nullptr) {
  const double r = re(v);
  const double tol = 1e-13 * std::max(1.0, std::abs(r));
  if (std::abs(im(v)) > tol) return false;
  const double k = std::round(r);
  if (k > 0.0 || std::abs(r - k) > tol) return false;
  if (m) *m = static_cast<int>(-k);
  return true;
}

// Gamma(c) / (Gamma(p) Gamma(q)) in the requested scalar type.
double gamma_quotient(double c, double p, double q) {
  const double s = gamma_sign(c) * gamma_sign(p) * gamma_sign(q);
  return s * std::exp(ln_gamma(c) - ln_gamma(p) - ln_gamma(q));
}
cd gamma_quotient(cd c, cd p, cd q) { return std::exp(ln_gamma(c) - ln_gamma(p) - ln_gamma(q)); }

template <class T>
T power(T base, T expo) {
  if constexpr (std::is_same_v<T, double>) {
    return std::pow(base, expo);
  } else {
    return std::exp(expo * std::log(base));
  }
}

template <class T>
T direct_series(const T& a, const T& b, const T& c, const T& z, double tol, int max_terms) {
  T term(1);
  T sum(1);
  T comp(0);  // Kahan compensation
  int quiet = 0;
  for (int k = 0; k < max_terms; ++k) {
    term *= (a + T(k)) * (b + T(k)) / ((c + T(k)) * T(k + 1)) * z;
    const T y = term - comp;
    const T t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    quiet = std::abs(term) <= tol * std::abs(sum) ? quiet + 1 : 0;
    if (quiet >= 2) return sum;
  }
  throw Error(ErrorKind::ConvergenceFailure,
              "2F1 power series did not converge in " + std::to_string(max_terms) + " terms");
}

template <class T>
T terminating_sum(int m, const T& b, const T& c, const T& z) {
  T term(1);
  T sum(1);
  for (int k = 0; k < m; ++k) {
    term *= T(k - m) * (b + T(k)) / ((c + T(k)) * T(k + 1)) * z;
    sum += term;
  }
  return sum;
}

// Pfaff: F(a,b;c;z) = (1-z)^{-b} F(c-a, b; c; z/(z-1)) = (1-z)^{-a} F(a, c-b; c; z/(z-1)).
// Returns the arrangement whose transformed series terminates, or else the one
// with the smaller numerator parameters.
template <class T>
struct PfaffForm {
  T p, q, prefactor_exponent;
};

template <class T>
PfaffForm<T> pfaff_form(const Hyp2F1Params<T>& p) {
  const PfaffForm<T> first{p.c - p.a, p.b, p.b};
  const PfaffForm<T> second{p.a, p.c - p.b, p.a};
  if (nonpositive_integer(first.p)) return first;
  if (nonpositive_integer(second.q)) return second;
  return std::abs(first.p) * std::abs(first.q) <= std::abs(second.p) * std::abs(second.q) ? first
                                                                                          : second;
}

template <class T>
bool euler_admissible(const T& e, const T& c) {
  return re(e) > 0.0 && re(c) > re(e);
}

template <class T>
T euler_integral(const Hyp2F1Params<T>& p) {
  // Integrate over the parameter that satisfies Re c > Re e > 0; `o` is the other one.
  const bool use_a = euler_admissible(p.a, p.c);
  const T e = use_a ? p.a : p.b;
  const T o = use_a ? p.b : p.a;
  const T c = p.c;
  const T z = p.z;
  const T one_minus_z = T(1) - z;
  auto integrand = [&](double t, double t_left, double t_right) -> T {
    const T left = power(T(t_left), e - T(1));
    const T right = power(T(t_right), c - e - T(1));
    const T base = T(t_right) + T(t) * one_minus_z;  // 1 - z t
    return left * right * power(base, -o);
  };
  const auto res = oracle::integrate_tanh_sinh(integrand, 0.0, 1.0, std::max(p.tol, 1e-15), 12);
  return gamma_quotient(c, e, c - e) * res.value;
}

template <class T>
T accelerated_series(const Hyp2F1Params<T>& p) {
  T term(1);
  auto gen = [&](int k) -> T {
    if (k == 0) return T(1);
    const int j = k - 1;
    term *= (p.a + T(j)) * (p.b + T(j)) / ((p.c + T(j)) * T(j + 1)) * p.z;
    return term;
  };
  try {
    return oracle::sum_series(gen, std::max(p.tol, 1e-14), oracle::Acceleration::WynnEpsilon, 20000)
        .value;
  } catch (const Error& err) {
    throw Error(ErrorKind::ConvergenceFailure, std::string("2F1 accelerated series: ") + err.what());
  }
}

}  // namespace

cd ln_gamma(cd w) {
  int m = 0;
  if (nonpositive_integer(w, &m) && std::abs(w.imag()) == 0.0 && w.real() == -m) {
    throw Error(ErrorKind::PoleOfGamma, "Gamma has a pole at " + std::to_string(w.real()));
  }
  if (w.real() < 0.5) {
    // Reflection: Gamma(w) Gamma(1-w) = pi / sin(pi w).
    const cd s = std::sin(kPi * w);
    if (s == 0.0) throw Error(ErrorKind::PoleOfGamma, "Gamma has a pole at the requested point");
    return std::log(kPi) - std::log(s) - ln_gamma(1.0 - w);
  }
  // Shift up until the Stirling series is accurate, then undo the shift.
  cd shifted = w;
  cd product = 1.0;
  while (std::abs(shifted) < 17.0) {
    product *= shifted;
    shifted += 1.0;
  }
  const cd inv = 1.0 / shifted;
  const cd inv2 = inv * inv;
  cd series = 0.0;
  cd power = inv;
  for (double coef : kStirling) {
    series += coef * power;
    power *= inv2;
  }
  const cd stirling = (shifted - 0.5) * std::log(shifted) - shifted + 0.5 * std::log(2.0 * kPi) + series;
  return product == 1.0 ? stirling : stirling - std::log(product);
}

double ln_gamma(double x) {
  if (x <= 0.0 && x == std::round(x)) {
    throw Error(ErrorKind::PoleOfGamma, "Gamma has a pole at " + std::to_string(x));
  }
  return std::lgamma(x);
}

double gamma_sign(double x) {
  if (x > 0.0) return 1.0;
  if (x == std::round(x)) throw Error(ErrorKind::PoleOfGamma, "Gamma has a pole at " + std::to_string(x));
  // Between -k and -k+1 the sign is (-1)^k.
  const long k = static_cast<long>(std::ceil(-x));
  return k % 2 == 0 ? 1.0 : -1.0;
}

cd pochhammer_gamma_ratio(cd a, int n) {
  require(n >= 0, ErrorKind::InvalidArgument, "pochhammer needs n >= 0");
  return std::exp(ln_gamma(a + static_cast<double>(n)) - ln_gamma(a));
}

double gegenbauer(int n, double lambda, double x) {
  require(n >= 0, ErrorKind::InvalidArgument, "gegenbauer needs n >= 0");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * lambda * x;
  for (int k = 2; k <= n; ++k) {
    const double next = (2.0 * x * (k + lambda - 1.0) * cur - (k + 2.0 * lambda - 2.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  return cur;
}

Eigen::VectorXd gegenbauer_sequence(int nmax, double lambda, double x) {
  require(nmax >= 0, ErrorKind::InvalidArgument, "gegenbauer needs nmax >= 0");
  Eigen::VectorXd out(nmax + 1);
  out[0] = 1.0;
  if (nmax >= 1) out[1] = 2.0 * lambda * x;
  for (int k = 2; k <= nmax; ++k) {
    out[k] = (2.0 * x * (k + lambda - 1.0) * out[k - 1] - (k + 2.0 * lambda - 2.0) * out[k - 2]) / k;
  }
  return out;
}

double legendre_q(int l, double zeta) {
  require(l >= 0, ErrorKind::InvalidArgument, "legendre_q needs l >= 0");
  require(zeta > 1.0 && std::isfinite(zeta), ErrorKind::DomainError, "legendre_q needs zeta > 1");
  if (l == 0) return 0.5 * std::log1p(2.0 / (zeta - 1.0));
  // Q_l(zeta) = sqrt(pi) l! / (Gamma(l + 3/2) (2 zeta)^{l+1}) 2F1((l+1)/2, (l+2)/2; l+3/2; 1/zeta^2)
  const double log_pref = 0.5 * std::log(kPi) + std::lgamma(l + 1.0) - std::lgamma(l + 1.5) -
                          (l + 1.0) * std::log(2.0 * zeta);
  const double f = hyp2f1(Hyp2F1Params<double>{0.5 * (l + 1), 0.5 * (l + 2), l + 1.5, 1.0 / (zeta * zeta)});
  return std::exp(log_pref) * f;
}

template <class T>
Hyp2F1Route hyp2f1_route(const Hyp2F1Params<T>& p) {
  for (const T& v : {p.a, p.b, p.c, p.z}) {
    require(std::isfinite(re(v)) && std::isfinite(im(v)), ErrorKind::NonFinite, "2F1 argument is not finite");
  }
  if (p.z == T(0)) return Hyp2F1Route::Trivial;
  int ma = 0, mb = 0, mc = 0;
  const bool term_a = nonpositive_integer(p.a, &ma);
  const bool term_b = nonpositive_integer(p.b, &mb);
  const bool c_pole = nonpositive_integer(p.c, &mc);
  if (term_a || term_b) {
    const int m = term_a && term_b ? std::min(ma, mb) : (term_a ? ma : mb);
    if (c_pole && mc < m) throw Error(ErrorKind::DomainError, "2F1 with c a non-positive integer above -n");
    return Hyp2F1Route::Terminating;
  }
  if (c_pole) throw Error(ErrorKind::DomainError, "2F1 with c a non-positive integer");

  const double az = std::abs(p.z);
  const double excess = re(p.c - p.a - p.b);
  if (az > 1.0 + 1e-14) throw Error(ErrorKind::DomainError, "2F1 requires |z| <= 1");
  if (az >= 1.0 - 1e-14 && excess <= 0.0) {
    throw Error(ErrorKind::DomainError, "2F1 diverges on |z| = 1 when Re(c - a - b) <= 0");
  }
  if (std::abs(T(1) - p.z) < 1e-15) return Hyp2F1Route::GaussSum;
  if (az <= 0.75) return Hyp2F1Route::DirectSeries;
  const T w = p.z / (p.z - T(1));
  const auto form = pfaff_form(p);
  if (std::abs(w) <= 0.75 || nonpositive_integer(form.p) || nonpositive_integer(form.q)) {
    return Hyp2F1Route::Pfaff;
  }
  if (euler_admissible(p.a, p.c) || euler_admissible(p.b, p.c)) return Hyp2F1Route::EulerIntegral;
  return Hyp2F1Route::Accelerated;
}

template <class T>
T hyp2f1(const Hyp2F1Params<T>& p) {
  require(p.tol > 0.0, ErrorKind::InvalidArgument, "2F1 tolerance must be positive");
  const Hyp2F1Route route = hyp2f1_route(p);
  constexpr int kMaxTerms = 100000;
  switch (route) {
    case Hyp2F1Route::Trivial:
      return T(1);
    case Hyp2F1Route::Terminating: {
      int ma = 0, mb = 0;
      const bool term_a = nonpositive_integer(p.a, &ma);
      const bool term_b = nonpositive_integer(p.b, &mb);
      if (term_a && (!term_b || ma <= mb)) return terminating_sum(ma, p.b, p.c, p.z);
      return terminating_sum(mb, p.a, p.c, p.z);
    }
    case Hyp2F1Route::GaussSum: {
      if (nonpositive_integer(p.c - p.a) || nonpositive_integer(p.c - p.b)) return T(0);
      const T excess = p.c - p.a - p.b;
      if constexpr (std::is_same_v<T, double>) {
        const double s = gamma_sign(p.c) * gamma_sign(excess) * gamma_sign(p.c - p.a) *
                         gamma_sign(p.c - p.b);
        return s * std::exp(ln_gamma(p.c) + ln_gamma(excess) - ln_gamma(p.c - p.a) -
                            ln_gamma(p.c - p.b));
      } else {
        return std::exp(ln_gamma(p.c) + ln_gamma(excess) - ln_gamma(p.c - p.a) - ln_gamma(p.c - p.b));
      }
    }
    case Hyp2F1Route::DirectSeries:
      return direct_series(p.a, p.b, p.c, p.z, p.tol, kMaxTerms);
    case Hyp2F1Route::Pfaff: {
      const auto form = pfaff_form(p);
      const T w = p.z / (p.z - T(1));
      int m = 0;
      T inner;
      if (nonpositive_integer(form.p, &m)) {
        inner = terminating_sum(m, form.q, p.c, w);
      } else if (nonpositive_integer(form.q, &m)) {
        inner = terminating_sum(m, form.p, p.c, w);
      } else {
        inner = direct_series(form.p, form.q, p.c, w, p.tol, kMaxTerms);
      }
      return power(T(1) - p.z, -form.prefactor_exponent) * inner;
    }
    case Hyp2F1Route::EulerIntegral:
      return euler_integral(p);
    case Hyp2F1Route::Accelerated:
      return accelerated_series(p);
  }
  throw Error(ErrorKind::ConvergenceFailure, "2F1: no evaluation route");
}

template <class T>
std::vector<T> hyp2f1_series_terms(const Hyp2F1Params<T>& p, int count) {
  require(count >= 0, ErrorKind::InvalidArgument, "term count must be non-negative");
  std::vector<T> terms;
  terms.reserve(count);
  T term(1);
  for (int k = 0; k < count; ++k) {
    if (k > 0) term *= (p.a + T(k - 1)) * (p.b + T(k - 1)) / ((p.c + T(k - 1)) * T(k)) * p.z;
    terms.push_back(term);
  }
  return terms;
}

template Hyp2F1Route hyp2f1_route<double>(const Hyp2F1Params<double>&);
template Hyp2F1Route hyp2f1_route<cd>(const Hyp2F1Params<cd>&);
template double hyp2f1<double>(const Hyp2F1Params<double>&);
template cd hyp2f1<cd>(const Hyp2F1Params<cd>&);
template std::vector<double> hyp2f1_series_terms<double>(const Hyp2F1Params<double>&, int);
template std::vector<cd> hyp2f1_series_terms<cd>(const Hyp2F1Params<cd>&, int);

}  // namespace tmat::specfun
