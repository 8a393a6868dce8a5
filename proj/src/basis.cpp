#include "tmat/basis.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "tmat/errors.hpp"
#include "tmat/oracle/quadrature.hpp"
#include "tmat/oracle/series.hpp"
#include "tmat/specfun.hpp"

namespace tmat {

namespace {

constexpr double kPi = std::numbers::pi;

// log of 4^{l+1} l! sqrt(n! (n+l+1) / (pi (n+2l+1)!)).
double log_eta_norm(int n, int l) {
  return (l + 1) * std::log(4.0) + std::lgamma(l + 1.0) +
         0.5 * (std::lgamma(n + 1.0) + std::log(n + l + 1.0) - std::log(kPi) - std::lgamma(n + 2.0 * l + 2.0));
}

// log of k^l / (k^2 + 1)^{l + 3/2}; -inf at k = 0 for l > 0.
double log_envelope(int l, double k) {
  if (l == 0) return -1.5 * std::log1p(k * k);
  return l * std::log(k) - (l + 1.5) * std::log1p(k * k);
}

void check_indices(int n, int l) {
  require(n >= 0 && l >= 0, ErrorKind::IndexError, "basis needs n, l >= 0");
}

}  // namespace

double upsilon(int n, int l) {
  check_indices(n, l);
  return 1.0 / (n + l + 1.0);
}

double eta(int n, int l, double k) {
  check_indices(n, l);
  require(std::isfinite(k) && k >= 0.0, ErrorKind::InvalidArgument, "eta needs finite k >= 0");
  if (k == 0.0 && l > 0) return 0.0;
  const double u = (k * k - 1.0) / (k * k + 1.0);
  return std::exp(log_eta_norm(n, l) + log_envelope(l, k)) * specfun::gegenbauer(n, l + 1.0, u);
}

Eigen::VectorXd eta_sequence(int nmax, int l, double k) {
  check_indices(nmax, l);
  require(std::isfinite(k) && k >= 0.0, ErrorKind::InvalidArgument, "eta needs finite k >= 0");
  if (k == 0.0 && l > 0) return Eigen::VectorXd::Zero(nmax + 1);
  const double u = (k * k - 1.0) / (k * k + 1.0);
  Eigen::VectorXd out = specfun::gegenbauer_sequence(nmax, l + 1.0, u);
  double norm = std::exp(log_eta_norm(0, l) + log_envelope(l, k));
  out[0] *= norm;
  for (int n = 1; n <= nmax; ++n) {
    norm *= std::sqrt(n * (n + l + 1.0) / ((n + l) * (n + 2.0 * l + 1.0)));
    out[n] *= norm;
  }
  return out;
}

double eta_hypergeometric(int n, int l, double k) {
  check_indices(n, l);
  require(std::isfinite(k) && k >= 0.0, ErrorKind::InvalidArgument, "eta needs finite k >= 0");
  if (k == 0.0 && l > 0) return 0.0;
  using Mp = boost::multiprecision::cpp_bin_float_50;
  const Mp pi = boost::math::constants::pi<Mp>();
  // Gamma(l + 3/2) = sqrt(pi) prod_{j=0}^{l} (j + 1/2); (n+2l+1)!/n! = prod_{j=1}^{2l+1} (n + j).
  Mp gamma_half = sqrt(pi);
  for (int j = 0; j <= l; ++j) gamma_half *= Mp(j) + Mp(1) / 2;
  Mp rising = 1;
  for (int j = 1; j <= 2 * l + 1; ++j) rising *= Mp(n + j);
  const Mp kk = Mp(k) * Mp(k);
  const Mp envelope = pow(Mp(k), l) / pow(kk + 1, Mp(l) + Mp(3) / 2);
  const Mp f = specfun::hyp2f1_terminating(n, Mp(n + 2 * l + 2), Mp(l) + Mp(3) / 2, 1 / (kk + 1));
  const Mp value = 2 / gamma_half * sqrt(Mp(n + l + 1) * rising) * envelope * f;
  return static_cast<double>(value);
}

double eta_recurrence_residual(int n, int l, double k) {
  check_indices(n, l);
  const Eigen::VectorXd e = eta_sequence(n + 1, l, k);
  const double u = (k * k - 1.0) / (k * k + 1.0);
  const double lhs = u * e[n];
  const double up = 0.5 * std::sqrt((n + 1.0) * (n + 2.0 * l + 2.0) / ((n + l + 1.0) * (n + l + 2.0))) * e[n + 1];
  const double down =
      n == 0 ? 0.0 : 0.5 * std::sqrt(n * (n + 2.0 * l + 1.0) / ((n + l) * (n + l + 1.0))) * e[n - 1];
  const double scale = std::max({std::abs(lhs), std::abs(up), std::abs(down)});
  if (scale == 0.0) return 0.0;
  return std::abs(lhs - up - down) / scale;
}

cd sph_harm(int l, int m, double theta, double phi) {
  require(l >= 0, ErrorKind::IndexError, "sph_harm needs l >= 0");
  require(std::abs(m) <= l, ErrorKind::IndexError,
          "sph_harm needs |m| <= l, got l=" + std::to_string(l) + " m=" + std::to_string(m));
  const int am = std::abs(m);
  // std::sph_legendre includes the Condon-Shortley factor (-1)^m.
  const cd y = std::sph_legendre(l, am, theta) * std::polar(1.0, am * phi);
  if (m >= 0) return y;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
}

Direction direction_of(const MomentumVector& k) {
  const double r = k.norm();
  if (r == 0.0) return {};
  return {std::acos(std::clamp(k.z() / r, -1.0, 1.0)), std::atan2(k.y(), k.x())};
}

cd h_basis(const SpectralIndex& idx, const MomentumVector& k, double gamma) {
  idx.validate();
  require(std::isfinite(gamma) && gamma > 0.0, ErrorKind::InvalidArgument, "gamma must be positive");
  const double q = k.norm() / gamma;
  if (q == 0.0 && idx.l > 0) return 0.0;
  const Direction d = direction_of(k);
  return eta(idx.n, idx.l, q) * sph_harm(idx.l, idx.m, d.theta, d.phi);
}

double radial_overlap(int n1, int n2, int l, int points) {
  check_indices(std::max(n1, n2), l);
  require(n1 >= 0 && n2 >= 0, ErrorKind::IndexError, "radial_overlap needs n >= 0");
  const auto rule = oracle::map_rule(oracle::gauss_legendre(points), 0.0, kPi);
  const int nmax = std::max(n1, n2);
  double sum = 0.0;
  for (int i = 0; i < points; ++i) {
    const double q = std::tan(0.5 * rule.nodes(i));
    const Eigen::VectorXd e = eta_sequence(nmax, l, q);
    sum += rule.weights(i) * q * q * e[n1] * e[n2] * 0.5 * (1.0 + q * q);
  }
  return sum;
}

cd basis_inner_product(const SpectralIndex& a, const SpectralIndex& b, double gamma, int radial_points) {
  a.validate();
  b.validate();
  require(std::isfinite(gamma) && gamma > 0.0, ErrorKind::InvalidArgument, "gamma must be positive");
  const int lmax = std::max(a.l, b.l);
  // Product rule exact for Y_a Y_b^*: degree 2 lmax in cos theta, |m| <= 2 lmax in phi.
  const int nt = lmax + 2;
  const int np = 2 * lmax + 3;
  const auto& gl = oracle::gauss_legendre(nt);
  cd angular = 0.0;
  for (int i = 0; i < nt; ++i) {
    const double theta = std::acos(gl.nodes(i));
    for (int j = 0; j < np; ++j) {
      const double phi = 2.0 * kPi * j / np;
      angular += gl.weights(i) * (2.0 * kPi / np) * sph_harm(a.l, a.m, theta, phi) *
                 std::conj(sph_harm(b.l, b.m, theta, phi));
    }
  }
  // The radial integral couples eta_{n,l} with different l only when the angular part vanishes anyway.
  const auto rule = oracle::map_rule(oracle::gauss_legendre(radial_points), 0.0, kPi);
  double radial = 0.0;
  for (int i = 0; i < radial_points; ++i) {
    const double q = std::tan(0.5 * rule.nodes(i));
    radial += rule.weights(i) * q * q * eta(a.n, a.l, q) * eta(b.n, b.l, q) * 0.5 * (1.0 + q * q);
  }
  return gamma * gamma * gamma * radial * angular;
}

double potential_element(const PhysicalSystem& sys, const MomentumVector& k, const MomentumVector& p) {
  sys.validate(true);
  const double d2 = (k - p).squaredNorm();
  require(d2 > 0.0, ErrorKind::ForwardSingularity, "potential is singular at k = p");
  return sys.sigma * sys.alpha * std::sqrt(2.0 / kPi) / d2;
}

double potential_partial_wave(const PhysicalSystem& sys, const MomentumVector& k, const MomentumVector& p, int l) {
  sys.validate(true);
  require(l >= 0, ErrorKind::IndexError, "partial wave needs l >= 0");
  const double kn = k.norm();
  const double pn = p.norm();
  require(kn > 0.0 && pn > 0.0 && kn != pn, ErrorKind::ForwardSingularity,
          "partial-wave form needs 0 < |k| != |p|");
  const double zeta = (kn * kn + pn * pn) / (2.0 * kn * pn);
  const double c = std::clamp(k.dot(p) / (kn * pn), -1.0, 1.0);
  return sys.sigma * sys.alpha * std::sqrt(2.0 / kPi) * (2.0 * l + 1.0) * specfun::legendre_q(l, zeta) *
         std::legendre(l, c) / (2.0 * kn * pn);
}

PotentialExpansion potential_expansion(const PhysicalSystem& sys, const MomentumVector& k, const MomentumVector& p,
                                       int n_max, int l_max, ExpansionAcceleration accel) {
  sys.validate(true);
  require(n_max >= 0 && l_max >= 0, ErrorKind::InvalidArgument, "truncation bounds must be >= 0");
  const double g = sys.gamma;
  const double prefactor = sys.sigma * sys.alpha / (2.0 * std::pow(g, 4)) * std::pow(2.0 * kPi, 1.5) *
                           std::sqrt(k.squaredNorm() + g * g) * std::sqrt(p.squaredNorm() + g * g);
  const Direction dk = direction_of(k);
  const Direction dp = direction_of(p);
  const double qk = k.norm() / g;
  const double qp = p.norm() / g;

  PotentialExpansion out;
  for (int l = 0; l <= l_max; ++l) {
    cd angular = 0.0;
    for (int m = -l; m <= l; ++m) {
      angular += sph_harm(l, m, dk.theta, dk.phi) * std::conj(sph_harm(l, m, dp.theta, dp.phi));
    }
    const Eigen::VectorXd ek = eta_sequence(n_max, l, qk);
    const Eigen::VectorXd ep = eta_sequence(n_max, l, qp);
    std::vector<double> partial(n_max + 1);
    double running = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      running += upsilon(n, l) * ek[n] * ep[n];
      partial[n] = running;
    }
    double shell = running;
    double err = n_max > 0 ? std::abs(partial[n_max] - partial[n_max - 1]) : std::abs(running);
    if (accel == ExpansionAcceleration::WynnPerShell && n_max >= 4) {
      const auto ext = oracle::wynn_epsilon(std::span<const double>(partial));
      shell = ext.value;
      err = ext.error;
    }
    const double contribution = prefactor * shell * angular.real();
    out.shells.push_back(contribution);
    out.shell_error.push_back(std::abs(prefactor * angular.real()) * err);
    out.value += contribution;
  }
  return out;
}

}  // namespace tmat
