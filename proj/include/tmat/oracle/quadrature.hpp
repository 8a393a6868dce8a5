#pragma once

// Quadrature building blocks: Gauss-Legendre rules, adaptive Gauss-Kronrod and
// double-exponential (tanh-sinh) integration of real or complex integrands.

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <type_traits>
#include <vector>

#include "tmat/errors.hpp"

namespace tmat::oracle {

struct GaussRule {
  Eigen::VectorXd nodes;    // on [-1, 1], ascending
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule. Rules are cached; concurrent reads are safe.
const GaussRule& gauss_legendre(int n);

/// Nodes and weights of `rule` mapped affinely onto [a, b].
GaussRule map_rule(const GaussRule& rule, double a, double b);

template <class R>
struct QuadratureResult {
  R value{};
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (positive half, centre last).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class F>
auto gk15(F& f, double a, double b) {
  using R = std::decay_t<decltype(f(a))>;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const R fc = f(c);
  R kronrod = fc * kWgk[7];
  R gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const R f1 = f(c - dx);
    const R f2 = f(c + dx);
    kronrod += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
  }
  struct Piece {
    R value;
    double error;
  };
  return Piece{kronrod * h, magnitude((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval.
/// Throws QuadratureFailure when the error estimate stays above tolerance.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                        int max_intervals = 2000) {
  using R = std::decay_t<decltype(f(a))>;
  struct Interval {
    double a, b;
    R value;
    double error;
  };
  std::vector<Interval> pieces;
  auto first = detail::gk15(f, a, b);
  pieces.push_back({a, b, first.value, first.error});
  int evaluations = 15;

  auto totals = [&] {
    R sum{};
    double err = 0.0;
    for (const auto& p : pieces) {
      sum += p.value;
      err += p.error;
    }
    return std::pair{sum, err};
  };

  auto [sum, err] = totals();
  while (err > std::max(abs_tol, rel_tol * detail::magnitude(sum))) {
    if (static_cast<int>(pieces.size()) >= max_intervals) {
      throw Error(ErrorKind::QuadratureFailure,
                  "adaptive quadrature did not reach tolerance, error estimate " +
                      std::to_string(err));
    }
    auto worst = std::max_element(pieces.begin(), pieces.end(),
                                  [](const Interval& l, const Interval& r) { return l.error < r.error; });
    const Interval w = *worst;
    const double mid = 0.5 * (w.a + w.b);
    auto left = detail::gk15(f, w.a, mid);
    auto right = detail::gk15(f, mid, w.b);
    evaluations += 30;
    *worst = {w.a, mid, left.value, left.error};
    pieces.push_back({mid, w.b, right.value, right.error});
    std::tie(sum, err) = totals();
  }
  return QuadratureResult<R>{sum, err, evaluations};
}

/// Tanh-sinh quadrature on [a, b]. The integrand is called as
/// f(x, x - a, b - x) so that endpoint singularities can be evaluated from the
/// exact distances rather than from a cancelled difference.
template <class F>
auto integrate_tanh_sinh(F&& f, double a, double b, double rel_tol, int max_level = 10) {
  using R = std::decay_t<decltype(f(a, 0.0, 0.0))>;
  constexpr double half_pi = 0.5 * std::numbers::pi;
  const double half_width = 0.5 * (b - a);
  const double t_max = 4.5;  // endpoint gaps reach ~1e-61 here

  int evaluations = 0;
  auto contribution = [&](double t) -> R {
    const double s = half_pi * std::sinh(t);
    const double ch = std::cosh(s);
    // Distances from the endpoints, in units of the half width:
    // 1 - tanh(s) = 2 / (1 + exp(2s)).
    const double gap_right = 2.0 / (1.0 + std::exp(2.0 * s));
    const double gap_left = 2.0 / (1.0 + std::exp(-2.0 * s));
    const double w = half_pi * std::cosh(t) / (ch * ch);
    if (w == 0.0 || gap_right == 0.0 || gap_left == 0.0) return R{};
    const double x = a + half_width * gap_left;
    ++evaluations;
    return f(x, half_width * gap_left, half_width * gap_right) * w;
  };

  double h = 1.0;
  R sum = contribution(0.0);
  for (double t = h; t <= t_max; t += h) sum += contribution(t) + contribution(-t);
  R estimate = sum * h * half_width;
  double error = detail::magnitude(estimate);

  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_max; t += 2.0 * h) sum += contribution(t) + contribution(-t);
    const R next = sum * h * half_width;
    error = detail::magnitude(next - estimate);
    estimate = next;
    // Convergence is roughly quadratic per level, so once successive levels
    // agree to sqrt(tol) the next one is already at tol.
    if (level >= 3 && error <= rel_tol * detail::magnitude(estimate)) break;
  }
  if (!(error <= std::sqrt(rel_tol) * std::max(1e-300, detail::magnitude(estimate)))) {
    throw Error(ErrorKind::QuadratureFailure,
                "tanh-sinh quadrature did not converge, error estimate " + std::to_string(error));
  }
  return QuadratureResult<R>{estimate, error, evaluations};
}

}  // namespace tmat::oracle
