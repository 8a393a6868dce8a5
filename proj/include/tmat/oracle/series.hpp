#pragma once

// Deterministic series summation with optional Wynn epsilon acceleration.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tmat/errors.hpp"

namespace tmat::oracle {

enum class Acceleration { None, WynnEpsilon };

template <class T>
struct SeriesResult {
  T value{};
  double remainder_estimate = 0.0;
  int terms = 0;
  bool converged = false;
};

template <class T>
struct Extrapolation {
  T value{};
  double error = 0.0;
};

namespace detail {

inline double abs_of(double v) { return std::abs(v); }
inline double abs_of(const std::complex<double>& v) { return std::abs(v); }

/// Highest even column of the epsilon table built from `sums`.
template <class T>
T epsilon_table_estimate(std::span<const T> sums) {
  const std::size_t n = sums.size();
  if (n < 3) return sums.back();
  std::vector<T> previous(n + 1, T{});  // eps_{-1} = 0
  std::vector<T> current(sums.begin(), sums.end());
  T best = sums.back();
  for (std::size_t k = 1; current.size() > 1; ++k) {
    std::vector<T> next(current.size() - 1);
    bool degenerate = false;
    for (std::size_t j = 0; j + 1 < current.size(); ++j) {
      const T diff = current[j + 1] - current[j];
      const double scale = std::max(abs_of(current[j + 1]), abs_of(current[j]));
      if (abs_of(diff) <= 1e-15 * scale || abs_of(diff) < 1e-300) {
        degenerate = true;
        break;
      }
      next[j] = previous[j + 1] + T(1) / diff;
    }
    if (degenerate) break;
    previous = std::move(current);
    current = std::move(next);
    if (k % 2 == 0) best = current.back();
  }
  return best;
}

}  // namespace detail

/// Wynn epsilon extrapolation of a sequence of partial sums. The error is
/// taken from the spread of the estimates obtained with the last one and two
/// partial sums dropped.
template <class T>
Extrapolation<T> wynn_epsilon(std::span<const T> sums) {
  require(!sums.empty(), ErrorKind::InvalidArgument, "wynn_epsilon needs at least one partial sum");
  const T e0 = detail::epsilon_table_estimate(sums);
  if (sums.size() < 5) {
    const double spread = sums.size() > 1 ? detail::abs_of(sums.back() - sums[sums.size() - 2]) : 0.0;
    return {e0, spread};
  }
  const T e1 = detail::epsilon_table_estimate(sums.first(sums.size() - 1));
  const T e2 = detail::epsilon_table_estimate(sums.first(sums.size() - 2));
  const double floor = 8.0 * std::numeric_limits<double>::epsilon() * detail::abs_of(e0);
  return {e0, std::max(detail::abs_of(e0 - e1) + detail::abs_of(e0 - e2), floor)};
}

/// Sum terms produced by `next_term(k)`, k = 0, 1, ... until the remainder
/// estimate drops below `rel_tol * |value| + abs_tol`. Throws SlowConvergence
/// when the term cap is reached first.
template <class Generator>
auto sum_series(Generator&& next_term, double rel_tol, Acceleration accel, int max_terms = 2000,
                double abs_tol = 0.0) {
  using T = std::decay_t<decltype(next_term(0))>;
  SeriesResult<T> result;
  std::vector<T> sums;
  sums.reserve(64);
  T running{};
  double last_mag = 0.0;
  double prev_mag = 0.0;
  int small_run = 0;

  // The epsilon table is rebuilt over a bounded window of recent partial sums.
  constexpr std::size_t window = 60;

  for (int k = 0; k < max_terms; ++k) {
    const T term = next_term(k);
    running += term;
    sums.push_back(running);
    prev_mag = last_mag;
    last_mag = detail::abs_of(term);
    result.terms = k + 1;

    if (accel == Acceleration::None) {
      const double target = rel_tol * detail::abs_of(running) + abs_tol;
      small_run = last_mag <= target ? small_run + 1 : 0;
      if (small_run >= 3) {
        const double ratio = prev_mag > 0.0 ? last_mag / prev_mag : 0.0;
        result.value = running;
        result.remainder_estimate =
            ratio < 0.9 ? last_mag * ratio / (1.0 - ratio) + last_mag : last_mag * (k + 1);
        result.converged = result.remainder_estimate <= 10.0 * target || last_mag == 0.0;
        if (result.converged) return result;
      }
      continue;
    }

    if (sums.size() < 6) continue;
    const std::size_t start = sums.size() > window ? sums.size() - window : 0;
    const auto ext = wynn_epsilon(std::span<const T>(sums).subspan(start));
    const double target = rel_tol * detail::abs_of(ext.value) + abs_tol;
    if (ext.error <= target) {
      result.value = ext.value;
      result.remainder_estimate = ext.error;
      result.converged = true;
      return result;
    }
    result.value = ext.value;
    result.remainder_estimate = ext.error;
  }
  if (accel == Acceleration::None) {
    result.value = running;
    result.remainder_estimate = last_mag * result.terms;
  }
  throw Error(ErrorKind::SlowConvergence,
              "series not converged after " + std::to_string(max_terms) +
                  " terms, remainder estimate " + std::to_string(result.remainder_estimate));
}

}  // namespace tmat::oracle
