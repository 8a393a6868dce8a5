#include <cmath>
#include <vector>

#include "doctest.h"
#include "tmat/coeffs.hpp"
#include "tmat/errors.hpp"

using namespace tmat;

namespace {

CoeffContext context(int l, cd y, double rho, int sigma) {
  return make_coeff_context(l, make_state(y, rho, BranchSelection::TBranch), sigma);
}

// Residual of the R recurrence at n from the scaled sequence, normalised by R_n.
double residual_at(int n, const CoeffContext& ctx, const CoeffSequence& s) {
  const ScaledCd ref = s.r_scaled(n);
  return r_recurrence_residual(n, ctx, (s.r_scaled(n - 1) / ref).value(), 1.0, (s.r_scaled(n + 1) / ref).value());
}

const std::vector<cd> kComplexYs = {cd(2.0), cd(0.5), cd(7.0), cd(2.0, 1.0), cd(-2.0, 3.0), cd(0.3, 0.2)};
const std::vector<cd> kNegativeYs = {cd(-0.3), cd(-2.25), cd(-5.0), cd(-9.7)};

}  // namespace

TEST_CASE("context and branch handling") {
  const auto c = context(0, cd(2.0), 1.0, -1);
  CHECK(std::abs(std::abs(c.omega2) - 1.0) < 1e-14);
  CHECK(std::abs(c.omega2 * std::conj(c.omega2) - 1.0) < 1e-14);
  // omega2 = (y-1)/(y+1) - i 2 sqrt(y)/(y+1)
  const cd y(2.0, 1.0);
  const auto d = context(1, y, 1.0, 1);
  CHECK(std::abs(d.omega2 - ((y - 1.0) / (y + 1.0) - cd(0, 2) * std::sqrt(y) / (y + 1.0))) < 1e-15);
  const auto t = context(0, cd(-9.0), 1.0, 1);
  CHECK(t.negative_real());
  CHECK(t.omega2 == cd(0.5));
  CHECK(t.kappa == cd(1.0 / 3.0));

  auto kind = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK(kind([] { make_coeff_context(0, make_state(cd(-4.0), 1.0, BranchSelection::Complex), 1); }) ==
        ErrorKind::BranchMismatch);
  CHECK(kind([] { context(0, cd(1.0 + 1e-8), 1.0, 1); }) == ErrorKind::DegenerateEnergy);
  CHECK(kind([] { context(0, cd(-1.0), 1.0, 1); }) == ErrorKind::BranchExclusion);
}

TEST_CASE("r_closed examples") {
  const auto c = context(0, cd(-9.0), 1.0, 0);
  CHECK(r_closed(-1, c) == cd(1.0));
  CHECK(std::abs(r_closed(0, c) - 0.5) < 1e-15);

  const auto g = context(1, cd(2.0), 1.0, -1);
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    worst = std::max(worst, r_recurrence_residual(n, g, r_closed(n - 1, g), r_closed(n, g), r_closed(n + 1, g)));
  }
  CHECK(worst < 1e-9);

  const auto h = context(0, cd(-4.0), 1.0, 1);
  const cd r0 = r_closed(0, h), r1 = r_closed(1, h), r2 = r_closed(2, h);
  CHECK(r_recurrence_residual(1, h, r0, r1, r2) < 1e-10);
  CHECK(r_recurrence_residual(3, g, r_closed(2, g), r_closed(3, g), r_closed(4, g) * (1.0 + 1e-3)) > 1e-4);

  // Free case: rho sigma = 0.
  const auto f = context(2, cd(3.0, 0.5), 1.0, 0);
  CHECK(r_recurrence_residual(4, f, r_closed(3, f), r_closed(4, f), r_closed(5, f)) < 1e-10);
}

TEST_CASE("closed forms satisfy the three-term recurrence across the grid") {
  double worst = 0.0;
  std::vector<cd> ys = kComplexYs;
  ys.insert(ys.end(), kNegativeYs.begin(), kNegativeYs.end());
  for (int l = 0; l <= 5; ++l) {
    for (const cd y : ys) {
      for (double rho : {0.5, 1.0, 2.0}) {
        for (int sigma : {-1, 1}) {
          const auto ctx = context(l, y, rho, sigma);
          const auto s = beta_seq(51, ctx);
          for (int n = 0; n <= 50; ++n) {
            const double r = residual_at(n, ctx, s);
            if (r > worst) {
              worst = r;
              CAPTURE(l);
              CAPTURE(y);
              CAPTURE(rho);
              CAPTURE(sigma);
              CAPTURE(n);
              CHECK(r < 1e-9);
            }
          }
          for (int n = 0; n < 50; ++n) CHECK(beta_recurrence_residual(n, ctx, s) < 1e-8);
        }
      }
    }
  }
  MESSAGE("worst normalised residual " << worst);
}

TEST_CASE("q_of_r") {
  const cd r(0.3, -1.2);
  CHECK(q_of_r(3, 0, r) == -r);
  CHECK(q_of_r(0, 1, r) == r);
  CHECK(std::abs(q_of_r(2, 1, r) - r / 2.0) < 1e-16);
  const ScaledCd s = specfun::make_scaled(r);
  CHECK(std::abs(q_of_r(5, 3, s).value() - q_of_r(5, 3, r)) < 1e-15);
}

TEST_CASE("beta sequence identities") {
  const auto ctx = context(0, cd(2.0), 1.0, -1);
  const auto s = beta_seq(21, ctx);
  double worst = 0.0;
  for (int n = 0; n <= 20; ++n) worst = std::max(worst, beta_recurrence_residual(n, ctx, s));
  CHECK(worst < 1e-8);

  cd prod = 1.0;
  for (int k = 2; k <= 5; ++k) prod *= s.beta[k];
  CHECK(std::abs(prod - s.Q(5) / s.Q(1)) < 1e-12 * std::abs(prod));
  CHECK(std::abs(s.beta_product(2, 5) - prod) < 1e-12 * std::abs(prod));

  // Ratios do not depend on R_{-1}.
  const auto a = beta_seq(30, context(2, cd(-2.0, 3.0), 0.5, 1), cd(1.0));
  const auto b = beta_seq(30, context(2, cd(-2.0, 3.0), 0.5, 1), cd(-3.7, 12.0));
  CHECK(std::abs(b.R(7) / a.R(7) - cd(-3.7, 12.0)) < 1e-12 * 12.6);
  for (int n = 0; n <= 30; ++n) CHECK(std::abs(a.beta[n] - b.beta[n]) < 1e-13 * std::abs(a.beta[n]));
  CHECK(std::abs(a.q_ratio(20, 3) - b.q_ratio(20, 3)) < 1e-12 * std::abs(a.q_ratio(20, 3)));
}

TEST_CASE("bound-state energies are reported as zero divisors") {
  // rho / sqrt(t) = l + 1 makes (l + 1 + kappa)_{n+1} vanish for sigma = -1.
  try {
    beta_seq(5, context(0, cd(-4.0), 2.0, -1));
    FAIL("expected ZeroDivisor");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroDivisor);
  }
  // Excited level: rho / sqrt(t) = 2 with l = 0 is the n = 1 state.
  try {
    beta_seq(5, context(0, cd(-0.25), 1.0, -1));
    FAIL("expected ZeroDivisor");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroDivisor);
  }
}

TEST_CASE("large-n sequences stay finite in scaled form") {
  const auto ctx = context(3, cd(-1.02), 1.0, 1);  // omega2 ~ 0.005
  const auto s = beta_seq(400, ctx);
  CHECK(std::isfinite(s.q_scaled(400).log_mag));
  CHECK(s.q_scaled(400).log_mag < -1000.0);
  CHECK(std::isfinite(std::abs(s.beta[400])));
}

TEST_CASE("tail coefficient asymptotics") {
  // Real y > 0: |c| ~ 1/n.
  const auto real = context(0, cd(2.0), 1.0, -1);
  const double c50 = std::abs(tail_coefficient(50, real).exact);
  const double c400 = std::abs(tail_coefficient(400, real).exact);
  const double slope = std::log(c400 / c50) / std::log(8.0);
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.05));

  // Negative real y with sqrt(t) = 2: geometric ratio 1/3.
  const auto neg = context(0, cd(-4.0), 1.0, 1);
  const double ratio = std::abs(tail_coefficient(201, neg).exact / tail_coefficient(200, neg).exact);
  CHECK(ratio == doctest::Approx(1.0 / 3.0).epsilon(0.02));

  // Attractive decays slower: exponent -kappa - 1 after removing the geometric factor.
  auto exponent = [](const CoeffContext& c) {
    const double q = c.omega2.real();
    const double a = std::abs(tail_coefficient(100, c).exact) / std::pow(q, 101);
    const double b = std::abs(tail_coefficient(400, c).exact) / std::pow(q, 401);
    return std::log(b / a) / std::log(4.0);
  };
  const double rep = exponent(context(0, cd(-4.0), 1.0, 1));
  const double att = exponent(context(0, cd(-4.0), 1.0, -1));
  CHECK(rep < att);
  CHECK(rep == doctest::Approx(-1.5).epsilon(0.03));
  CHECK(att == doctest::Approx(-0.5).epsilon(0.05));

  // The estimate tracks the exact coefficient up to O(1/n).
  for (const auto& c : {real, neg, context(2, cd(2.0, 1.0), 0.5, 1), context(1, cd(5.0), 2.0, 1)}) {
    const auto t = tail_coefficient(400, c);
    CHECK(std::abs(t.exact / t.asymptotic - 1.0) < 0.02);
  }
}
