#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tmat/errors.hpp"
#include "tmat/opmatrix.hpp"

using namespace tmat;

namespace {

DimensionlessState st(cd y, double rho = 1.0) { return make_state(y, rho, BranchSelection::TBranch); }

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("phi examples and the duplication identity") {
  const auto s = st(cd(2.0, 1.0), 1.5);
  const cd pre = cd(0, 1) * std::sqrt((s.y + 1.0) / (2.0 * s.rho));
  CHECK(std::abs(phi(0, 0, s) - cd(0, 1) * std::sqrt((s.y + 1.0) / (4.0 * s.rho))) < 1e-15);
  CHECK(std::abs(phi(0, 1, s) - pre * std::sqrt(0.75)) < 1e-15);
  const auto real = st(cd(3.0));
  CHECK(std::abs(phi(4, 2, real).real()) == 0.0);
  CHECK((phi(4, 2, real) * phi(4, 2, real)).real() < 0.0);

  const auto seq = phi_sequence(30, 3, s);
  for (int n = 0; n < 30; ++n) {
    CHECK(std::abs(seq.phi[n] - phi(n, 3, s)) < 1e-14 * std::abs(seq.phi[n]));
    CHECK(std::abs(seq.phi2[n] - seq.phi[n] * seq.phi[n]) < 1e-13 * std::abs(seq.phi2[n]));
  }

  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int n = 0; n <= 30; n += 3) {
    for (double z : {0.5, 1.0, 2.5, 7.0}) {
      const double lhs = std::lgamma(0.5 * n + z) + std::lgamma(0.5 * (n + 1) + z);
      const double rhs = (-2.0 * z - n + 1.0) * std::log(2.0) + std::log(sqrt_pi) + std::lgamma(n + 2.0 * z);
      CHECK(std::abs(std::exp(lhs - rhs) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("a_matrix") {
  const auto a1 = a_matrix(0, st(cd(3.0)), 1);
  CHECK(a1.entries(0, 0) == cd(1.0));

  const auto a = a_matrix(2, st(cd(2.0, 1.0), 0.7), 12);
  CHECK(a.entries == a.entries.transpose());
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      if (std::abs(i - j) > 1) CHECK(a.entries(i, j) == cd(0.0));

  const auto d = a_matrix(1, st(cd(-1.0)), 8);
  CHECK(max_abs(d.entries - Eigen::MatrixXcd(d.entries.diagonal().asDiagonal())) == 0.0);

  // The basis integral reproduces the tridiagonal closed form.
  const auto s = st(cd(0.7, 0.4), 1.3);
  const auto ac = a_matrix(1, s, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(std::abs(a_element_quadrature(i, j, 1, s) - ac.entries(i, j)) < 1e-10);
}

TEST_CASE("sigma shift bookkeeping") {
  const auto a = a_matrix(0, st(cd(2.0)), 5);
  const auto s = shift_by_sigma(a, -1);
  CHECK(s.shifted);
  CHECK(s.entries(2, 2) == a.entries(2, 2) + 1.0);
  CHECK(kind_of([&] { shift_by_sigma(s, -1); }) == ErrorKind::InvalidArgument);
  CHECK(unshift(s).entries == a.entries);
  CHECK(kind_of([&] { unshift(a); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("A inverse from quadrature") {
  // Diagonal special point: A^{-1}_{nn} = 1 / A_{nn}, off-diagonals vanish.
  const auto sp = st(cd(-1.0), 0.8);
  const auto ad = a_matrix(2, sp, 6);
  for (int n = 0; n < 6; ++n) {
    const cd v = a_inverse_quadrature(n, n, 2, sp);
    CHECK(v.real() < 0.0);
    CHECK(std::abs(v - 1.0 / ad.entries(n, n)) < 1e-8 * std::abs(v));
    CHECK(std::abs(a_inverse_quadrature(n, (n + 1) % 6, 2, sp)) < 1e-10);
  }

  // A times the quadrature inverse is the identity away from the last rows.
  for (const cd y : {cd(2.0, 1.0), cd(-3.0, 0.5), cd(0.4, 2.0)}) {
    const int N = 20;
    const auto s = st(y, 1.0);
    const auto Ainv = a_inverse_quadrature_matrix(1, s, N);
    const auto A = a_matrix(1, s, N).entries;
    const Eigen::MatrixXcd P = (A * Ainv).topLeftCorner(N - 5, N - 5);
    CAPTURE(y);
    CHECK(max_abs(P - Eigen::MatrixXcd::Identity(N - 5, N - 5)) < 1e-6);
  }

  // Real y > 0: principal value plus residue.
  {
    const int N = 16;
    const auto s = st(cd(2.0), 1.0);
    const auto Ainv = a_inverse_quadrature_matrix(0, s, N);
    const Eigen::MatrixXcd P = (a_matrix(0, s, N).entries * Ainv).topLeftCorner(N - 5, N - 5);
    CHECK(max_abs(P - Eigen::MatrixXcd::Identity(N - 5, N - 5)) < 1e-6);
    CHECK(std::abs(a_inverse_quadrature(2, 3, 0, s) - Ainv(2, 3)) < 1e-8);
    CHECK(Ainv(0, 0).imag() < 0.0);
  }
}

TEST_CASE("b factor and its inverse") {
  const auto s = st(cd(2.0), 1.0);
  const int N = 40;
  const auto c = make_chain(0, s, -1, N);
  const auto b = b_factor(c.beta, c.phi, N).entries;
  const auto A = shift_by_sigma(a_matrix(0, s, N), -1).entries;
  const Eigen::MatrixXcd bbT = b * b.transpose();
  const int I = N - 1;
  CHECK(max_abs((bbT - A).topLeftCorner(I, I)) < 1e-10 * max_abs(A));
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < N; ++m)
      if (m < n || m > n + 1) CHECK(b(n, m) == cd(0.0));

  const auto c1 = make_chain(2, st(cd(-2.0, 3.0)), 1, 1);
  const auto b1 = b_factor(c1.beta, c1.phi, 1).entries;
  CHECK(std::abs(b1(0, 0) * b1(0, 0) - c1.phi.phi2[0] / c1.beta.beta[0]) < 1e-14);

  for (const auto& ch : {make_chain(0, st(cd(2.0)), -1, 30), make_chain(3, st(cd(-2.0, 3.0), 0.5), 1, 30),
                         make_chain(1, st(cd(-4.0), 2.0), 1, 30)}) {
    const auto bb = b_factor(ch.beta, ch.phi, 30).entries;
    const auto B = b_inverse(ch.beta, ch.phi, 30).entries;
    const auto Bd = b_inverse(ch.beta, ch.phi, 30, BInverseForm::DirectProduct).entries;
    CHECK(max_abs(B * bb - Eigen::MatrixXcd::Identity(30, 30)) < 1e-12);
    CHECK(max_abs(B - Bd) < 1e-12 * max_abs(B));
    for (int n = 0; n < 30; ++n) CHECK(std::abs(B(n, n) - 1.0 / bb(n, n)) < 1e-14 * std::abs(B(n, n)));
  }
}

TEST_CASE("closed-form resolvent") {
  const int N = 60;
  for (const auto& [l, y, rho, sigma] : {std::tuple{0, cd(-4.0), 1.0, 1}, std::tuple{1, cd(-2.0, 3.0), 1.0, -1},
                                         std::tuple{2, cd(2.0), 1.0, -1}, std::tuple{0, cd(2.0, 1.0), 0.5, 1}}) {
    CAPTURE(y);
    const auto s = st(y, rho);
    const auto ch = make_chain(l, s, sigma, N);
    const auto R = resolvent_matrix(ch.beta, ch.phi, N).entries;
    const auto Ash = shift_by_sigma(a_matrix(l, s, N), sigma).entries;
    const Eigen::MatrixXcd P = (Ash * R).topLeftCorner(41, 41);
    CHECK(max_abs(P - Eigen::MatrixXcd::Identity(41, 41)) < 1e-7);
    CHECK(max_abs(R - R.transpose()) < 1e-12 * max_abs(R));
    for (int n : {0, 3, 17}) {
      for (int m : {0, 5, 17, 30}) {
        const cd lit = resolvent_closed(n, m, ch.beta, ch.phi);
        CHECK(std::abs(lit - R(n, m)) < 1e-10 * max_abs(R));
        CHECK(std::abs(lit - resolvent_closed(m, n, ch.beta, ch.phi)) < 1e-12 * std::abs(lit));
      }
    }
  }

  // In decaying regimes the infinite resolvent matches the truncated dense inverse.
  for (const cd y : {cd(-4.0), cd(-2.0, 3.0)}) {
    const auto s = st(y);
    const auto ch = make_chain(0, s, -1, N);
    const auto R = resolvent_matrix(ch.beta, ch.phi, N).entries;
    const Eigen::MatrixXcd dense = shift_by_sigma(a_matrix(0, s, N), -1).entries.partialPivLu().inverse();
    CHECK(max_abs((R - dense).topLeftCorner(40, 40)) < 1e-7 * max_abs(dense));
  }

  // sigma = 0 gives A^{-1} itself, as the basis integral does.
  for (const cd y : {cd(-4.0), cd(-2.0, 3.0)}) {
    const auto s = st(y, 1.0);
    const auto ch = make_chain(1, s, 0, 20);
    const auto R = resolvent_matrix(ch.beta, ch.phi, 20).entries;
    const auto Q = a_inverse_quadrature_matrix(1, s, 20);
    CHECK(max_abs((R - Q).topLeftCorner(12, 12)) < 1e-8 * max_abs(Q));
  }
}

TEST_CASE("g sequence") {
  const auto free = make_chain(1, st(cd(2.0, 1.0)), 0, 30);
  for (int n = 0; n < 30; ++n) CHECK(free.g.g[n] == cd(0.5));
  CHECK(max_abs(free.g.G() - Eigen::VectorXcd::Ones(30)) == 0.0);

  // g_0 = (phi_0^2 + sigma beta_0)/(2 phi_0^2 + sigma beta_0) at phi_0^2 = -1, beta_0 = 1/2.
  CoeffSequence beta;
  beta.beta = Eigen::VectorXcd::Constant(1, 0.5);
  PhiSequence ph;
  ph.phi = Eigen::VectorXcd::Constant(1, cd(0, 1));
  ph.phi2 = Eigen::VectorXcd::Constant(1, -1.0);
  CHECK(std::abs(g_sequence(beta, ph, 1, 1).g[0] - 1.0 / 3.0) < 1e-15);

  double worst = 0.0;
  for (const auto& ch : {make_chain(0, st(cd(2.0)), -1, 41), make_chain(2, st(cd(2.0, 1.0), 0.5), 1, 41),
                         make_chain(1, st(cd(-4.0)), 1, 41), make_chain(3, st(cd(-2.0, 3.0), 2.0), -1, 41)}) {
    for (int n = 0; n < 40; ++n) worst = std::max(worst, g_recurrence_residual(n, ch.g, ch.beta, ch.phi, ch.sigma));
  }
  CHECK(worst < 1e-10);

  beta.beta[0] = 0.0;
  CHECK(kind_of([&] { g_sequence(beta, ph, 1, 1); }) == ErrorKind::ZeroDivisor);
  beta.beta[0] = 1.0;  // phi_0^2 + sigma beta_0 = 0, so g_0 = 0
  CHECK(kind_of([&] { g_sequence(beta, ph, 1, 1); }) == ErrorKind::DegenerateG);
}

TEST_CASE("C and S matrices") {
  const int N = 40;
  const auto free = make_chain(0, st(cd(2.0, 1.0)), 0, N);
  CHECK(c_matrix(free.g, free.beta, free.phi, N).entries == Eigen::MatrixXcd::Identity(N, N));

  const auto ch = make_chain(0, st(cd(2.0, 1.0)), -1, N);
  CHECK(s_decomposition_check(ch.g, ch.beta, ch.phi, -1, N) < 1e-9);
  CHECK(s_decomposition_check(free.g, free.beta, free.phi, 0, N) < 1e-9);

  for (const auto& c : {ch, make_chain(2, st(cd(-4.0), 0.5), 1, N), make_chain(1, st(cd(2.0)), -1, N)}) {
    const auto C = c_matrix(c.g, c.beta, c.phi, N).entries;
    const Eigen::MatrixXcd sB = s_factor(c.g, c.beta, c.phi, N) * b_inverse(c.beta, c.phi, N).entries;
    CHECK(max_abs(C - sB) < 1e-11 * max_abs(C));
    for (int n = 0; n < N; ++n) {
      CHECK(C(n, n) == cd(1.0));
      for (int m = 0; m < n; ++m) CHECK(C(n, m) == cd(0.0));
    }
    const auto S = s_matrix_explicit(c.beta, c.phi, c.sigma, N).entries;
    CHECK(S == S.transpose());
    CHECK(s_decomposition_check(c.g, c.beta, c.phi, c.sigma, N) < 1e-9);
  }

  // sigma = 0: the diagonal of S is phi_n^2/beta_n + beta_n phi_{n-1}^2.
  const auto S0 = s_matrix_explicit(free.beta, free.phi, 0, N).entries;
  for (int n = 1; n < N; ++n) {
    const cd expect = free.phi.phi2[n] / free.beta.beta[n] + free.beta.beta[n] * free.phi.phi2[n - 1];
    CHECK(std::abs(S0(n, n) - expect) < 1e-14 * std::abs(expect));
  }
}
