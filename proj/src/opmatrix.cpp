#include "tmat/opmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tmat/basis.hpp"
#include "tmat/errors.hpp"
#include "tmat/oracle/quadrature.hpp"

namespace tmat {

namespace {

constexpr double kPi = std::numbers::pi;

double parity(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

OperatorMeta meta_of(const DimensionlessState& state, int sigma) { return {state.y, state.rho, sigma}; }

void require_sizes(const CoeffSequence& beta, const PhiSequence& phi, int N, int extra = 0) {
  require(N >= 1, ErrorKind::InvalidArgument, "truncation N must be >= 1");
  require(beta.beta.size() >= N + extra && phi.phi.size() >= N + extra, ErrorKind::IndexError,
          "coefficient or phi sequence shorter than the truncation");
  require(beta.l == phi.l, ErrorKind::InvalidArgument, "beta and phi built for different l");
}

cd checked_beta(const CoeffSequence& beta, int n) {
  const cd b = beta.beta[n];
  require(b != 0.0 && std::isfinite(std::abs(b)), ErrorKind::ZeroDivisor,
          "beta_" + std::to_string(n) + " vanishes or is not finite");
  return b;
}

bool real_positive(cd y) { return y.imag() == 0.0 && y.real() > 0.0; }

// Half-line integral of w(x) q^2 eta_{n1} eta_{n2} in the theta variable.
cd radial_integral(int n1, int n2, int l, const std::function<cd(double)>& weight,
                   const oracle::QuadratureSpec& quad) {
  auto f = [&](double x) { return weight(x) * (x * x * eta(n1, l, x) * eta(n2, l, x)); };
  return oracle::integrate_halfline(f, quad).value;
}

// A^{-1} on an n-point theta grid. With a pole, `h0` holds the numerator at x0.
Eigen::MatrixXcd a_inverse_grid(int l, const DimensionlessState& state, int N, int points, bool pole,
                                const Eigen::MatrixXcd& h0) {
  const auto rule = oracle::map_rule(oracle::gauss_legendre(points), 0.0, kPi);
  const cd y = state.y;
  const double x0 = pole ? std::sqrt(y.real()) : 0.0;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(N, N);
  for (int i = 0; i < points; ++i) {
    const double x = std::tan(0.5 * rule.nodes(i));
    const double jac = 0.5 * (1.0 + x * x);
    const Eigen::VectorXd e = eta_sequence(N - 1, l, x);
    const Eigen::MatrixXd ee = e * e.transpose();
    if (!pole) {
      acc += (rule.weights(i) * jac * x * x * (1.0 + x * x) / (y - x * x)) * ee.cast<cd>();
      continue;
    }
    if (std::abs(x - x0) < 1e-9 * (1.0 + x0)) continue;  // removable, measure-zero node
    const double num = -x * x * (1.0 + x * x) / (x + x0);
    const double w = (1.0 + x0 * x0) / (1.0 + x * x);
    acc += (rule.weights(i) * jac / (x - x0)) * (num * ee.cast<cd>() - w * h0);
  }
  return acc;
}

}  // namespace

double phi_gamma_quotient(int n, int l) {
  require(n >= 0 && l >= 0, ErrorKind::IndexError, "phi needs n, l >= 0");
  return std::exp(std::lgamma(0.5 * n + 1.0) + std::lgamma(0.5 * (n + 3) + l) - std::lgamma(0.5 * (n + 1)) -
                  std::lgamma(0.5 * n + l + 1.0));
}

cd phi(int n, int l, const DimensionlessState& state) {
  return cd(0.0, 1.0) * std::sqrt((state.y + 1.0) / (2.0 * state.rho)) * std::sqrt(phi_gamma_quotient(n, l));
}

PhiSequence phi_sequence(int N, int l, const DimensionlessState& state) {
  require(N >= 0 && l >= 0, ErrorKind::IndexError, "phi sequence needs N, l >= 0");
  PhiSequence out;
  out.l = l;
  out.phi.resize(N);
  out.phi2.resize(N);
  const cd pref = cd(0.0, 1.0) * std::sqrt((state.y + 1.0) / (2.0 * state.rho));
  const cd pref2 = -(state.y + 1.0) / (2.0 * state.rho);
  for (int n = 0; n < N; ++n) {
    const double r = phi_gamma_quotient(n, l);
    out.phi[n] = pref * std::sqrt(r);
    out.phi2[n] = pref2 * r;
  }
  return out;
}

TruncatedOperator a_matrix(int l, const DimensionlessState& state, int N) {
  require(N >= 1 && l >= 0, ErrorKind::InvalidArgument, "a_matrix needs N >= 1, l >= 0");
  const auto ph = phi_sequence(N, l, state);
  TruncatedOperator a{OperatorKind::A, l, Eigen::MatrixXcd::Zero(N, N), meta_of(state, 0), false};
  const cd slope = (state.y - 1.0) / (2.0 * state.rho);
  for (int n = 0; n < N; ++n) {
    a.entries(n, n) = slope * double(n + l + 1);
    if (n + 1 < N) a.entries(n, n + 1) = a.entries(n + 1, n) = ph.phi[n] * ph.phi[n + 1];
  }
  return a;
}

TruncatedOperator shift_by_sigma(const TruncatedOperator& a, int sigma) {
  require(a.kind == OperatorKind::A && !a.shifted, ErrorKind::InvalidArgument,
          "shift_by_sigma needs an unshifted A");
  TruncatedOperator out = a;
  out.entries.diagonal().array() -= double(sigma);
  out.meta.sigma = sigma;
  out.shifted = true;
  return out;
}

TruncatedOperator unshift(const TruncatedOperator& a) {
  require(a.kind == OperatorKind::A && a.shifted, ErrorKind::InvalidArgument, "unshift needs a shifted A");
  TruncatedOperator out = a;
  out.entries.diagonal().array() += double(a.meta.sigma);
  out.shifted = false;
  return out;
}

cd a_element_quadrature(int n1, int n2, int l, const DimensionlessState& state, const oracle::QuadratureSpec& quad) {
  const cd y = state.y;
  const cd integral = radial_integral(n1, n2, l, [y](double x) { return (y - x * x) / (x * x + 1.0); }, quad);
  return integral / (state.rho * std::sqrt(upsilon(n1, l) * upsilon(n2, l)));
}

cd a_inverse_quadrature(int n1, int n2, int l, const DimensionlessState& state, const oracle::QuadratureSpec& quad) {
  const cd y = state.y;
  const double pref = state.rho * std::sqrt(upsilon(n1, l) * upsilon(n2, l));
  if (!real_positive(y)) {
    return pref * radial_integral(n1, n2, l, [y](double x) { return (x * x + 1.0) / (y - x * x); }, quad);
  }
  // 1/(y + i0 - x^2) = -1/((x + x0)(x - x0 - i0))
  const double x0 = std::sqrt(y.real());
  oracle::QuadratureSpec spec = quad;
  spec.pole_handling = oracle::PoleHandling::PrincipalValuePlusResidue;
  spec.pole = x0;
  auto h = [&](double x) {
    return cd(-x * x * (x * x + 1.0) / (x + x0) * eta(n1, l, x) * eta(n2, l, x));
  };
  return pref * oracle::integrate_halfline(h, spec).value;
}

cd a_inverse_quadrature(int n1, int n2, int l, const PhysicalSystem& sys, cd z, const oracle::QuadratureSpec& quad) {
  return a_inverse_quadrature(n1, n2, l, to_dimensionless(sys, z), quad);
}

Eigen::MatrixXcd a_inverse_quadrature_matrix(int l, const DimensionlessState& state, int N,
                                             const oracle::QuadratureSpec& quad) {
  require(N >= 1 && l >= 0, ErrorKind::InvalidArgument, "A^{-1} matrix needs N >= 1, l >= 0");
  const bool pole = real_positive(state.y);
  Eigen::MatrixXcd h0 = Eigen::MatrixXcd::Zero(N, N);
  double x0 = 0.0;
  if (pole) {
    x0 = std::sqrt(state.y.real());
    const Eigen::VectorXd e = eta_sequence(N - 1, l, x0);
    h0 = (-x0 * (x0 * x0 + 1.0) / 2.0 * (e * e.transpose())).cast<cd>();
  }
  int n = quad.points;
  Eigen::MatrixXcd coarse = a_inverse_grid(l, state, N, n, pole, h0);
  Eigen::MatrixXcd fine = coarse;
  double err = 0.0;
  for (int k = 0; k <= quad.max_doublings; ++k) {
    n *= 2;
    fine = a_inverse_grid(l, state, N, n, pole, h0);
    err = (fine - coarse).cwiseAbs().maxCoeff();
    if (err <= quad.target_tol * std::max(1.0, fine.cwiseAbs().maxCoeff())) break;
    coarse = fine;
  }
  require(err <= quad.target_tol * std::max(1.0, fine.cwiseAbs().maxCoeff()), ErrorKind::QuadratureFailure,
          "A^{-1} quadrature error estimate " + std::to_string(err) + " above tolerance");
  if (pole) fine += h0 * cd(oracle::pv_lorentz_kernel(x0), kPi);
  Eigen::VectorXd s(N);
  for (int i = 0; i < N; ++i) s(i) = std::sqrt(upsilon(i, l));
  return state.rho * (s.asDiagonal() * fine * s.asDiagonal());
}

TruncatedOperator b_factor(const CoeffSequence& beta, const PhiSequence& phi, int N) {
  require_sizes(beta, phi, N);
  TruncatedOperator b{OperatorKind::bFactor, beta.l, Eigen::MatrixXcd::Zero(N, N), {}, false};
  for (int n = 0; n < N; ++n) {
    b.entries(n, n) = phi.phi[n] / std::sqrt(checked_beta(beta, n));
    if (n + 1 < N) b.entries(n, n + 1) = phi.phi[n] * std::sqrt(checked_beta(beta, n + 1));
  }
  return b;
}

TruncatedOperator b_inverse(const CoeffSequence& beta, const PhiSequence& phi, int N, BInverseForm form) {
  require_sizes(beta, phi, N);
  TruncatedOperator out{OperatorKind::BInverse, beta.l, Eigen::MatrixXcd::Zero(N, N), {}, false};
  for (int n = 0; n < N; ++n) {
    const cd sb = std::sqrt(checked_beta(beta, n));
    cd product = 1.0;
    for (int m = n; m < N; ++m) {
      product *= beta.beta[m];
      const cd prod = form == BInverseForm::Telescoped ? beta.q_ratio(m, n - 1) : product;
      out.entries(n, m) = parity(n + m) * prod / (phi.phi[m] * sb);
    }
  }
  return out;
}

cd resolvent_closed(int n, int m, const CoeffSequence& beta, const PhiSequence& phi) {
  const int lo = std::min(n, m);
  const int hi = std::max(n, m);
  require(lo >= 0 && hi < phi.phi.size() && hi < beta.beta.size(), ErrorKind::IndexError,
          "resolvent index outside the sequences");
  for (int k = 0; k <= hi; ++k) checked_beta(beta, k);
  // 1 + sum_{i<lo} prod_{j<=i} beta_{lo-j-1} beta_{lo-j}, each product telescoped through Q.
  cd bracket = 1.0;
  for (int i = 0; i < lo; ++i) {
    const ScaledCd term = (beta.q_scaled(lo - 1) / beta.q_scaled(lo - i - 2)) *
                          (beta.q_scaled(lo) / beta.q_scaled(lo - i - 1));
    bracket += term.value();
  }
  return parity(n + m) / (phi.phi[n] * phi.phi[m]) * bracket * beta.q_ratio(hi, lo - 1);
}

TruncatedOperator resolvent_matrix(const CoeffSequence& beta, const PhiSequence& phi, int N) {
  const auto B = b_inverse(beta, phi, N);
  return {OperatorKind::Resolvent, beta.l, B.entries.transpose() * B.entries, {}, false};
}

Eigen::VectorXcd GSequence::G() const { return g.array() / (1.0 - g.array()); }

GSequence g_sequence(const CoeffSequence& beta, const PhiSequence& phi, int sigma, int N) {
  require_sizes(beta, phi, N);
  auto check = [](cd g, int n) {
    require(std::abs(g) > 1e-12 && std::abs(1.0 - g) > 1e-12 && std::isfinite(std::abs(g)),
            ErrorKind::DegenerateG, "g_" + std::to_string(n) + " = " + std::to_string(g.real()) + "+" +
                                        std::to_string(g.imag()) + "i is degenerate");
  };
  GSequence out;
  out.g.resize(N);
  const double s = sigma;
  const cd b0 = checked_beta(beta, 0);
  out.g[0] = (phi.phi2[0] + s * b0) / (2.0 * phi.phi2[0] + s * b0);
  check(out.g[0], 0);
  for (int n = 0; n + 1 < N; ++n) {
    const cd b1 = checked_beta(beta, n + 1);
    const cd gn = out.g[n];
    const cd w = (s + (2.0 * gn - 1.0) / gn * b1 * phi.phi2[n]) * b1 / phi.phi2[n + 1];
    out.g[n + 1] = (1.0 + w) / (2.0 + w);
    check(out.g[n + 1], n + 1);
  }
  return out;
}

double g_recurrence_residual(int n, const GSequence& g, const CoeffSequence& beta, const PhiSequence& phi,
                             int sigma) {
  require(n >= 0 && n + 1 < g.g.size(), ErrorKind::IndexError, "g residual index outside the sequence");
  const cd g1 = g.g[n + 1];
  const cd g0 = g.g[n];
  const cd b1 = beta.beta[n + 1];
  const cd t1 = (2.0 * g1 - 1.0) / (1.0 - g1) * phi.phi2[n + 1] / b1;
  const cd t2 = -(2.0 * g0 - 1.0) / g0 * b1 * phi.phi2[n];
  const double t3 = -double(sigma);
  const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
  return scale == 0.0 ? 0.0 : std::abs(t1 + t2 + t3) / scale;
}

Eigen::MatrixXcd s_factor(const GSequence& g, const CoeffSequence& beta, const PhiSequence& phi, int N) {
  require_sizes(beta, phi, N);
  require(g.g.size() >= N, ErrorKind::IndexError, "g sequence shorter than the truncation");
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    s(n, n) = phi.phi[n] / std::sqrt(checked_beta(beta, n));
    if (n + 1 < N) s(n, n + 1) = (1.0 - g.g[n]) / g.g[n] * phi.phi[n] * std::sqrt(checked_beta(beta, n + 1));
  }
  return s;
}

TruncatedOperator s_matrix_explicit(const CoeffSequence& beta, const PhiSequence& phi, int sigma, int N) {
  require_sizes(beta, phi, N);
  TruncatedOperator S{OperatorKind::SMatrix, beta.l, Eigen::MatrixXcd::Zero(N, N), {}, false};
  S.meta.sigma = sigma;
  for (int n = 0; n < N; ++n) {
    const cd bn = checked_beta(beta, n);
    S.entries(n, n) = double(sigma) + phi.phi2[n] / bn + (n > 0 ? bn * phi.phi2[n - 1] : cd(0.0));
    if (n + 1 < N) {
      // sqrt(beta_{n+1}) / sqrt(beta_n), matching the branch used in b and s
      S.entries(n, n + 1) = S.entries(n + 1, n) =
          phi.phi2[n] * std::sqrt(checked_beta(beta, n + 1)) / std::sqrt(bn);
    }
  }
  return S;
}

TruncatedOperator c_matrix(const GSequence& g, const CoeffSequence& beta, const PhiSequence& phi, int N) {
  require_sizes(beta, phi, N);
  require(g.g.size() >= N, ErrorKind::IndexError, "g sequence shorter than the truncation");
  TruncatedOperator C{OperatorKind::CMatrix, beta.l, Eigen::MatrixXcd::Identity(N, N), {}, false};
  for (int n = 0; n < N; ++n) {
    const cd lead = phi.phi[n] * (2.0 * g.g[n] - 1.0) / g.g[n];
    for (int m = n + 1; m < N; ++m) C.entries(n, m) = parity(n + m) * lead / phi.phi[m] * beta.q_ratio(m, n);
  }
  return C;
}

double s_decomposition_check(const GSequence& g, const CoeffSequence& beta, const PhiSequence& phi, int sigma,
                             int N, int guard) {
  require(N > guard + 1, ErrorKind::InvalidArgument, "truncation too small for the guard band");
  const int I = N - guard;
  const auto B = b_inverse(beta, phi, N).entries;
  const auto b = b_factor(beta, phi, N).entries;
  const Eigen::MatrixXcd A = b * b.transpose() + double(sigma) * Eigen::MatrixXcd::Identity(N, N);
  const auto S = s_matrix_explicit(beta, phi, sigma, N).entries;
  const Eigen::MatrixXcd s = s_factor(g, beta, phi, N);
  const Eigen::MatrixXcd BA = (B * A).topLeftCorner(I, I);
  const Eigen::MatrixXcd SB = (S * B).topLeftCorner(I, I);
  const Eigen::MatrixXcd sGs = (s.transpose() * g.G().asDiagonal() * s).topLeftCorner(I, I);
  const double r1 = (BA - SB).cwiseAbs().maxCoeff() / std::max(1e-300, BA.cwiseAbs().maxCoeff());
  const double r2 = (S.topLeftCorner(I, I) - sGs).cwiseAbs().maxCoeff() /
                    std::max(1e-300, S.topLeftCorner(I, I).cwiseAbs().maxCoeff());
  return std::max(r1, r2);
}

OperatorChain make_chain(int l, const DimensionlessState& state, int sigma, int N) {
  require(N >= 1, ErrorKind::InvalidArgument, "truncation N must be >= 1");
  OperatorChain c;
  c.l = l;
  c.N = N;
  c.sigma = sigma;
  c.state = state;
  c.ctx = make_coeff_context(l, state, sigma);
  c.beta = beta_seq(N + 1, c.ctx);
  c.phi = phi_sequence(N + 2, l, state);
  c.g = g_sequence(c.beta, c.phi, sigma, N);
  return c;
}

}  // namespace tmat
