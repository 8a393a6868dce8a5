#include "tmat/tmatrix.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tmat/errors.hpp"
#include "tmat/oracle/series.hpp"

namespace tmat {

namespace {

constexpr double kPi = std::numbers::pi;

double parity(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// sqrt(upsilon_n) eta_{n,l}(q) for n = 0..N-1.
Eigen::VectorXd weighted_eta(int N, int l, double q) {
  Eigen::VectorXd e = eta_sequence(N - 1, l, q);
  for (int n = 0; n < N; ++n) e[n] *= std::sqrt(upsilon(n, l));
  return e;
}

}  // namespace

double tau_diagonal_special(int n, int l, double E, int sigma, double binding) {
  require(n >= 0 && l >= 0, ErrorKind::IndexError, "tau needs n, l >= 0");
  require(E > 0.0 && std::isfinite(E), ErrorKind::InvalidArgument, "special route needs E > 0");
  require(binding > 0.0, ErrorKind::InvalidArgument, "binding energy must be positive");
  require(sigma == 1 || sigma == -1 || sigma == 0, ErrorKind::InvalidArgument, "sigma must be -1, 0 or +1");
  const double level = hydrogen_level(n, l, binding);
  if (sigma == -1) {
    require(std::abs(E - level) > 1e-12 * level, ErrorKind::AtPole,
            "E coincides with the level E_{" + std::to_string(n) + "," + std::to_string(l) + "} = " + num(level));
  }
  return sigma / (1.0 + sigma * std::sqrt(level / E));
}

TauResult tau_matrix(int l, const DimensionlessState& state, int sigma, int N, TauRoute route) {
  require(N >= 1 && l >= 0, ErrorKind::InvalidArgument, "tau_matrix needs N >= 1, l >= 0");
  require(sigma == 1 || sigma == -1 || sigma == 0, ErrorKind::InvalidArgument, "sigma must be -1, 0 or +1");
  TauResult out;
  out.l = l;
  out.route = route;
  out.N = N;
  out.meta = {state.y, state.rho, sigma};
  switch (route) {
    case TauRoute::DiagonalSpecial: {
      require(state.special_point(), ErrorKind::InvalidArgument, "the diagonal route needs y = -1");
      out.tau = Eigen::MatrixXcd::Zero(N, N);
      for (int n = 0; n < N; ++n) {
        const double d = 1.0 + sigma * state.rho / (n + l + 1.0);
        require(std::abs(d) > 1e-12, ErrorKind::AtPole, "tau pole at n = " + std::to_string(n));
        out.tau(n, n) = sigma / d;
      }
      return out;
    }
    case TauRoute::DirectSolve: {
      const auto A = a_matrix(l, state, N);
      const auto M = shift_by_sigma(A, sigma);
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M.entries);
      // The rcond estimate misses exact zero pivots, so bound it by the pivot ratio as well.
      const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
      out.rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
      require(out.rcond > 1e-13, ErrorKind::SingularShift,
              "A - sigma E is numerically singular (rcond " + num(out.rcond) + ")");
      out.tau = double(sigma) * lu.solve(A.entries);
      return out;
    }
    case TauRoute::FactorizedCGC: {
      if (sigma == 0) {
        out.tau = Eigen::MatrixXcd::Zero(N, N);
        return out;
      }
      const auto ch = make_chain(l, state, sigma, N);
      const auto C = c_matrix(ch.g, ch.beta, ch.phi, N).entries;
      out.tau = double(sigma) * (C.transpose() * ch.g.G().asDiagonal() * C);
      return out;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown tau route");
}

double form_factor_prefactor(const PhysicalSystem& sys, double k) {
  return std::sqrt(0.5 * sys.alpha) * std::sqrt(k * k + sys.gamma * sys.gamma) / (sys.gamma * sys.gamma);
}

FormFactorResult phi_form_factor(const SpectralIndex& idx, const MomentumVector& k, cd z, const PhysicalSystem& sys,
                                 int N, const FormFactorOptions& opt) {
  idx.validate();
  sys.validate(true);
  require(N > idx.n, ErrorKind::InvalidArgument, "truncation must exceed the form-factor index");
  const int n = idx.n;
  const int l = idx.l;
  const double kn = k.norm();
  const double q = kn / sys.gamma;
  const double pref = form_factor_prefactor(sys, kn);
  cd Y = kn > 0.0 ? sph_harm(l, idx.m, direction_of(k).theta, direction_of(k).phi)
                  : (l == 0 ? cd(1.0 / std::sqrt(4.0 * kPi)) : cd(0.0));
  if (opt.conjugate) Y = std::conj(Y);
  const Eigen::VectorXd u = weighted_eta(N, l, q);

  FormFactorResult out;
  out.terms = N - n;
  if (sys.sigma == 0) {
    out.value = out.value_resummed = pref * u[n] * Y;
    out.converged = true;
    return out;
  }
  const auto state = to_dimensionless(sys, z, BranchSelection::TBranch);
  const auto ch = make_chain(l, state, sys.sigma, N);
  const auto C = c_matrix(ch.g, ch.beta, ch.phi, N).entries;
  cd direct = 0.0;
  for (int n1 = n; n1 < N; ++n1) direct += C(n, n1) * u[n1];

  const cd gn = ch.g.g[n];
  const cd lead = parity(n) * ch.phi.phi[n] * (2.0 * gn - 1.0) / gn;
  cd tail = 0.0;
  std::vector<double> coef(N, 0.0);
  for (int n1 = n + 1; n1 < N; ++n1) {
    const cd c = parity(n1) * ch.beta.q_ratio(n1, n) / ch.phi.phi[n1];
    coef[n1] = std::abs(lead * c);
    tail += c * u[n1];
  }
  out.value = pref * direct * Y;
  out.value_resummed = pref * (u[n] + lead * tail) * Y;

  // Geometric tail bound from the last coefficient and the recent basis values.
  const double ratio = std::abs(ch.ctx.omega2);
  double eta_bound = 0.0;
  for (int j = std::max(n, N - 4); j < N; ++j) eta_bound = std::max(eta_bound, std::abs(u[j]));
  const double last = coef[N - 1];
  if (N - 1 == n) {
    out.remainder = 0.0;
  } else if (ratio < 1.0 - 1e-3) {
    out.remainder = 2.0 * pref * std::abs(Y) * last * eta_bound * ratio / (1.0 - ratio);
  } else {
    out.remainder = pref * std::abs(Y) * last * eta_bound * N;
  }
  out.converged = out.remainder <= opt.tol * std::max(std::abs(out.value), 1e-300);
  if (opt.strict && !out.converged) {
    throw Error(ErrorKind::SlowConvergence,
                "form factor tail estimate " + num(out.remainder) + " above tolerance at N = " + std::to_string(N));
  }
  return out;
}

namespace {

struct ShellSum {
  cd value;
  double error = 0.0;
};

ShellSum finish(const std::vector<cd>& partial, bool accelerate) {
  const int N = static_cast<int>(partial.size());
  if (!accelerate || N < 5) return {partial.back(), N > 1 ? std::abs(partial[N - 1] - partial[N - 2]) : 0.0};
  constexpr int window = 48;
  const auto tail = std::span<const cd>(partial).subspan(std::max(0, N - window));
  const auto ext = oracle::wynn_epsilon(tail);
  return {ext.value, ext.error};
}

// Square partial sums S_M = sum_{n1, n2 < M} u2_{n1} K_{n1 n2} u1_{n2}.
std::vector<cd> dense_partial_sums(const Eigen::MatrixXcd& K, const Eigen::VectorXcd& u2, const Eigen::VectorXcd& u1) {
  const int N = static_cast<int>(K.rows());
  std::vector<cd> partial(N);
  cd s = 0.0;
  for (int j = 0; j < N; ++j) {
    s += u2[j] * (K.row(j).head(j + 1) * u1.head(j + 1))(0);
    if (j > 0) s += (u2.head(j).transpose() * K.col(j).head(j))(0) * u1[j];
    partial[j] = s;
  }
  return partial;
}

// S_M for K = sigma C^T G C - sigma E, using f_k(M) = sum_{k <= a < M} C_{k a} u_a.
std::vector<cd> cgc_partial_sums(const Eigen::MatrixXcd& C, const Eigen::VectorXcd& G, int sigma,
                                 const Eigen::VectorXcd& u2, const Eigen::VectorXcd& u1) {
  const int N = static_cast<int>(C.rows());
  Eigen::VectorXcd f2 = Eigen::VectorXcd::Zero(N);
  Eigen::VectorXcd f1 = Eigen::VectorXcd::Zero(N);
  std::vector<cd> partial(N);
  cd born = 0.0;
  for (int M = 1; M <= N; ++M) {
    const int j = M - 1;
    f2.head(M) += C.col(j).head(M) * u2[j];
    f1.head(M) += C.col(j).head(M) * u1[j];
    born += u2[j] * u1[j];
    partial[j] = double(sigma) * ((G.head(M).array() * f2.head(M).array() * f1.head(M).array()).sum() - born);
  }
  return partial;
}

// The same S_M from the separable form factors, each built from its
// telescoped tail T_k = sum_{a > k} (-1)^a (prod_{i=k+1}^{a} beta_i) u_a / phi_a.
std::vector<cd> separable_partial_sums(const OperatorChain& ch, const Eigen::VectorXcd& u2, const Eigen::VectorXcd& u1) {
  const int N = ch.N;
  const Eigen::VectorXcd G = ch.g.G();
  Eigen::VectorXcd lead(N);
  for (int k = 0; k < N; ++k) lead[k] = parity(k) * ch.phi.phi[k] * (2.0 * ch.g.g[k] - 1.0) / ch.g.g[k];
  Eigen::VectorXcd w2(N), w1(N);
  for (int a = 0; a < N; ++a) {
    w2[a] = parity(a) * u2[a] / ch.phi.phi[a];
    w1[a] = parity(a) * u1[a] / ch.phi.phi[a];
  }
  std::vector<cd> partial(N);
  cd born = 0.0;
  for (int M = 1; M <= N; ++M) {
    born += u2[M - 1] * u1[M - 1];
    cd t2 = 0.0, t1 = 0.0, acc = 0.0;
    for (int k = M - 1; k >= 0; --k) {
      if (k + 1 < M) {
        const cd b = ch.beta.beta[k + 1];
        t2 = b * (w2[k + 1] + t2);
        t1 = b * (w1[k + 1] + t1);
      }
      acc += G[k] * (u2[k] + lead[k] * t2) * (u1[k] + lead[k] * t1);
    }
    partial[M - 1] = double(ch.sigma) * (acc - born);
  }
  return partial;
}

// Average of both argument orders, so that exchanging k1 and k2 is exact in floating point.
template <class F>
ShellSum symmetric(F&& sums, const Eigen::VectorXcd& u2, const Eigen::VectorXcd& u1, bool accelerate) {
  const ShellSum a = finish(sums(u2, u1), accelerate);
  const ShellSum b = finish(sums(u1, u2), accelerate);
  return {0.5 * (a.value + b.value), std::max(a.error, b.error) + 0.5 * std::abs(a.value - b.value)};
}

}  // namespace

TElementResult t_element(const PhysicalSystem& sys, cd z, const MomentumVector& k2, const MomentumVector& k1,
                         const TElementOptions& opt) {
  sys.validate(true);
  require(z.real() < 0.0 || z.imag() > 0.0, ErrorKind::DomainError,
          "T-matrix assembly needs Re z < 0 or Im z > 0");
  require(opt.N >= 2 && opt.N_max >= opt.N && opt.l_max >= 0, ErrorKind::InvalidArgument,
          "t_element needs 2 <= N <= N_max and l_max >= 0");
  TElementResult out;
  out.born = potential_element(sys, k2, k1);
  if (sys.sigma == 0) {
    out.value = out.value_diagonal = 0.0;
    out.converged = true;
    return out;
  }
  const double g = sys.gamma;
  const double a2 = k2.norm();
  const double a1 = k1.norm();
  const double pref = sys.alpha / (2.0 * std::pow(g, 4)) * std::pow(2.0 * kPi, 1.5) * std::sqrt(a2 * a2 + g * g) *
                      std::sqrt(a1 * a1 + g * g);
  const double cosine = (a1 > 0.0 && a2 > 0.0) ? std::clamp(k2.dot(k1) / (a1 * a2), -1.0, 1.0) : 1.0;
  const auto state = to_dimensionless(sys, z, BranchSelection::TBranch);
  const int sigma = sys.sigma;
  const bool special = state.special_point();

  cd sum = 0.0;
  cd sum_diag = 0.0;
  int quiet = 0;
  for (int l = 0; l <= opt.l_max; ++l) {
    const double angular = (2.0 * l + 1.0) / (4.0 * kPi) * std::legendre(l, cosine);
    ShellSum shell, shell_diag;
    cd previous = 0.0;
    int N = opt.N;
    for (;; N *= 2) {
      const Eigen::VectorXcd u2 = weighted_eta(N, l, a2 / g).cast<cd>();
      const Eigen::VectorXcd u1 = weighted_eta(N, l, a1 / g).cast<cd>();
      if (special) {
        // A is diagonal: C = E and sigma G_n = tau_nn, so both forms coincide.
        const Eigen::MatrixXcd K = tau_matrix(l, state, sigma, N, TauRoute::DiagonalSpecial).tau -
                                   double(sigma) * Eigen::MatrixXcd::Identity(N, N);
        shell = shell_diag = symmetric([&](const auto& a, const auto& b) { return dense_partial_sums(K, a, b); },
                                       u2, u1, opt.accelerate);
      } else {
        const auto ch = make_chain(l, state, sigma, N);
        if (opt.tau_route == TauRoute::DirectSolve) {
          const Eigen::MatrixXcd K = tau_matrix(l, state, sigma, N, TauRoute::DirectSolve).tau -
                                     double(sigma) * Eigen::MatrixXcd::Identity(N, N);
          shell = symmetric([&](const auto& a, const auto& b) { return dense_partial_sums(K, a, b); }, u2, u1,
                            opt.accelerate);
        } else {
          const Eigen::MatrixXcd C = c_matrix(ch.g, ch.beta, ch.phi, N).entries;
          const Eigen::VectorXcd G = ch.g.G();
          shell = symmetric([&](const auto& a, const auto& b) { return cgc_partial_sums(C, G, sigma, a, b); }, u2,
                            u1, opt.accelerate);
        }
        shell_diag = symmetric([&](const auto& a, const auto& b) { return separable_partial_sums(ch, a, b); }, u2,
                               u1, opt.accelerate);
      }
      // The extrapolation's own error estimate is optimistic, so also require agreement with the previous N.
      if (N > opt.N) shell.error = std::max(shell.error, std::abs(shell.value - previous));
      previous = shell.value;
      const cd weight = pref * angular;
      const bool accepted =
          N > opt.N && std::abs(weight) * shell.error <= opt.tol * std::abs(out.born + sum + weight * shell.value);
      if (accepted || 2 * N > opt.N_max) break;
    }
    const cd contribution = pref * angular * shell.value;
    out.shells.push_back(contribution);
    out.shell_error.push_back(std::abs(pref * angular) * shell.error);
    out.shell_N.push_back(N);
    sum += contribution;
    sum_diag += pref * angular * shell_diag.value;
    out.l_used = l;
    quiet = std::abs(contribution) <= opt.tol * std::abs(out.born + sum) ? quiet + 1 : 0;
    if (quiet >= 2) {
      out.converged = true;
      break;
    }
  }
  out.value = out.born + sum;
  out.value_diagonal = out.born + sum_diag;
  if (opt.strict && !out.converged) {
    std::string report = "partial-wave sum not converged by l = " + std::to_string(out.l_used) + "; last shells";
    for (int l = std::max(0, out.l_used - 2); l <= out.l_used; ++l) report += " " + num(std::abs(out.shells[l]));
    throw Error(ErrorKind::SlowConvergence, report);
  }
  return out;
}

std::vector<PoleReport> pole_scan(int l, int n_lo, int n_hi, const PhysicalSystem& sys, double e_lo, double e_hi,
                                  const PoleScanOptions& opt) {
  sys.validate();
  require(l >= 0 && 0 <= n_lo && n_lo <= n_hi, ErrorKind::InvalidArgument, "invalid index range");
  require(0.0 < e_lo && e_lo < e_hi, ErrorKind::InvalidArgument, "energy window must satisfy 0 < lo < hi");
  require(opt.grid >= 2, ErrorKind::InvalidArgument, "pole scan grid needs at least two points");
  const double binding = binding_energy(sys);
  const int sigma = sys.sigma;
  const int count = n_hi - n_lo + 1;
  std::vector<double> levels(count);
  for (int i = 0; i < count; ++i) levels[i] = hydrogen_level(n_lo + i, l, binding);

  // 1/tau_nn = sigma + sqrt(E_nl / E), finite everywhere on E > 0.
  auto inv = [&](int i, double E) { return sigma + std::sqrt(levels[i] / E); };
  // Sign of the product over all n in the range: a cell holding two poles keeps its sign.
  auto product_sign = [&](double E) {
    int sign = 1;
    for (int i = 0; i < count; ++i) {
      const double v = inv(i, E);
      if (v == 0.0) return 0;
      if (v < 0.0) sign = -sign;
    }
    return sign;
  };

  std::vector<double> grid(opt.grid);
  for (int i = 0; i < opt.grid; ++i) grid[i] = e_lo * std::pow(e_hi / e_lo, double(i) / (opt.grid - 1));

  std::vector<bool> found(count, false);
  std::vector<double> located(count, 0.0);
  for (int g = 0; g + 1 < opt.grid; ++g) {
    const int sa = product_sign(grid[g]);
    const int sb = product_sign(grid[g + 1]);
    for (int i = 0; i < count; ++i) {
      if (inv(i, grid[g + 1]) == 0.0) {
        found[i] = true;
        located[i] = grid[g + 1];
      }
    }
    if (sa == 0 || sb == 0 || sa == sb) continue;
    // Refine the factor that flips in this cell (secant safeguarded by bisection).
    for (int i = 0; i < count; ++i) {
      double a = grid[g];
      double b = grid[g + 1];
      double fa = inv(i, a);
      double fb = inv(i, b);
      if ((fa > 0.0) == (fb > 0.0)) continue;
      for (int it = 0; it < 200; ++it) {
        double c = b - fb * (b - a) / (fb - fa);
        if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
        const double fc = inv(i, c);
        if (fc == 0.0) {
          a = b = c;
          fa = fb = 0.0;
          break;
        }
        if ((fc > 0.0) == (fa > 0.0)) {
          a = c;
          fa = fc;
        } else {
          b = c;
          fb = fc;
        }
        if (std::abs(b - a) <= 1e-15 * c) break;
      }
      found[i] = true;
      located[i] = std::abs(fa) < std::abs(fb) ? a : b;
    }
  }

  std::vector<PoleReport> out;
  for (int i = 0; i < count; ++i) {
    const int n = n_lo + i;
    const bool inside = sigma == -1 && levels[i] > e_lo && levels[i] <= e_hi;
    if (!found[i]) {
      require(!inside, ErrorKind::MissedPole,
              "pole E_{" + std::to_string(n) + "," + std::to_string(l) + "} = " + num(levels[i]) +
                  " lies in the window but the grid did not resolve it");
      continue;
    }
    const double energy = located[i];
    auto residue_at = [&](double h) {
      const double up = energy * h * tau_diagonal_special(n, l, energy * (1.0 + h), sigma, binding);
      const double down = -energy * h * tau_diagonal_special(n, l, energy * (1.0 - h), sigma, binding);
      return 0.5 * (up + down);
    };
    const double h = 1e-3;
    const double r1 = residue_at(h);
    const double r2 = residue_at(0.5 * h);
    const double r4 = residue_at(0.25 * h);
    // Two Richardson levels on the even error expansion.
    const double s1 = (4.0 * r2 - r1) / 3.0;
    const double s2 = (4.0 * r4 - r2) / 3.0;
    PoleReport rep{n, l, energy, levels[i], (16.0 * s2 - s1) / 15.0, 0.0};

    // Cross-check the analytic route against a dense solve next to the pole.
    const double probe = energy * (1.0 + 1e-3);
    const auto special = with_special_gamma(sys, probe);
    const auto state = to_dimensionless(special, cd(-probe), BranchSelection::TBranch);
    const auto direct = tau_matrix(l, state, sigma, n + 3, TauRoute::DirectSolve);
    const double ref = tau_diagonal_special(n, l, probe, sigma, binding);
    rep.direct_check = std::abs(direct.tau(n, n) - ref) / std::abs(ref);
    out.push_back(rep);
  }
  return out;
}

}  // namespace tmat
