#pragma once

#include <Eigen/Core>
#include <vector>

#include "tmat/params.hpp"
#include "tmat/specfun.hpp"

namespace tmat {

using ScaledCd = specfun::ScaledValue<cd>;

/// Everything the coefficient closed forms need for one (l, y, rho, sigma).
/// kappa is i rho sigma / sqrt(y); on the negative-real branch it equals the
/// real number rho sigma / sqrt(t), and omega2 = (sqrt(t)-1)/(sqrt(t)+1).
struct CoeffContext {
  int l = 0;
  DimensionlessState state;
  int sigma = -1;
  cd omega2;
  cd kappa;
  EnergyBranch branch = EnergyBranch::Complex;

  bool negative_real() const noexcept { return branch == EnergyBranch::NegativeReal; }
};

/// Throws BranchExclusion at y = -1 (omega2 = 0), DegenerateEnergy within 1e-6
/// of y = 1, DomainError at y = 0, and BranchMismatch if `state` was built on the
/// complex branch although y is a negative real.
CoeffContext make_coeff_context(int l, const DimensionlessState& state, int sigma);

/// R_n from its hypergeometric closed form with R_{-1} = 1, in scaled form.
/// The negative-real branch is evaluated in real arithmetic.
ScaledCd r_closed_scaled(int n, const CoeffContext& ctx);

/// R_n as a plain complex number (may under/overflow for large n).
cd r_closed(int n, const CoeffContext& ctx);

/// Normalised residual |LHS| / max |term| of the three-term relation for R_n.
double r_recurrence_residual(int n, const CoeffContext& ctx, cd r_nm1, cd r_n, cd r_np1);

/// Q_n = (-1)^n R_n / ((n+2)/2)_l.
cd q_of_r(int n, int l, cd r_n);
ScaledCd q_of_r(int n, int l, const ScaledCd& r_n);

enum class Provenance { ClosedForm, Recurrence };

/// R_n, Q_n for n = -1..N and beta_n = Q_n / Q_{n-1} for n = 0..N.
struct CoeffSequence {
  int l = 0;
  int N = 0;
  cd r_minus1 = 1.0;
  Provenance provenance = Provenance::ClosedForm;
  std::vector<ScaledCd> r;  // index n + 1
  std::vector<ScaledCd> q;  // index n + 1
  Eigen::VectorXcd beta;    // index n

  ScaledCd r_scaled(int n) const { return r.at(n + 1); }
  ScaledCd q_scaled(int n) const { return q.at(n + 1); }
  cd R(int n) const { return r_scaled(n).value(); }
  cd Q(int n) const { return q_scaled(n).value(); }
  /// Q_m / Q_n without forming either.
  cd q_ratio(int m, int n) const { return (q_scaled(m) / q_scaled(n)).value(); }
  /// prod_{k=n}^{m} beta_k = Q_m / Q_{n-1}.
  cd beta_product(int n, int m) const { return m < n ? cd(1.0) : q_ratio(m, n - 1); }
};

/// Closed-form sequence up to N. `r_minus1` rescales every R_n and Q_n; the
/// ratios do not depend on it. Throws ZeroDivisor naming n if some R_{n-1} = 0.
CoeffSequence beta_seq(int N, const CoeffContext& ctx, cd r_minus1 = 1.0);

/// Residual of phi_n^2 (beta_{n+1} + 1/beta_n) = lambda_n relative to |lambda_n|.
double beta_recurrence_residual(int n, const CoeffContext& ctx, const CoeffSequence& seq);

/// The coefficient (-1)^n Q_n sqrt(upsilon_{n,l}) / phi_n of the resummed form
/// factor, and its large-n estimate. Both use R_{-1} = 1.
struct TailCoefficient {
  cd exact;
  cd asymptotic;
};
TailCoefficient tail_coefficient(int n1, const CoeffContext& ctx);

}  // namespace tmat
