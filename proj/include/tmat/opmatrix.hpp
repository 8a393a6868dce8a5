#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>

#include "tmat/coeffs.hpp"
#include "tmat/oracle/halfline.hpp"
#include "tmat/params.hpp"

namespace tmat {

/// phi_n = i sqrt((y+1)/(2 rho)) sqrt(r_n) with the Gamma quotient
/// r_n = Gamma(n/2+1) Gamma((n+3)/2+l) / (Gamma((n+1)/2) Gamma(n/2+l+1)).
cd phi(int n, int l, const DimensionlessState& state);

/// phi_0..phi_{N-1} with their squares stored exactly as -(y+1)/(2 rho) r_n.
struct PhiSequence {
  int l = 0;
  Eigen::VectorXcd phi;
  Eigen::VectorXcd phi2;
};
PhiSequence phi_sequence(int N, int l, const DimensionlessState& state);

/// The Gamma quotient r_n alone.
double phi_gamma_quotient(int n, int l);

enum class OperatorKind { A, bFactor, BInverse, Resolvent, SMatrix, CMatrix, Tau };

struct OperatorMeta {
  cd y;
  double rho = 0.0;
  int sigma = 0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
};

/// An N x N truncation of one of the infinite operators for fixed l.
/// `shifted` marks A - sigma E (only meaningful for kind A).
struct TruncatedOperator {
  OperatorKind kind = OperatorKind::A;
  int l = 0;
  Eigen::MatrixXcd entries;
  OperatorMeta meta;
  bool shifted = false;

  int N() const { return static_cast<int>(entries.rows()); }
};

/// Symmetric tridiagonal A: diagonal (y-1)/(2 rho)(n+l+1), off-diagonal phi_n phi_{n+1}.
TruncatedOperator a_matrix(int l, const DimensionlessState& state, int N);

/// A - sigma E. Throws InvalidArgument if `a` is not an unshifted A.
TruncatedOperator shift_by_sigma(const TruncatedOperator& a, int sigma);

/// Undo shift_by_sigma. Throws InvalidArgument if `a` is not a shifted A.
TruncatedOperator unshift(const TruncatedOperator& a);

/// Entry of A from the basis integral with weight (y - x^2)/(x^2 + 1).
cd a_element_quadrature(int n1, int n2, int l, const DimensionlessState& state,
                        const oracle::QuadratureSpec& quad = {});

/// Entry of A^{-1} from the basis integral with weight (x^2 + 1)/(y - x^2).
/// For real y > 0 the pole at x = sqrt(y) is taken as y + i0.
cd a_inverse_quadrature(int n1, int n2, int l, const DimensionlessState& state,
                        const oracle::QuadratureSpec& quad = {});
cd a_inverse_quadrature(int n1, int n2, int l, const PhysicalSystem& sys, cd z,
                        const oracle::QuadratureSpec& quad = {});

/// All N x N entries of A^{-1} on a shared grid. The Gauss rule in theta is
/// doubled until the largest entry change is below quad.target_tol times the
/// largest entry; throws QuadratureFailure otherwise.
Eigen::MatrixXcd a_inverse_quadrature_matrix(int l, const DimensionlessState& state, int N,
                                             const oracle::QuadratureSpec& quad = {});

/// Upper bidiagonal b with b b^T = A - sigma E away from the last row.
/// Needs beta_0..beta_{N-1}; throws ZeroDivisor on a vanishing beta.
TruncatedOperator b_factor(const CoeffSequence& beta, const PhiSequence& phi, int N);

enum class BInverseForm { Telescoped, DirectProduct };

/// B = b^{-1}, upper triangular, B_{n,m} = (-1)^{n+m} / (phi_m sqrt(beta_n)) prod_{i=n}^{m} beta_i.
/// The telescoped form uses prod beta = Q_m / Q_{n-1}.
TruncatedOperator b_inverse(const CoeffSequence& beta, const PhiSequence& phi, int N,
                            BInverseForm form = BInverseForm::Telescoped);

/// One entry of (A - sigma E)^{-1} from the closed double-product formula.
cd resolvent_closed(int n, int m, const CoeffSequence& beta, const PhiSequence& phi);

/// (A - sigma E)^{-1} = B^T B.
TruncatedOperator resolvent_matrix(const CoeffSequence& beta, const PhiSequence& phi, int N);

/// g_0..g_{N-1} for the splitting S = s^T G s.
struct GSequence {
  Eigen::VectorXcd g;

  /// G_n = g_n / (1 - g_n).
  Eigen::VectorXcd G() const;
};

/// Forward recurrence from g_0 = (phi_0^2 + sigma beta_0)/(2 phi_0^2 + sigma beta_0).
/// Throws DegenerateG naming n when g_n comes within 1e-12 of 0 or 1.
GSequence g_sequence(const CoeffSequence& beta, const PhiSequence& phi, int sigma, int N);

/// |LHS| / max |term| of the g recurrence linking g_n and g_{n+1}.
double g_recurrence_residual(int n, const GSequence& g, const CoeffSequence& beta, const PhiSequence& phi,
                             int sigma);

/// Upper bidiagonal s: s_{n,n} = phi_n / sqrt(beta_n), s_{n,n+1} = (1-g_n)/g_n phi_n sqrt(beta_{n+1}).
Eigen::MatrixXcd s_factor(const GSequence& g, const CoeffSequence& beta, const PhiSequence& phi, int N);

/// S = b^T b + sigma E from its tridiagonal formula.
TruncatedOperator s_matrix_explicit(const CoeffSequence& beta, const PhiSequence& phi, int sigma, int N);

/// C = s B from the closed formula: unit upper triangular.
TruncatedOperator c_matrix(const GSequence& g, const CoeffSequence& beta, const PhiSequence& phi, int N);

/// max of the interior residuals of B A = S B and S = s^T G s, each relative to
/// the largest entry involved. The last `guard` rows and columns are excluded.
double s_decomposition_check(const GSequence& g, const CoeffSequence& beta, const PhiSequence& phi, int sigma,
                             int N, int guard = 5);

/// Everything needed for one (l, y, rho, sigma) at truncation N: coefficients
/// up to N+1, phi up to N+1, and g up to N-1.
struct OperatorChain {
  int l = 0;
  int N = 0;
  int sigma = 0;
  DimensionlessState state;
  CoeffContext ctx;
  CoeffSequence beta;
  PhiSequence phi;
  GSequence g;
};
OperatorChain make_chain(int l, const DimensionlessState& state, int sigma, int N);

}  // namespace tmat
