#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "tmat/params.hpp"

namespace tmat {

using MomentumVector = Eigen::Vector3d;

/// 1 / (n + l + 1).
double upsilon(int n, int l);

/// Radial basis function eta_{n,l}(k), Gegenbauer form, for dimensionless k >= 0.
double eta(int n, int l, double k);

/// eta_{0,l}(k) ... eta_{nmax,l}(k) in one pass.
Eigen::VectorXd eta_sequence(int nmax, int l, double k);

/// The same function from its terminating 2F1 representation, summed in
/// 50-digit arithmetic. Slow; meant for cross-checks.
double eta_hypergeometric(int n, int l, double k);

/// Residual of the three-term relation in n satisfied by eta_{n,l}(k),
/// relative to the largest term.
double eta_recurrence_residual(int n, int l, double k);

/// Complex spherical harmonic with the Condon-Shortley phase.
cd sph_harm(int l, int m, double theta, double phi);

/// Polar and azimuthal angle of a non-zero vector.
struct Direction {
  double theta = 0.0;
  double phi = 0.0;
};
Direction direction_of(const MomentumVector& k);

/// H_{n,l,m}(k / gamma) = eta_{n,l}(|k|/gamma) Y_{l,m}(k^). Zero at k = 0 for l > 0.
cd h_basis(const SpectralIndex& idx, const MomentumVector& k, double gamma);

/// Radial part of the basis overlap: integral of q^2 eta_{n1,l}(q) eta_{n2,l}(q) dq.
double radial_overlap(int n1, int n2, int l, int points = 200);

/// Integral over d^3k of H_a(k/gamma) H_b*(k/gamma): radial Gauss rule times a
/// product rule on the sphere (Gauss in cos theta, trapezoid in phi).
cd basis_inner_product(const SpectralIndex& a, const SpectralIndex& b, double gamma, int radial_points = 200);

/// sigma alpha sqrt(2/pi) / |k - p|^2. Throws ForwardSingularity at k = p.
double potential_element(const PhysicalSystem& sys, const MomentumVector& k, const MomentumVector& p);

/// Contribution of one angular momentum to potential_element, from the
/// Legendre-function expansion of 1/|k - p|^2.
double potential_partial_wave(const PhysicalSystem& sys, const MomentumVector& k, const MomentumVector& p, int l);

enum class ExpansionAcceleration { None, WynnPerShell };

struct PotentialExpansion {
  double value = 0.0;             // truncated (and possibly accelerated) sum
  std::vector<double> shells;     // per-l contributions, l = 0..l_max
  std::vector<double> shell_error;  // acceleration error estimate per shell
};

/// Separable expansion of the potential truncated at n <= n_max, l <= l_max.
/// Each l-shell is a slowly oscillating sum in n; by default its partial sums
/// are extrapolated with the epsilon algorithm.
PotentialExpansion potential_expansion(const PhysicalSystem& sys, const MomentumVector& k, const MomentumVector& p,
                                       int n_max, int l_max,
                                       ExpansionAcceleration accel = ExpansionAcceleration::WynnPerShell);

}  // namespace tmat
