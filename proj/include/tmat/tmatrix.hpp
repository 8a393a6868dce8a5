#pragma once

#include <Eigen/Core>
#include <vector>

#include "tmat/basis.hpp"
#include "tmat/opmatrix.hpp"
#include "tmat/params.hpp"

namespace tmat {

/// sigma / (1 + sigma sqrt(E_{n,l} / E)) at z = -E with gamma^2 = 2 mu E / hbar^2.
/// Throws AtPole for sigma = -1 within 1e-12 (relative) of E_{n,l}.
double tau_diagonal_special(int n, int l, double E, int sigma, double binding);

enum class TauRoute { DirectSolve, FactorizedCGC, DiagonalSpecial };

struct TauResult {
  int l = 0;
  Eigen::MatrixXcd tau;
  TauRoute route = TauRoute::DirectSolve;
  OperatorMeta meta;
  int N = 0;
  double rcond = 1.0;  // reciprocal condition estimate of A - sigma E (direct route)
};

/// tau = sigma (A - sigma E)^{-1} A by the requested route. DirectSolve uses a
/// dense LU of the truncated matrices and throws SingularShift when the
/// reciprocal condition estimate drops below 1e-13; DiagonalSpecial needs
/// y = -1 and throws InvalidArgument elsewhere.
TauResult tau_matrix(int l, const DimensionlessState& state, int sigma, int N, TauRoute route);

/// sqrt(alpha/2) sqrt(k^2 + gamma^2) / gamma^2.
double form_factor_prefactor(const PhysicalSystem& sys, double k);

struct FormFactorResult {
  cd value;            // sum over C_{n,n1} (closed C-matrix entries)
  cd value_resummed;   // Q-telescoped form with the first term split off
  double remainder = 0.0;  // estimate of the dropped tail n1 >= N
  int terms = 0;
  bool converged = false;
};

struct FormFactorOptions {
  double tol = 1e-8;
  bool strict = false;  // throw SlowConvergence instead of flagging
  bool conjugate = false;  // H* in place of H
};

/// Phi_{n,l,m}(k, z) summed over n1 = n..N-1. The remainder uses the large-n
/// behaviour of the tail coefficients and the size of the last basis values.
FormFactorResult phi_form_factor(const SpectralIndex& idx, const MomentumVector& k, cd z, const PhysicalSystem& sys,
                                 int N, const FormFactorOptions& opt = {});

struct TElementOptions {
  int N = 40;        // starting n-truncation per partial wave
  int N_max = 640;   // the truncation is doubled up to here while a shell is unconverged
  int l_max = 200;
  double tol = 1e-11;  // shell accuracy and stopping threshold, relative to |T|
  TauRoute tau_route = TauRoute::FactorizedCGC;
  bool accelerate = true;  // epsilon-extrapolate each shell over its square partial sums
  bool strict = false;
};

struct TElementResult {
  cd value;           // V + sum_l shell from the tau sum
  cd value_diagonal;  // V + sum_l shell from the g/(1-g) Phi Phi form
  double born = 0.0;  // the potential itself
  std::vector<cd> shells;
  std::vector<double> shell_error;
  std::vector<int> shell_N;
  int l_used = 0;
  bool converged = false;
};

/// <k2|T(z)|k1> with the first-order term taken in closed form and the
/// remainder expanded in partial waves. Each shell is a double sum over n1, n2
/// whose square partial sums converge like 1/N with oscillating sign; they are
/// extrapolated with the epsilon algorithm. The l-sum stops after two
/// consecutive shells below tolerance. Needs Re z < 0 or Im z > 0.
TElementResult t_element(const PhysicalSystem& sys, cd z, const MomentumVector& k2, const MomentumVector& k1,
                         const TElementOptions& opt = {});

struct PoleReport {
  int n = 0;
  int l = 0;
  double energy = 0.0;
  double expected = 0.0;
  double residue = 0.0;
  double direct_check = 0.0;  // |tau_direct - tau_special| / |tau_special| next to the pole
};

struct PoleScanOptions {
  int grid = 400;
  double tol = 1e-10;
};

/// Poles of the diagonal special-route tau for n in [n_lo, n_hi] inside the
/// energy window (e_lo, e_hi]. The sign of the product of all 1/tau_nn is
/// scanned on a logarithmic grid; each bracketed pole is refined by secant
/// steps and its residue extrapolated from (E - E_p) tau at symmetric offsets.
/// For sigma = +1 the list is empty. Throws MissedPole if an expected pole in
/// the window is not resolved (two poles in one grid cell).
std::vector<PoleReport> pole_scan(int l, int n_lo, int n_hi, const PhysicalSystem& sys, double e_lo, double e_hi,
                                  const PoleScanOptions& opt = {});

}  // namespace tmat
