#pragma once

#include <complex>
#include <optional>

namespace tmat {

using cd = std::complex<double>;

/// Physical inputs of the two-body Coulomb problem. `sigma` is +1 for
/// repulsion and -1 for attraction; 0 is accepted only where the caller
/// explicitly asks for the free (Born) limit.
struct PhysicalSystem {
  double alpha = 1.0;  // |Z1 Z2 e^2 / (4 pi eps0)|
  double mu = 1.0;     // reduced mass
  double hbar = 1.0;
  int sigma = -1;
  double gamma = 1.0;  // basis momentum scale

  void validate(bool allow_free = false) const;
};

/// How to treat a negative-real reduced energy. `Unspecified` routes it to the
/// real t-branch but raises the ambiguity flag on the resulting state.
enum class BranchSelection { Unspecified, TBranch, Complex };

enum class EnergyBranch { Complex, NegativeReal };

/// Reduced variables y = 2 mu z / (gamma hbar)^2, rho = alpha mu / (gamma hbar^2)
/// and x = (y-1)/(y+1).
struct DimensionlessState {
  cd y;
  double rho = 0.0;
  std::optional<cd> x;  // empty at y = -1
  cd sqrt_y;            // principal root, Im >= 0 (z = E + i0)
  EnergyBranch branch = EnergyBranch::Complex;
  double t = 0.0;  // -y on the negative-real branch, 0 otherwise
  bool branch_ambiguity = false;

  bool negative_real() const noexcept { return branch == EnergyBranch::NegativeReal; }
  /// y = -1 exactly: the diagonal special point.
  bool special_point() const noexcept { return !x.has_value(); }
};

struct SpectralIndex {
  int n = 0;
  int l = 0;
  int m = 0;

  void validate() const;
};

/// Reduced state directly from (y, rho); used where no physical system exists.
DimensionlessState make_state(cd y, double rho,
                              BranchSelection selection = BranchSelection::Unspecified);

DimensionlessState to_dimensionless(const PhysicalSystem& sys, cd z,
                                    BranchSelection selection = BranchSelection::Unspecified);

/// Inverse map y -> z for the same system.
cd from_dimensionless(const PhysicalSystem& sys, cd y);

/// mu alpha^2 / (2 hbar^2). The hydrogen-like ground-state binding energy for
/// the attractive case.
double binding_energy(const PhysicalSystem& sys);

/// E_b / (n + l + 1)^2.
double hydrogen_level(int n, int l, double binding);

/// Copy of `sys` with gamma^2 = 2 mu E / hbar^2, which makes y = -1 at z = -E.
PhysicalSystem with_special_gamma(const PhysicalSystem& sys, double energy);

}  // namespace tmat
