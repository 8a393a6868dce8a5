#include <limits>
#include "tmat/params.hpp"

#include <cmath>
#include <string>

#include "tmat/errors.hpp"

namespace tmat {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

bool finite(cd v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

}  // namespace

void PhysicalSystem::validate(bool allow_free) const {
  require(positive_finite(alpha), ErrorKind::InvalidArgument, "alpha must be positive and finite");
  require(positive_finite(mu), ErrorKind::InvalidArgument, "mu must be positive and finite");
  require(positive_finite(hbar), ErrorKind::InvalidArgument, "hbar must be positive and finite");
  require(positive_finite(gamma), ErrorKind::InvalidArgument, "gamma must be positive and finite");
  const bool sign_ok = sigma == 1 || sigma == -1 || (allow_free && sigma == 0);
  require(sign_ok, ErrorKind::InvalidArgument,
          "sigma must be +1 or -1, got " + std::to_string(sigma));
}

void SpectralIndex::validate() const {
  require(n >= 0, ErrorKind::IndexError, "n must be >= 0");
  require(l >= 0, ErrorKind::IndexError, "l must be >= 0");
  require(m >= -l && m <= l, ErrorKind::IndexError, "|m| must not exceed l");
}

DimensionlessState make_state(cd y, double rho, BranchSelection selection) {
  require(finite(y), ErrorKind::NonFinite, "reduced energy y is not finite");
  require(positive_finite(rho), ErrorKind::InvalidArgument, "rho must be positive and finite");

  // Round-off from the special-gamma construction lands within a few ulps of -1.
  if (std::abs(y + 1.0) <= 8.0 * std::numeric_limits<double>::epsilon()) y = cd(-1.0, 0.0);

  DimensionlessState s;
  s.y = y;
  s.rho = rho;
  s.sqrt_y = std::sqrt(y);
  if (s.sqrt_y.imag() < 0.0) s.sqrt_y = -s.sqrt_y;

  if (y != cd(-1.0, 0.0)) s.x = (y - 1.0) / (y + 1.0);

  const bool neg_real = y.imag() == 0.0 && y.real() < 0.0;
  if (neg_real && selection != BranchSelection::Complex) {
    s.branch = EnergyBranch::NegativeReal;
    s.t = -y.real();
    s.sqrt_y = cd(0.0, std::sqrt(s.t));
    s.branch_ambiguity = selection == BranchSelection::Unspecified;
  }
  return s;
}

DimensionlessState to_dimensionless(const PhysicalSystem& sys, cd z, BranchSelection selection) {
  sys.validate(true);
  require(finite(z), ErrorKind::NonFinite, "energy z is not finite");
  const double scale = sys.gamma * sys.hbar;
  const cd y = 2.0 * sys.mu * z / (scale * scale);
  const double rho = sys.alpha * sys.mu / (sys.gamma * sys.hbar * sys.hbar);
  require(finite(y) && std::isfinite(rho), ErrorKind::NonFinite, "reduced variables overflow");
  return make_state(y, rho, selection);
}

cd from_dimensionless(const PhysicalSystem& sys, cd y) {
  const double scale = sys.gamma * sys.hbar;
  return y * scale * scale / (2.0 * sys.mu);
}

double binding_energy(const PhysicalSystem& sys) {
  return sys.mu * sys.alpha * sys.alpha / (2.0 * sys.hbar * sys.hbar);
}

double hydrogen_level(int n, int l, double binding) {
  require(n >= 0 && l >= 0, ErrorKind::IndexError, "hydrogen_level needs n, l >= 0");
  require(positive_finite(binding), ErrorKind::InvalidArgument, "binding energy must be positive");
  const double q = n + l + 1;
  return binding / (q * q);
}

PhysicalSystem with_special_gamma(const PhysicalSystem& sys, double energy) {
  require(positive_finite(energy), ErrorKind::InvalidArgument, "special gamma needs E > 0");
  PhysicalSystem out = sys;
  out.gamma = std::sqrt(2.0 * sys.mu * energy) / sys.hbar;
  return out;
}

}  // namespace tmat
