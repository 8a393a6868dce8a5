#pragma once

// Dense solve of the basis-projected Lippmann-Schwinger system
// tau = sigma E + sigma A^{-1} tau with A^{-1} taken from quadrature.

#include <Eigen/Core>

#include "tmat/oracle/halfline.hpp"
#include "tmat/params.hpp"

namespace tmat::oracle {

struct TruncatedSolve {
  Eigen::MatrixXcd tau;
  Eigen::MatrixXcd a_inverse;
  double residual = 0.0;  // max |tau - sigma E - sigma A^{-1} tau| / max |tau|
  double rcond = 1.0;
};

/// Throws IllConditioned when the reciprocal condition estimate of
/// E - sigma A^{-1} drops below 1e-12.
TruncatedSolve solve_truncated_ls(int l, const DimensionlessState& state, int sigma, int N,
                                  const QuadratureSpec& quad = {});
TruncatedSolve solve_truncated_ls(int l, const PhysicalSystem& sys, cd z, int N, const QuadratureSpec& quad = {});

}  // namespace tmat::oracle
