#include "tmat/oracle/truncated.hpp"

#include <Eigen/LU>
#include <string>

#include "tmat/errors.hpp"
#include "tmat/opmatrix.hpp"

namespace tmat::oracle {

TruncatedSolve solve_truncated_ls(int l, const DimensionlessState& state, int sigma, int N,
                                  const QuadratureSpec& quad) {
  require(sigma == 1 || sigma == -1 || sigma == 0, ErrorKind::InvalidArgument, "sigma must be -1, 0 or +1");
  TruncatedSolve out;
  out.a_inverse = a_inverse_quadrature_matrix(l, state, N, quad);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(N, N);
  const Eigen::MatrixXcd M = I - double(sigma) * out.a_inverse;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  out.rcond = lu.rcond();
  require(out.rcond > 1e-12, ErrorKind::IllConditioned,
          "E - sigma A^{-1} is ill-conditioned (rcond " + std::to_string(out.rcond) + ")");
  out.tau = lu.solve(double(sigma) * I);
  const Eigen::MatrixXcd r = out.tau - double(sigma) * I - double(sigma) * out.a_inverse * out.tau;
  const double scale = out.tau.cwiseAbs().maxCoeff();
  out.residual = scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
  return out;
}

TruncatedSolve solve_truncated_ls(int l, const PhysicalSystem& sys, cd z, int N, const QuadratureSpec& quad) {
  sys.validate(true);
  return solve_truncated_ls(l, to_dimensionless(sys, z, BranchSelection::TBranch), sys.sigma, N, quad);
}

}  // namespace tmat::oracle
