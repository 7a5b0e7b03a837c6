#pragma once

#include <Eigen/Dense>
#include <utility>

#include "dsekit/errors.hpp"

// Factorization primitives that keep working (or fail loudly, by contract)
// when a covariance drifts to the edge of positive semidefiniteness.
namespace dsekit::matstab {

// Square symmetric matrix. Construction symmetrizes: X <- (A + A^T)/2,
// so every downstream op sees an exactly symmetric matrix.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw DimensionError("SymMatrix: matrix must be square");
    m_ = 0.5 * (a + a.transpose()).eval();
  }
  static SymMatrix Zero(Eigen::Index n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }
  static SymMatrix Identity(Eigen::Index n) { return SymMatrix(Eigen::MatrixXd::Identity(n, n)); }

  Eigen::Index rows() const { return m_.rows(); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

// Lower-triangular factor L with P = L L^T. Entries above the diagonal are
// forced to zero on construction; the diagonal may contain exact zeros
// (semidefinite input) but is never negative for factors produced here.
class TriFactor {
 public:
  TriFactor() = default;
  explicit TriFactor(const Eigen::MatrixXd& l) {
    if (l.rows() != l.cols()) throw DimensionError("TriFactor: matrix must be square");
    m_ = l.triangularView<Eigen::Lower>();
  }
  static TriFactor Zero(Eigen::Index n) { return TriFactor(Eigen::MatrixXd::Zero(n, n)); }

  Eigen::Index rows() const { return m_.rows(); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  SymMatrix reconstruct() const { return SymMatrix(m_ * m_.transpose()); }

 private:
  Eigen::MatrixXd m_;
};

struct NearPdConfig {
  double tau_eig = 1e-6;   // relative eigenvalue-keep cutoff in the projection step
  double tau_conv = 1e-7;  // relative change threshold that ends the loop
  double tau_posd = 1e-7;  // relative floor applied by the final eigenvalue lift
  int max_iter = 100;
};

struct NearPdResult {
  SymMatrix x;
  int iterations = 0;
  bool converged = true;  // false: iteration budget exhausted, x is best effort
};

// Tolerant lower Cholesky. Semidefinite (or slightly indefinite) inputs do
// not throw: a pivot whose residual falls at or below `pivot_tol` yields a
// zero row segment instead. Returns the factor and an exactness flag,
// true iff ||L L^T - P||_F <= 1e-10 * ||P||_F, i.e. the input was
// numerically PSD and the factorization is a faithful square root.
std::pair<TriFactor, bool> schol(const SymMatrix& p,
                                 double pivot_tol = 2.220446049250313e-16);

// Rank-1 Cholesky factor update (sign=+1): L' L'^T = L L^T + v v^T, via
// Givens rotations; tolerates zero pivots. Downdate (sign=-1):
// L' L'^T = L L^T - v v^T via hyperbolic rotations; throws DowndateBrokePsd
// if the downdated matrix is not PSD.
TriFactor chol_rank1(const TriFactor& l, const Eigen::VectorXd& v, int sign);

// Thin QR of an m x n matrix (m >= n): returns upper-triangular R (n x n)
// with A^T A = R^T R and a nonnegative diagonal. Q is never formed.
Eigen::MatrixXd thin_qr_r(const Eigen::MatrixXd& a);

// Nearest-PSD repair: alternating projections with a correction term onto
// the PSD cone / symmetric space, then a final eigenvalue lift so the
// result is strictly factorizable. Running past the iteration budget is
// reported through `converged`, not thrown.
NearPdResult near_pd(const SymMatrix& a, const NearPdConfig& cfg = {});

// sqrt of the sum of squared entries.
double frobenius_norm(const Eigen::MatrixXd& a);

}  // namespace dsekit::matstab
