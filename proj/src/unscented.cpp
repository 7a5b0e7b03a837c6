#include "dsekit/unscented.hpp"

#include <cmath>

namespace dsekit::ut {

UTWeights ut_weights(int n, const UTConfig& cfg) {
  if (n < 1) throw DimensionError("ut_weights: n must be >= 1");
  if (cfg.alpha < 0.0 || cfg.beta < 0.0)
    throw NonPositiveScale("ut_weights: alpha and beta must be nonnegative");
  const double lambda = cfg.lambda(n);
  const double scale = n + lambda;
  if (scale <= 0.0) throw NonPositiveScale("ut_weights: n + lambda must be positive");

  UTWeights w;
  w.eta = std::sqrt(scale);
  w.wm = Eigen::VectorXd::Constant(2 * n + 1, 1.0 / (2.0 * scale));
  w.wc = w.wm;
  w.wm(0) = lambda / scale;
  w.wc(0) = w.wm(0) + (1.0 - cfg.alpha * cfg.alpha + cfg.beta);
  return w;
}

SigmaSet sigma_points(const Eigen::VectorXd& m, const matstab::TriFactor& s, double eta) {
  const Eigen::Index n = m.size();
  if (s.rows() != n) throw DimensionError("sigma_points: factor/mean dimension mismatch");
  SigmaSet set;
  set.points.resize(n, 2 * n + 1);
  set.points.col(0) = m;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd spread = eta * s.mat().col(i);
    set.points.col(1 + i) = m + spread;
    set.points.col(1 + n + i) = m - spread;
  }
  return set;
}

std::pair<Eigen::VectorXd, matstab::SymMatrix> ut_moments(const Eigen::MatrixXd& propagated,
                                                          const UTWeights& w,
                                                          const matstab::SymMatrix& additive,
                                                          MomentMode mode) {
  const Eigen::Index cols = propagated.cols();
  if (cols != w.wm.size() || cols % 2 == 0)
    throw DimensionError("ut_moments: need 2n+1 propagated columns matching the weights");
  if (additive.rows() != propagated.rows())
    throw DimensionError("ut_moments: additive term dimension mismatch");

  Eigen::VectorXd mean = propagated * w.wm;

  Eigen::MatrixXd cov;
  if (mode == MomentMode::classic) {
    Eigen::MatrixXd dev = propagated.colwise() - mean;
    cov = dev * w.wc.asDiagonal() * dev.transpose();
  } else {
    // Deviations about the 0th propagated column; its own term is zero, so
    // only the symmetric pairs contribute and the sum is a nonnegative
    // combination of outer products.
    Eigen::MatrixXd dev = (propagated.rightCols(cols - 1).colwise() - propagated.col(0)).eval();
    cov = dev * w.wc.tail(cols - 1).asDiagonal() * dev.transpose();
  }
  return {mean, matstab::SymMatrix(cov + additive.mat())};
}

Eigen::MatrixXd cross_cov(const SigmaSet& x_points, const Eigen::VectorXd& x_mean,
                          const Eigen::MatrixXd& y_points, const Eigen::VectorXd& y_mean,
                          const Eigen::VectorXd& wc) {
  if (x_points.points.cols() != y_points.cols() || wc.size() != y_points.cols())
    throw DimensionError("cross_cov: column count mismatch");
  if (x_points.points.rows() != x_mean.size() || y_points.rows() != y_mean.size())
    throw DimensionError("cross_cov: mean dimension mismatch");
  Eigen::MatrixXd dx = x_points.points.colwise() - x_mean;
  Eigen::MatrixXd dy = y_points.colwise() - y_mean;
  return dx * wc.asDiagonal() * dy.transpose();
}

}  // namespace dsekit::ut
