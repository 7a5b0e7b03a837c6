#pragma once

#include <Eigen/Dense>

#include "dsekit/errors.hpp"
#include "dsekit/matstab.hpp"

// Scaled sigma-point machinery: weights, point generation, and propagated
// moments in classic and center-anchored ("modified") forms.
namespace dsekit::ut {

struct UTConfig {
  double alpha = 1.0;
  double beta = 0.0;
  double kappa = 0.0;

  double lambda(int n) const { return alpha * alpha * (n + kappa) - n; }
};

struct UTWeights {
  Eigen::VectorXd wm;  // length 2n+1
  Eigen::VectorXd wc;  // length 2n+1
  double eta = 0.0;    // sigma-point spread sqrt(n + lambda)
};

struct SigmaSet {
  Eigen::MatrixXd points;  // n x (2n+1); column 0 is the mean
  Eigen::VectorXd center() const { return points.col(0); }
};

enum class MomentMode { classic, modified };

// Weight vectors for a scaled sigma set: wm0 = lambda/(n+lambda),
// wc0 = wm0 + (1 - alpha^2 + beta), wmi = wci = 1/(2(n+lambda)).
// Throws NonPositiveScale when n + lambda <= 0 (eta undefined).
UTWeights ut_weights(int n, const UTConfig& cfg);

// Columns {m, m + eta*S[:,i], m - eta*S[:,i]} for i = 1..n.
SigmaSet sigma_points(const Eigen::VectorXd& m, const matstab::TriFactor& s, double eta);

// Mean and covariance of already-propagated points (rows = outputs,
// cols = 2n+1), plus an additive term (process or measurement noise).
// classic: deviations about the weighted mean. modified: deviations about
// the 0th propagated column; the i=0 term vanishes identically, and the
// result is PSD by construction whenever wc[i>=1] >= 0 and additive is PSD.
// The returned mean is the weighted mean in both modes.
std::pair<Eigen::VectorXd, matstab::SymMatrix> ut_moments(const Eigen::MatrixXd& propagated,
                                                          const UTWeights& w,
                                                          const matstab::SymMatrix& additive,
                                                          MomentMode mode);

// Sum of wc_i (X_i - x_mean)(Y_i - y_mean)^T over all columns.
Eigen::MatrixXd cross_cov(const SigmaSet& x_points, const Eigen::VectorXd& x_mean,
                          const Eigen::MatrixXd& y_points, const Eigen::VectorXd& y_mean,
                          const Eigen::VectorXd& wc);

}  // namespace dsekit::ut
