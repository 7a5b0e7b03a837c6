#pragma once

// Shared test fixtures: RNG helpers, a linear-Gaussian model, a quadratic
// benchmark model, and an independent textbook Kalman filter used as the
// oracle against every engine.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "dsekit/filters.hpp"
#include "dsekit/matstab.hpp"

namespace testsupport {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = g(rng);
  return a;
}

inline dsekit::matstab::SymMatrix random_psd(std::mt19937_64& rng, int n, double scale = 1.0) {
  MatrixXd l = random_matrix(rng, n, n, scale);
  return dsekit::matstab::SymMatrix(l * l.transpose() + 1e-9 * MatrixXd::Identity(n, n));
}

// x' = A x + B u, y = H x; the exact KF is available in closed form.
class LinearModel : public dsekit::filters::ProcessModel {
 public:
  LinearModel(MatrixXd a, MatrixXd b, MatrixXd h, dsekit::matstab::SymMatrix q,
              dsekit::matstab::SymMatrix r)
      : a_(std::move(a)), b_(std::move(b)), h_(std::move(h)), q_(std::move(q)), r_(std::move(r)) {}

  int n() const override { return int(a_.rows()); }
  int p() const override { return int(h_.rows()); }
  VectorXd f(const VectorXd& x, const VectorXd& u) const override { return a_ * x + b_ * u; }
  VectorXd h(const VectorXd& x, const VectorXd&) const override { return h_ * x; }
  const dsekit::matstab::SymMatrix& q() const override { return q_; }
  const dsekit::matstab::SymMatrix& r() const override { return r_; }

  const MatrixXd& a() const { return a_; }
  const MatrixXd& b() const { return b_; }
  const MatrixXd& hmat() const { return h_; }

 private:
  MatrixXd a_, b_, h_;
  dsekit::matstab::SymMatrix q_, r_;
};

struct KfState {
  VectorXd m;
  MatrixXd p;
};

// Textbook Kalman step, written independently of the library.
inline KfState kf_step(const KfState& s, const LinearModel& model, const VectorXd& u,
                       const VectorXd& y) {
  VectorXd m_minus = model.a() * s.m + model.b() * u;
  MatrixXd p_minus = model.a() * s.p * model.a().transpose() + model.q().mat();
  MatrixXd pyy = model.hmat() * p_minus * model.hmat().transpose() + model.r().mat();
  MatrixXd k = p_minus * model.hmat().transpose() * pyy.inverse();
  KfState out;
  out.m = m_minus + k * (y - model.hmat() * m_minus);
  out.p = p_minus - k * pyy * k.transpose();
  out.p = 0.5 * (out.p + out.p.transpose()).eval();
  return out;
}

// Mildly nonlinear map: a contraction plus a quadratic coupling. `gain`
// controls curvature; large state dimension with the dimension-cancelling
// kappa makes the center weight strongly negative, which is the classic
// covariance-failure regime.
class QuadraticModel : public dsekit::filters::ProcessModel {
 public:
  QuadraticModel(int n, int p, double gain, unsigned seed, double q_scale = 1e-4,
                 double r_scale = 1e-2)
      : n_(n), p_(p), gain_(gain), q_(dsekit::matstab::SymMatrix(q_scale * MatrixXd::Identity(n, n))),
        r_(dsekit::matstab::SymMatrix(r_scale * MatrixXd::Identity(p, p))) {
    std::mt19937_64 rng(seed);
    mix_ = random_matrix(rng, n, n, 1.0 / std::sqrt(double(n)));
    hsel_ = random_matrix(rng, p, n, 1.0 / std::sqrt(double(n)));
  }

  int n() const override { return n_; }
  int p() const override { return p_; }
  VectorXd f(const VectorXd& x, const VectorXd&) const override {
    VectorXd mixed = mix_ * x;
    return 0.95 * x + gain_ * mixed.array().square().matrix();
  }
  VectorXd h(const VectorXd& x, const VectorXd&) const override { return hsel_ * x; }
  const dsekit::matstab::SymMatrix& q() const override { return q_; }
  const dsekit::matstab::SymMatrix& r() const override { return r_; }

 private:
  int n_, p_;
  double gain_;
  MatrixXd mix_, hsel_;
  dsekit::matstab::SymMatrix q_, r_;
};

}  // namespace testsupport
