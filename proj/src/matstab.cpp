#include "dsekit/matstab.hpp"

#include <cmath>
#include <limits>

namespace dsekit::matstab {

std::pair<TriFactor, bool> schol(const SymMatrix& p, double pivot_tol) {
  const Eigen::Index n = p.rows();
  const Eigen::MatrixXd& a = p.mat();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);

  for (Eigen::Index j = 0; j < n; ++j) {
    double s = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    // A pivot at or below the threshold is zeroed instead of aborting; the
    // rest of the column is zeroed with it so the factor stays well defined.
    l(j, j) = (s > pivot_tol) ? std::sqrt(s) : 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = (l(j, j) > pivot_tol) ? v / l(j, j) : 0.0;
    }
  }

  TriFactor f(l);
  const double resid = (l * l.transpose() - a).norm();
  const bool exact = resid <= 1e-10 * a.norm();
  return {f, exact};
}

TriFactor chol_rank1(const TriFactor& lf, const Eigen::VectorXd& v, int sign) {
  const Eigen::Index n = lf.rows();
  if (v.size() != n) throw DimensionError("chol_rank1: vector length mismatch");
  if (sign != 1 && sign != -1) throw DimensionError("chol_rank1: sign must be +1 or -1");

  Eigen::MatrixXd l = lf.mat();
  Eigen::VectorXd w = v;

  if (sign > 0) {
    // Givens rotations against the appended column; zero pivots are handled
    // (r == 0 means nothing to rotate, and a zero pivot with w(i) != 0 just
    // promotes |w| onto the diagonal).
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = std::hypot(l(i, i), w(i));
      if (r == 0.0) continue;
      const double c = l(i, i) / r;
      const double s = w(i) / r;
      l(i, i) = r;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double lj = l(j, i);
        l(j, i) = c * lj + s * w(j);
        w(j) = c * w(j) - s * lj;
      }
      w(i) = 0.0;
    }
    return TriFactor(l);
  }

  // Downdate via hyperbolic rotations. A negative pivot means L L^T - v v^T
  // is not PSD and no factor exists.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lii = l(i, i);
    if (lii == 0.0 && w(i) == 0.0) {
      // Nothing to remove in this direction; a degenerate factor with mass
      // below a zero pivot cannot be downdated in factor form.
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (l(j, i) != 0.0)
          throw DowndateBrokePsd("chol_rank1: degenerate zero pivot in downdate");
      continue;
    }
    const double d = lii * lii - w(i) * w(i);
    if (d < 0.0) throw DowndateBrokePsd("chol_rank1: downdate pivot went negative");
    const double r = std::sqrt(d);
    const double alpha = w(i) / lii;
    l(i, i) = r;
    if (r > 0.0) {
      const double cbar = r / lii;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double lj = l(j, i);
        l(j, i) = (lj - alpha * w(j)) / cbar;
        w(j) = (w(j) - alpha * lj) / cbar;
      }
    } else {
      // Pivot annihilated exactly: the downdated matrix has a zero diagonal
      // here, so the rest of the column must vanish too or PSD is lost.
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (l(j, i) != alpha * w(j))
          throw DowndateBrokePsd("chol_rank1: downdate annihilated a pivot with residual column mass");
        l(j, i) = 0.0;
        w(j) = 0.0;
      }
    }
    w(i) = 0.0;
  }
  return TriFactor(l);
}

Eigen::MatrixXd thin_qr_r(const Eigen::MatrixXd& a) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (m < n) throw DimensionError("thin_qr_r: need rows >= cols");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  // Fix the sign convention: nonnegative diagonal, deterministically.
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0.0) r.row(i) = -r.row(i);
  return r;
}

namespace {

// Projection onto eigenvalues above a relative cutoff; everything at or
// below tau * max(d) is dropped. A spectrum with no positive part projects
// to the zero matrix.
Eigen::MatrixXd eig_clip(const Eigen::MatrixXd& r, double tau) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (r + r.transpose()));
  const Eigen::VectorXd& d = es.eigenvalues();
  const double dmax = d.maxCoeff();
  if (dmax <= 0.0) return Eigen::MatrixXd::Zero(r.rows(), r.cols());
  const double cut = tau * dmax;
  Eigen::VectorXd dk = d;
  for (Eigen::Index i = 0; i < dk.size(); ++i)
    if (dk(i) <= cut) dk(i) = 0.0;
  return es.eigenvectors() * dk.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

NearPdResult near_pd(const SymMatrix& a, const NearPdConfig& cfg) {
  if (cfg.tau_eig <= 0 || cfg.tau_conv <= 0 || cfg.tau_posd <= 0 || cfg.max_iter < 1)
    throw DimensionError("near_pd: thresholds must be positive and max_iter >= 1");

  const Eigen::Index n = a.rows();
  Eigen::MatrixXd x = a.mat();
  Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(n, n);

  int iter = 0;
  bool converged = false;
  while (iter < cfg.max_iter) {
    ++iter;
    const Eigen::MatrixXd y = x;
    const Eigen::MatrixXd r = y - ds;  // correction keeps the drift anchored
    x = eig_clip(r, cfg.tau_eig);
    ds = x - r;
    const double nx = x.norm();
    const double diff = (y - x).norm();
    const double rel = nx > 0.0 ? diff / nx : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    if (rel <= cfg.tau_conv) {
      converged = true;
      break;
    }
  }

  // Final lift: floor small/negative eigenvalues at Eps = tau_posd * max(d)
  // and rescale so diagonal entries that were already healthy keep their
  // original values.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (x + x.transpose()));
  Eigen::VectorXd d = es.eigenvalues();
  const double dmax = d.maxCoeff();
  const double eps_floor = cfg.tau_posd * dmax;
  if (dmax > 0.0 && d.minCoeff() < eps_floor) {
    const Eigen::VectorXd odiag = x.diagonal();
    for (Eigen::Index i = 0; i < n; ++i) d(i) = std::max(d(i), eps_floor);
    x = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i)
      scale(i) = std::sqrt(std::max(eps_floor, odiag(i)) / x(i, i));
    x = scale.asDiagonal() * x * scale.asDiagonal();
  }

  NearPdResult out;
  out.x = SymMatrix(x);  // construction symmetrizes exactly
  out.iterations = iter;
  out.converged = converged;
  return out;
}

double frobenius_norm(const Eigen::MatrixXd& a) { return a.norm(); }

}  // namespace dsekit::matstab
