#include "dsekit/filters.hpp"

#include <cmath>
#include <functional>

namespace dsekit::filters {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using matstab::SymMatrix;
using matstab::TriFactor;

StabilizerStrategy make_strategy(StabilizerKind kind, int n, double delta_std) {
  StabilizerStrategy s;
  s.kind = kind;
  if (kind == StabilizerKind::deltaq)
    s.delta_q = SymMatrix(delta_std * delta_std * MatrixXd::Identity(n, n));
  return s;
}

namespace {

double min_eigenvalue(const SymMatrix& p) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(p.mat()).eigenvalues().minCoeff();
}

// Factor `cov` under the strategy. On an inexact factorization the event is
// recorded; gps swaps in the projection repair (and replaces `cov`), the
// halting baseline throws, everything else proceeds with the tolerant
// factor.
TriFactor stabilized_factor(SymMatrix& cov, Phase phase, int step, StabilizerStrategy& strat,
                            StepDiagnostics& diag) {
  auto [s, exact] = matstab::schol(cov);
  if (exact) return s;

  const double min_eig = min_eigenvalue(cov);
  if (!diag.psd_failure) {
    diag.psd_failure = true;
    diag.min_eig_before = min_eig;
    diag.phase = phase;
  }

  if (strat.halt_on_inexact) {
    PsdFailureHalt err("covariance lost positive semidefiniteness");
    err.min_eig_before = min_eig;
    err.at_predicted_cov = phase == Phase::predicted;
    throw err;
  }

  if (strat.kind == StabilizerKind::gps) {
    strat.repair_log.push_back({step, phase, min_eig});
    matstab::NearPdResult rep = matstab::near_pd(cov, strat.nearpd_cfg);
    auto [s2, exact2] = matstab::schol(rep.x);
    if (!exact2) throw UnrepairablePsd("projection repair did not restore factorizability");
    cov = rep.x;
    diag.repaired = true;
    return s2;
  }

  return s;  // tolerant: proceed with the inexact factor
}

MatrixXd propagate(const MatrixXd& points, const VectorXd& u,
                   const std::function<VectorXd(const VectorXd&, const VectorXd&)>& fn, int out_dim) {
  MatrixXd out(out_dim, points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) out.col(i) = fn(points.col(i), u);
  return out;
}

ut::UTConfig effective_config(const ut::UTConfig& cfg, const StabilizerStrategy& strat, int n) {
  ut::UTConfig e = cfg;
  e.kappa = strat.effective_kappa(n);
  return e;
}

}  // namespace

UkfPrediction ukf_predict(const FilterBelief& belief, const ProcessModel& model,
                          const VectorXd& u, const ut::UTConfig& cfg, StabilizerStrategy& strat) {
  const int n = model.n();
  if (belief.mean.size() != n) throw DimensionError("ukf_predict: mean dimension mismatch");
  const ut::UTConfig ecfg = effective_config(cfg, strat, n);
  const ut::UTWeights w = ut::ut_weights(n, ecfg);
  const int step = belief.step + 1;

  UkfPrediction out;
  SymMatrix p_prior = belief.cov;
  TriFactor s = stabilized_factor(p_prior, Phase::prior, step, strat, out.diag);

  ut::SigmaSet x0 = ut::sigma_points(belief.mean, s, w.eta);
  MatrixXd xhat = propagate(
      x0.points, u, [&](const VectorXd& x, const VectorXd& uu) { return model.f(x, uu); }, n);

  SymMatrix additive = model.q();
  if (strat.kind == StabilizerKind::deltaq)
    additive = SymMatrix(additive.mat() + strat.delta_q.mat());
  const ut::MomentMode mode = strat.kind == StabilizerKind::modified ? ut::MomentMode::modified
                                                                     : ut::MomentMode::classic;
  auto [m_minus, p_minus] = ut::ut_moments(xhat, w, additive, mode);

  TriFactor s_pred = stabilized_factor(p_minus, Phase::predicted, step, strat, out.diag);

  out.x_points = ut::sigma_points(m_minus, s_pred, w.eta);
  out.y_points = propagate(
      out.x_points.points, u, [&](const VectorXd& x, const VectorXd& uu) { return model.h(x, uu); },
      model.p());
  out.y_pred = out.y_points * w.wm;

  out.predicted.mean = m_minus;
  out.predicted.cov = p_minus;  // repaired version when gps intervened
  out.predicted.step = step;
  return out;
}

FilterBelief ukf_update(const FilterBelief& predicted, const VectorXd& y_obs,
                        const VectorXd& y_pred, const MatrixXd& y_points,
                        const ut::SigmaSet& x_points, const ProcessModel& model,
                        const ut::UTConfig& cfg, StabilizerStrategy& strat) {
  const int n = model.n();
  if (y_obs.size() != model.p()) throw DimensionError("ukf_update: observation dimension mismatch");
  const ut::UTWeights w = ut::ut_weights(n, effective_config(cfg, strat, n));

  const ut::MomentMode mode = strat.kind == StabilizerKind::modified ? ut::MomentMode::modified
                                                                     : ut::MomentMode::classic;
  auto [y_mean_w, p_yy] = ut::ut_moments(y_points, w, model.r(), mode);
  (void)y_mean_w;  // innovation uses the caller's weighted prediction

  MatrixXd p_xy = ut::cross_cov(x_points, predicted.mean, y_points, y_pred, w.wc);

  Eigen::FullPivLU<MatrixXd> lu(p_yy.mat());
  if (!lu.isInvertible()) throw SingularInnovation("innovation covariance is singular");
  // K = P_xy * P_yy^-1 via a solve on the transposed system.
  MatrixXd k = lu.solve(p_xy.transpose()).transpose();

  FilterBelief out;
  out.mean = predicted.mean + k * (y_obs - y_pred);
  out.cov = SymMatrix(predicted.cov.mat() - k * p_yy.mat() * k.transpose());
  out.step = predicted.step;
  return out;
}

namespace {

// Lower factor of the innovation-style Gram stack: QR of
// [sqrt(wc1)*(cols 1..2n - center_ref)^T ; noise_factor^T], then a rank-1
// update with sqrt(|wc0|)*(col 0 - center_ref).
//
// The center term always enters as an update, never a downdate: the factored
// form folds a negative center weight in through its absolute value. This is
// what makes the square-root filter unconditionally well posed — a downdate
// by the center deviation is exactly the operation that becomes impossible
// once the signed-weight covariance loses positive semidefiniteness, and the
// whole point of propagating the factor is that no step can manufacture an
// indefinite matrix. The cost is a deliberate, slight inflation relative to
// the signed-weight covariance (2|wc0| dev0 dev0^T), which vanishes as the
// center deviation does and keeps the later measurement downdates feasible:
// with both marginals inflated and the cross term signed, the joint moment
// matrix is a sum of outer products, so the posterior Schur complement
// stays positive semidefinite no matter how curved the model is.
TriFactor sr_factor(const MatrixXd& points, const VectorXd& mean, const ut::UTWeights& w,
                    const SymMatrix& noise) {
  const Eigen::Index d = points.rows();
  const Eigen::Index wings = points.cols() - 1;
  if (w.wc(1) <= 0.0) throw NonPositiveScale("square-root form needs positive wing weights");

  TriFactor noise_factor = matstab::schol(noise).first;

  MatrixXd a(wings + d, d);
  a.topRows(wings) =
      std::sqrt(w.wc(1)) * (points.rightCols(wings).colwise() - mean).transpose();
  a.bottomRows(d) = noise_factor.mat().transpose();

  MatrixXd r1 = matstab::thin_qr_r(a);
  TriFactor lower(r1.transpose());

  const VectorXd dev0 = std::sqrt(std::abs(w.wc(0))) * (points.col(0) - mean);
  if (dev0.norm() == 0.0) return lower;
  return matstab::chol_rank1(lower, dev0, +1);
}

}  // namespace

SrukfPrediction srukf_predict(const FilterBelief& belief, const ProcessModel& model,
                              const VectorXd& u, const ut::UTConfig& cfg) {
  const int n = model.n();
  if (!belief.has_factor()) throw DimensionError("srukf_predict: belief carries no factor");
  const ut::UTWeights w = ut::ut_weights(n, cfg);

  ut::SigmaSet x0 = ut::sigma_points(belief.mean, belief.factor, w.eta);
  MatrixXd xhat = propagate(
      x0.points, u, [&](const VectorXd& x, const VectorXd& uu) { return model.f(x, uu); }, n);
  VectorXd m_minus = xhat * w.wm;

  TriFactor s_minus = sr_factor(xhat, m_minus, w, model.q());

  SrukfPrediction out;
  out.predicted.mean = m_minus;
  out.predicted.factor = s_minus;
  out.predicted.step = belief.step + 1;
  out.x_points = ut::sigma_points(m_minus, s_minus, w.eta);
  out.y_points = propagate(
      out.x_points.points, u, [&](const VectorXd& x, const VectorXd& uu) { return model.h(x, uu); },
      model.p());
  out.y_pred = out.y_points * w.wm;
  return out;
}

FilterBelief srukf_update(const FilterBelief& predicted, const VectorXd& y_obs,
                          const VectorXd& y_pred, const MatrixXd& y_points,
                          const ut::SigmaSet& x_points, const ProcessModel& model,
                          const ut::UTConfig& cfg) {
  const int n = model.n();
  const int p = model.p();
  if (y_obs.size() != p) throw DimensionError("srukf_update: observation dimension mismatch");
  const ut::UTWeights w = ut::ut_weights(n, cfg);

  TriFactor s_y = sr_factor(y_points, y_pred, w, model.r());
  for (int i = 0; i < p; ++i)
    if (s_y(i, i) == 0.0) throw SingularInnovation("innovation factor has a zero pivot");

  MatrixXd p_xy = ut::cross_cov(x_points, predicted.mean, y_points, y_pred, w.wc);

  // K = P_xy (S_y S_y^T)^-1 by two triangular solves; P_yy never formed.
  MatrixXd t = s_y.mat().triangularView<Eigen::Lower>().solve(p_xy.transpose());  // S_y^-1 P_xy^T
  MatrixXd k = s_y.mat().transpose().triangularView<Eigen::Upper>().solve(t).transpose();

  FilterBelief out;
  out.mean = predicted.mean + k * (y_obs - y_pred);
  out.step = predicted.step;

  MatrixXd u_cols = k * s_y.mat();  // n x p
  TriFactor s = predicted.factor;
  for (int j = 0; j < p; ++j) s = matstab::chol_rank1(s, u_cols.col(j), -1);
  out.factor = s;
  return out;
}

namespace {

MatrixXd central_jacobian(const std::function<VectorXd(const VectorXd&)>& fn, const VectorXd& x,
                          int out_dim, double eps) {
  MatrixXd j(out_dim, x.size());
  VectorXd xp = x, xm = x;
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    xp(c) = x(c) + eps;
    xm(c) = x(c) - eps;
    j.col(c) = (fn(xp) - fn(xm)) / (2.0 * eps);
    xp(c) = x(c);
    xm(c) = x(c);
  }
  return j;
}

}  // namespace

FilterBelief ekf_step(const FilterBelief& belief, const ProcessModel& model, const VectorXd& u,
                      const VectorXd& y_obs, double jac_eps) {
  if (jac_eps <= 0.0) throw NonPositiveScale("ekf_step: jac_eps must be positive");
  const int n = model.n();
  const int p = model.p();

  MatrixXd fjac = central_jacobian([&](const VectorXd& x) { return model.f(x, u); }, belief.mean,
                                   n, jac_eps);
  VectorXd m_minus = model.f(belief.mean, u);
  SymMatrix p_minus(fjac * belief.cov.mat() * fjac.transpose() + model.q().mat());

  MatrixXd hjac = central_jacobian([&](const VectorXd& x) { return model.h(x, u); }, m_minus, p,
                                   jac_eps);
  VectorXd y_pred = model.h(m_minus, u);
  SymMatrix p_yy(hjac * p_minus.mat() * hjac.transpose() + model.r().mat());

  Eigen::FullPivLU<MatrixXd> lu(p_yy.mat());
  if (!lu.isInvertible()) throw SingularInnovation("innovation covariance is singular");
  MatrixXd p_xy = p_minus.mat() * hjac.transpose();
  MatrixXd k = lu.solve(p_xy.transpose()).transpose();

  FilterBelief out;
  out.mean = m_minus + k * (y_obs - y_pred);
  out.cov = SymMatrix(p_minus.mat() - k * p_yy.mat() * k.transpose());
  out.step = belief.step + 1;
  return out;
}

const char* filter_kind_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::ekf: return "ekf";
    case FilterKind::ukf_classic: return "ukf_classic";
    case FilterKind::ukf_schol: return "ukf_schol";
    case FilterKind::ukf_kappa: return "ukf_kappa";
    case FilterKind::ukf_modified: return "ukf_modified";
    case FilterKind::ukf_deltaq: return "ukf_deltaq";
    case FilterKind::ukf_gps: return "ukf_gps";
    case FilterKind::sr_ukf: return "sr_ukf";
  }
  return "?";
}

bool parse_filter_kind(const std::string& name, FilterKind& out) {
  for (FilterKind k : {FilterKind::ekf, FilterKind::ukf_classic, FilterKind::ukf_schol,
                       FilterKind::ukf_kappa, FilterKind::ukf_modified, FilterKind::ukf_deltaq,
                       FilterKind::ukf_gps, FilterKind::sr_ukf}) {
    if (name == filter_kind_name(k)) {
      out = k;
      return true;
    }
  }
  return false;
}

FilterRun run_filter(FilterKind kind, const ProcessModel& model, const FilterBelief& belief0,
                     const std::vector<VectorXd>& inputs, const std::vector<VectorXd>& observations,
                     const RunOptions& opts) {
  if (inputs.size() != observations.size())
    throw DimensionError("run_filter: input/observation series length mismatch");

  const int n = model.n();
  const bool sr = kind == FilterKind::sr_ukf;
  const bool ekf = kind == FilterKind::ekf;

  StabilizerStrategy strat;
  switch (kind) {
    case FilterKind::ukf_classic:
      strat = make_strategy(StabilizerKind::schol, n);
      strat.halt_on_inexact = true;
      break;
    case FilterKind::ukf_schol: strat = make_strategy(StabilizerKind::schol, n); break;
    case FilterKind::ukf_kappa: strat = make_strategy(StabilizerKind::kappa, n); break;
    case FilterKind::ukf_modified: strat = make_strategy(StabilizerKind::modified, n); break;
    case FilterKind::ukf_deltaq:
      strat = make_strategy(StabilizerKind::deltaq, n, opts.delta_q_std);
      break;
    case FilterKind::ukf_gps:
      strat = make_strategy(StabilizerKind::gps, n);
      strat.nearpd_cfg = opts.nearpd_cfg;
      break;
    default: break;
  }

  ut::UTConfig cfg;
  cfg.alpha = opts.alpha;
  cfg.beta = opts.beta;
  cfg.kappa = 3.0 - double(n);  // square-root form shares the heuristic

  FilterBelief belief = belief0;
  if (sr && !belief.has_factor()) belief.factor = matstab::schol(belief.cov).first;

  FilterRun run;
  run.beliefs.reserve(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const int step = int(k) + 1;
    StepDiagnostics diag;
    try {
      if (ekf) {
        belief = ekf_step(belief, model, inputs[k], observations[k], opts.jac_eps);
      } else if (sr) {
        SrukfPrediction pred = srukf_predict(belief, model, inputs[k], cfg);
        belief = srukf_update(pred.predicted, observations[k], pred.y_pred, pred.y_points,
                              pred.x_points, model, cfg);
      } else {
        UkfPrediction pred = ukf_predict(belief, model, inputs[k], cfg, strat);
        diag = pred.diag;
        belief = ukf_update(pred.predicted, observations[k], pred.y_pred, pred.y_points,
                            pred.x_points, model, cfg, strat);
      }
    } catch (const PsdFailureHalt& e) {
      diag.psd_failure = true;
      diag.min_eig_before = e.min_eig_before;
      diag.phase = e.at_predicted_cov ? Phase::predicted : Phase::prior;
      run.status = RunStatus::halted;
      run.failure_step = step;
      run.failure_reason = e.what();
      run.diagnostics.push_back(diag);
      break;
    } catch (const std::runtime_error& e) {
      run.status = RunStatus::halted;
      run.failure_step = step;
      run.failure_reason = e.what();
      run.diagnostics.push_back(diag);
      break;
    }

    run.beliefs.push_back(belief);
    run.diagnostics.push_back(diag);

    const bool finite = belief.mean.allFinite();
    if (!finite || belief.mean.cwiseAbs().maxCoeff() > opts.divergence_limit) {
      run.status = RunStatus::diverged;
      run.failure_step = step;
      run.failure_reason = finite ? "mean magnitude exceeded the divergence limit"
                                  : "mean turned non-finite";
      break;
    }
  }

  run.repair_log = std::move(strat.repair_log);
  return run;
}

}  // namespace dsekit::filters
