#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dsekit/errors.hpp"
#include "dsekit/matstab.hpp"
#include "dsekit/unscented.hpp"

// Filter engines: EKF, sigma-point filter with pluggable covariance
// stabilization, and the square-root form — one predict+update cycle over
// an abstract process model, plus a sequential runner with diagnostics.
namespace dsekit::filters {

// Discrete-time system x' = f(x, u) + w, y = h(x, u) + v with additive
// noise covariances Q and R.
class ProcessModel {
 public:
  virtual ~ProcessModel() = default;
  virtual int n() const = 0;
  virtual int p() const = 0;
  virtual Eigen::VectorXd f(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;
  virtual Eigen::VectorXd h(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;
  virtual const matstab::SymMatrix& q() const = 0;
  virtual const matstab::SymMatrix& r() const = 0;
};

// Belief over the state: mean plus either a dense covariance (EKF and the
// covariance-form sigma-point filters) or a lower-triangular factor with
// P = S S^T (square-root form). `step` counts completed update cycles.
struct FilterBelief {
  Eigen::VectorXd mean;
  matstab::SymMatrix cov;
  matstab::TriFactor factor;
  int step = 0;

  bool has_factor() const { return factor.rows() > 0; }
};

enum class StabilizerKind { schol, kappa, modified, deltaq, gps };

enum class Phase { prior, predicted };

struct RepairEvent {
  int step = 0;
  Phase phase = Phase::prior;
  double min_eig_before = 0.0;
};

struct StepDiagnostics {
  bool psd_failure = false;
  double min_eig_before = 0.0;  // of the first offending covariance this step
  bool repaired = false;
  Phase phase = Phase::prior;
};

// Covariance-stabilization policy applied at the two square-root sites of
// the prediction step. The kappa policy is owned here: the kappa kind
// forces kappa = 0, every other kind uses 3 - n. `repair_log` accumulates
// one entry per projection repair actually executed (gps only).
struct StabilizerStrategy {
  StabilizerKind kind = StabilizerKind::schol;
  matstab::SymMatrix delta_q;  // deltaq only
  matstab::NearPdConfig nearpd_cfg;
  std::vector<RepairEvent> repair_log;
  bool halt_on_inexact = false;  // unstabilized baseline: stop at first failure

  double effective_kappa(int n) const {
    return kind == StabilizerKind::kappa ? 0.0 : 3.0 - double(n);
  }
};

// Ready-made strategy with the conventional defaults (deltaq gets
// delta_std^2 * I_n).
StabilizerStrategy make_strategy(StabilizerKind kind, int n, double delta_std = 0.005);

struct UkfPrediction {
  FilterBelief predicted;
  Eigen::VectorXd y_pred;
  Eigen::MatrixXd y_points;  // p x (2n+1)
  ut::SigmaSet x_points;     // regenerated from the predicted belief
  StepDiagnostics diag;
};

// Prediction cycle: factor the prior covariance, propagate sigma points
// through f, form the predicted moments (strategy decides the anchor and
// any Q inflation), factor the predicted covariance, redraw points, and
// push them through h. Both factorization sites run through the strategy;
// gps replaces the covariance with its repaired version.
UkfPrediction ukf_predict(const FilterBelief& belief, const ProcessModel& model,
                          const Eigen::VectorXd& u, const ut::UTConfig& cfg,
                          StabilizerStrategy& strat);

// Measurement update: innovation covariance (strategy anchor applies),
// cross-covariance, gain by linear solve, mean update, covariance
// downdate, symmetrize.
FilterBelief ukf_update(const FilterBelief& predicted, const Eigen::VectorXd& y_obs,
                        const Eigen::VectorXd& y_pred, const Eigen::MatrixXd& y_points,
                        const ut::SigmaSet& x_points, const ProcessModel& model,
                        const ut::UTConfig& cfg, StabilizerStrategy& strat);

struct SrukfPrediction {
  FilterBelief predicted;  // factor form
  Eigen::VectorXd y_pred;
  Eigen::MatrixXd y_points;
  ut::SigmaSet x_points;
};

// Square-root prediction: QR over the stacked scaled deviations and the
// process-noise factor, then a rank-1 update with the center deviation
// weighted by |wc[0]| — a negative center weight enters through its
// absolute value, so the factored prediction is always well posed (at the
// price of a slight inflation against the signed-weight covariance). The
// covariance is never formed.
SrukfPrediction srukf_predict(const FilterBelief& belief, const ProcessModel& model,
                              const Eigen::VectorXd& u, const ut::UTConfig& cfg);

// Square-root update: innovation factor by QR + rank-1, gain by two
// triangular solves, then one factor downdate per measurement column.
FilterBelief srukf_update(const FilterBelief& predicted, const Eigen::VectorXd& y_obs,
                          const Eigen::VectorXd& y_pred, const Eigen::MatrixXd& y_points,
                          const ut::SigmaSet& x_points, const ProcessModel& model,
                          const ut::UTConfig& cfg);

// One EKF cycle with central-finite-difference Jacobians.
FilterBelief ekf_step(const FilterBelief& belief, const ProcessModel& model,
                      const Eigen::VectorXd& u, const Eigen::VectorXd& y_obs,
                      double jac_eps = 1e-6);

enum class FilterKind {
  ekf,
  ukf_classic,  // unstabilized baseline: halts at the first PSD failure
  ukf_schol,
  ukf_kappa,
  ukf_modified,
  ukf_deltaq,
  ukf_gps,
  sr_ukf,
};

enum class RunStatus { completed, halted, diverged };

struct RunOptions {
  double alpha = 1.0;
  double beta = 0.0;
  double jac_eps = 1e-6;
  double delta_q_std = 0.005;
  matstab::NearPdConfig nearpd_cfg;
  double divergence_limit = 1e6;
};

struct FilterRun {
  std::vector<FilterBelief> beliefs;         // one per completed step
  std::vector<StepDiagnostics> diagnostics;  // aligned with beliefs
  RunStatus status = RunStatus::completed;
  int failure_step = -1;  // 1-based step at which the run ended early
  std::string failure_reason;
  std::vector<RepairEvent> repair_log;
};

// Drives predict/update over an observation stream. Step k (1-based) uses
// inputs[k-1] and observations[k-1]. Per-step numerical failures end the
// run with a recorded reason instead of propagating; a mean that leaves
// [-divergence_limit, divergence_limit] or turns non-finite marks the run
// diverged.
FilterRun run_filter(FilterKind kind, const ProcessModel& model, const FilterBelief& belief0,
                     const std::vector<Eigen::VectorXd>& inputs,
                     const std::vector<Eigen::VectorXd>& observations,
                     const RunOptions& opts = {});

const char* filter_kind_name(FilterKind kind);
bool parse_filter_kind(const std::string& name, FilterKind& out);

}  // namespace dsekit::filters
