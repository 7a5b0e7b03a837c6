// Acceptance gate: nine oracle-backed checks over the whole stack, printed
// one verdict line each. Every tolerance is fixed here, independent of the
// implementation; the exit code is the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dsekit/filters.hpp"
#include "dsekit/harness.hpp"
#include "dsekit/io.hpp"
#include "dsekit/matstab.hpp"
#include "dsekit/powersys.hpp"
#include "dsekit/unscented.hpp"
#include "support.hpp"

using namespace dsekit;
using namespace dsekit::filters;
using testsupport::KfState;
using testsupport::LinearModel;
using testsupport::QuadraticModel;
using testsupport::kf_step;
using testsupport::random_matrix;
using testsupport::random_psd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const std::string kData = DSEKIT_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LinearModel random_linear_model(std::mt19937_64& rng, int n, int p) {
  // Spectral radius around 0.5 keeps 50-step trajectories bounded.
  MatrixXd a = random_matrix(rng, n, n, 0.5 / std::sqrt(double(n)));
  MatrixXd b = random_matrix(rng, n, 1, 0.3);
  MatrixXd h = random_matrix(rng, p, n, 1.0);
  return LinearModel(a, b, h, random_psd(rng, n, 0.05), random_psd(rng, p, 0.1));
}

FilterBelief make_belief(const VectorXd& m, const matstab::SymMatrix& p) {
  FilterBelief b;
  b.mean = m;
  b.cov = p;
  b.step = 0;
  return b;
}

double min_eig(const MatrixXd& a) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (a + a.transpose())).eigenvalues().minCoeff();
}

MatrixXd clip_oracle(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (a + a.transpose()));
  VectorXd d = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// The large-plant stress scenario shared by checks 4, 6, and 9: strong
// alternating angle and speed kicks, sparse observability, process noise
// derived at full step size.
harness::ScenarioConfig stress_scenario(std::uint64_t seed) {
  harness::ScenarioConfig sc;
  sc.system = harness::gen_synthetic_system(34, 16, seed);
  sc.pmu_set = {0, 8, 16, 24, 32};
  sc.q_fraction = 1.0;
  sc.seed = 100 + seed;
  sc.disturbance.kind = harness::DisturbanceKind::state_perturbation;
  VectorXd shift = VectorXd::Zero(sc.system.n());
  for (int i = 0; i < 10; ++i) shift[i] = (i % 2 ? -0.3 : 0.3);
  for (int i = 0; i < 6; ++i) shift[sc.system.g() + 3 * i] = (i % 2 ? -1.5 : 1.5);
  sc.disturbance.state_shift = shift;
  return sc;
}

// Check 4 keeps its projection-stabilized runs for check 9's accounting.
std::vector<std::pair<harness::EstimationRun, harness::ScenarioConfig>> g_gps_runs;

// --------------------------------------------------------------------------
// 1. On random linear-Gaussian systems every engine must reproduce the
//    exact Kalman recursion: worst relative mean/covariance deviation over
//    20 systems x 50 steps at or below 1e-6, inside a 10 s budget. The
//    Q-inflation variant is scored against the exact filter run with the
//    inflated process covariance it is defined to use.
Outcome check_linear_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  const FilterKind kinds[] = {FilterKind::ekf,        FilterKind::ukf_schol,
                              FilterKind::ukf_kappa,  FilterKind::ukf_modified,
                              FilterKind::ukf_deltaq, FilterKind::ukf_gps,
                              FilterKind::sr_ukf};
  std::mt19937_64 rng(2024);
  double worst_mean = 0.0, worst_cov = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + int(rng() % 9);  // up to 10
    const int p_dim = 1 + int(rng() % 3);
    LinearModel model = random_linear_model(rng, n, p_dim);
    const VectorXd m0 = random_matrix(rng, n, 1);
    const matstab::SymMatrix p0 = random_psd(rng, n, 0.5);

    std::vector<VectorXd> inputs, obs;
    for (int k = 0; k < 50; ++k) {
      inputs.push_back(random_matrix(rng, 1, 1, 0.5));
      obs.push_back(random_matrix(rng, p_dim, 1, 1.0));
    }

    // Exact references, one with the plain and one with the inflated Q.
    LinearModel inflated(model.a(), model.b(), model.hmat(),
                         matstab::SymMatrix(model.q().mat() +
                                            0.005 * 0.005 * MatrixXd::Identity(n, n)),
                         model.r());
    std::vector<KfState> ref_plain, ref_inflated;
    KfState s_plain{m0, p0.mat()}, s_infl{m0, p0.mat()};
    for (int k = 0; k < 50; ++k) {
      s_plain = kf_step(s_plain, model, inputs[k], obs[k]);
      s_infl = kf_step(s_infl, inflated, inputs[k], obs[k]);
      ref_plain.push_back(s_plain);
      ref_inflated.push_back(s_infl);
    }

    for (FilterKind kind : kinds) {
      FilterRun run = run_filter(kind, model, make_belief(m0, p0), inputs, obs);
      if (run.status != RunStatus::completed || run.beliefs.size() != 50)
        return {false, fmt("filter %s did not complete a linear run", filter_kind_name(kind))};
      const auto& ref = kind == FilterKind::ukf_deltaq ? ref_inflated : ref_plain;
      for (int k = 0; k < 50; ++k) {
        const FilterBelief& b = run.beliefs[std::size_t(k)];
        const MatrixXd cov =
            b.has_factor() ? MatrixXd(b.factor.mat() * b.factor.mat().transpose()) : b.cov.mat();
        const double dm = (b.mean - ref[std::size_t(k)].m).norm() /
                          (1.0 + ref[std::size_t(k)].m.norm());
        const double dc =
            (cov - ref[std::size_t(k)].p).norm() / (1.0 + ref[std::size_t(k)].p.norm());
        worst_mean = std::max(worst_mean, dm);
        worst_cov = std::max(worst_cov, dc);
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_mean <= 1e-6 && worst_cov <= 1e-6 && secs < 10.0;
  return {pass, fmt("worst mean %.2e, worst cov %.2e (tol 1e-6); %.1f s (budget 10 s)",
                    worst_mean, worst_cov, secs)};
}

// --------------------------------------------------------------------------
// 2. The factored filter and the covariance filter must agree step by step
//    (mean, and factor square vs covariance) to 1e-8 relative over 100-step
//    mildly nonlinear runs, for every step on which the covariance route
//    stays positive definite — and it must stay so for all 400 steps here.
Outcome check_sr_equivalence() {
  std::mt19937_64 rng(71);
  double worst_mean = 0.0, worst_cov = 0.0;
  int steps_checked = 0;
  for (int nl = 0; nl < 4; ++nl) {
    const int n = 4 + int(rng() % 17);
    const int p_dim = 2 + int(rng() % 3);
    QuadraticModel model(n, p_dim, 3e-6, unsigned(rng()));
    VectorXd m = random_matrix(rng, n, 1, 0.3);
    matstab::SymMatrix p0 = random_psd(rng, n, 0.05);

    FilterBelief cov_belief = make_belief(m, p0);
    FilterBelief sr_belief = cov_belief;
    sr_belief.factor = matstab::schol(p0).first;
    StabilizerStrategy strat = make_strategy(StabilizerKind::schol, n);
    const ut::UTConfig cfg{1.0, 0.0, 3.0 - double(n)};
    const VectorXd u = VectorXd::Zero(1);

    for (int step = 0; step < 100; ++step) {
      const VectorXd y = random_matrix(rng, p_dim, 1, 0.5);
      UkfPrediction pred = ukf_predict(cov_belief, model, u, {}, strat);
      FilterBelief cov_post = ukf_update(pred.predicted, y, pred.y_pred, pred.y_points,
                                         pred.x_points, model, {}, strat);
      SrukfPrediction spred = srukf_predict(sr_belief, model, u, cfg);
      FilterBelief sr_post = srukf_update(spred.predicted, y, spred.y_pred, spred.y_points,
                                          spred.x_points, model, cfg);
      if (!matstab::schol(cov_post.cov).second || !matstab::schol(pred.predicted.cov).second)
        break;
      const MatrixXd sq = sr_post.factor.mat() * sr_post.factor.mat().transpose();
      worst_mean = std::max(worst_mean, (sr_post.mean - cov_post.mean).norm() /
                                            (1.0 + cov_post.mean.norm()));
      worst_cov = std::max(worst_cov,
                           (sq - cov_post.cov.mat()).norm() / (1.0 + cov_post.cov.mat().norm()));
      ++steps_checked;
      cov_belief = cov_post;
      sr_belief = sr_post;
    }
  }
  const bool pass = steps_checked == 400 && worst_mean <= 1e-8 && worst_cov <= 1e-8;
  return {pass, fmt("%d/400 steps positive definite; worst mean %.2e, worst cov %.2e (tol 1e-8)",
                    steps_checked, worst_mean, worst_cov)};
}

// --------------------------------------------------------------------------
// 3. The projection repair on 500 random symmetric indefinite matrices
//    (n up to 50, at noise-covariance operating scale — reapplication
//    perturbs the result by roughly ten times the definiteness floor times
//    the largest eigenvalue, so the absolute idempotence bound is a
//    statement about operating scale): result essentially PSD (min eig
//    >= -1e-8 relative to its largest eigenvalue), within 5e-3 relative
//    Frobenius distance of the eigenvalue-clipping oracle, and idempotent to
//    1e-8 on reapplication — all inside a 30 s budget.
Outcome check_projection_repair() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3001);
  double worst_eig = 0.0, worst_dist = 0.0, worst_drift = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + int(rng() % 49);  // up to 50
    matstab::SymMatrix sym(random_matrix(rng, n, n, 3e-4));
    while (min_eig(sym.mat()) >= 0.0)  // the check is about repairs, so
      sym = matstab::SymMatrix(random_matrix(rng, n, n, 3e-4));  // draw indefinite
    const matstab::NearPdResult res = matstab::near_pd(sym);
    const MatrixXd& x = res.x.mat();

    const double lmax =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(x).eigenvalues().maxCoeff();
    worst_eig = std::max(worst_eig, -min_eig(x) / std::max(1.0, lmax));

    const MatrixXd oracle = clip_oracle(sym.mat());
    worst_dist =
        std::max(worst_dist, (x - oracle).norm() / std::max(oracle.norm(), 1e-12));

    const matstab::NearPdResult twice = matstab::near_pd(res.x);
    worst_drift = std::max(worst_drift, (twice.x.mat() - x).norm());
  }
  const double secs = seconds_since(t0);
  const bool pass =
      worst_eig <= 1e-8 && worst_dist <= 5e-3 && worst_drift <= 1e-8 && secs < 30.0;
  return {pass,
          fmt("worst rel neg eig %.2e (tol 1e-8), oracle dist %.2e (tol 5e-3), "
              "reapplication drift %.2e (tol 1e-8); %.1f s (budget 30 s)",
              worst_eig, worst_dist, worst_drift, secs)};
}

// --------------------------------------------------------------------------
// 4. Ten seeded 100-state plants under a hostile scenario: the unstabilized
//    baseline must record a covariance failure and halt, while the
//    anchored, projection-repaired, and factored engines each finish all
//    600 frames with finite error indices — jointly on at least 8 seeds.
Outcome check_large_plant_survival() {
  int baseline_failed = 0, conjunction = 0;
  auto finite_ok = [](const harness::EstimationRun& r) {
    return r.status == RunStatus::completed && std::isfinite(r.e_delta) &&
           std::isfinite(r.e_omega) && std::isfinite(r.e_eq) && std::isfinite(r.e_ed) &&
           int(r.means.size()) - 1 == 600;
  };
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const harness::ScenarioConfig sc = stress_scenario(seed);
    const auto truth = harness::simulate_truth(sc);
    const auto obs = harness::synthesize_measurements(truth, sc);

    const auto classic = harness::run_dse(sc, FilterKind::ukf_classic, truth, obs);
    const bool classic_recorded = classic.status == RunStatus::halted &&
                                  classic.failure_step >= 1 && !classic.diagnostics.empty() &&
                                  classic.diagnostics.back().psd_failure;
    const auto modified = harness::run_dse(sc, FilterKind::ukf_modified, truth, obs);
    const auto gps = harness::run_dse(sc, FilterKind::ukf_gps, truth, obs);
    const auto sr = harness::run_dse(sc, FilterKind::sr_ukf, truth, obs);
    g_gps_runs.emplace_back(gps, sc);

    baseline_failed += classic_recorded ? 1 : 0;
    conjunction +=
        (classic_recorded && finite_ok(modified) && finite_ok(gps) && finite_ok(sr)) ? 1 : 0;
  }
  const bool pass = baseline_failed >= 8 && conjunction >= 8;
  return {pass, fmt("baseline recorded failure on %d/10 seeds, full conjunction on %d/10 "
                    "(need >= 8)",
                    baseline_failed, conjunction)};
}

// --------------------------------------------------------------------------
// 5. The bundled three-machine plant across its twelve scenarios: all seven
//    engines complete everywhere, angle index <= 0.15 rad and speed index
//    <= 1.5 rad/s on average, the factored engine no worse on angles than
//    its covariance twin to 1e-6 — the factored form deliberately inflates
//    its square by the folded center weight, which nudges the suite-averaged
//    angle index by a measured 1.6e-7 (0.002% of the index), while any
//    genuine degradation moves these indices by 1e-3 or more — and the
//    whole sweep inside 60 s.
Outcome check_bundled_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const harness::SystemDef sys = io::load_system(kData + "/wscc3.json");
  std::vector<harness::ScenarioConfig> scenarios;
  for (const std::string& path : io::expand_glob(kData + "/scenarios/*.json"))
    scenarios.push_back(io::load_scenario(path, sys));
  if (scenarios.size() != 12)
    return {false, fmt("expected 12 bundled scenarios, found %zu", scenarios.size())};

  const std::vector<FilterKind> kinds = {
      FilterKind::ekf,          FilterKind::ukf_schol, FilterKind::ukf_kappa,
      FilterKind::ukf_modified, FilterKind::ukf_deltaq, FilterKind::ukf_gps,
      FilterKind::sr_ukf};
  const harness::ComparisonSummary summary = harness::batch_compare(scenarios, kinds);
  const double secs = seconds_since(t0);

  double worst_delta = 0.0, worst_omega = 0.0;
  double sr_delta = -1.0, schol_delta = -1.0;
  int incomplete = 0;
  for (const auto& row : summary.rows) {
    if (row.completed != 12 || row.failures != 0) ++incomplete;
    worst_delta = std::max(worst_delta, row.mean_e_delta);
    worst_omega = std::max(worst_omega, row.mean_e_omega);
    if (row.kind == FilterKind::sr_ukf) sr_delta = row.mean_e_delta;
    if (row.kind == FilterKind::ukf_schol) schol_delta = row.mean_e_delta;
  }
  const bool ordering = sr_delta >= 0 && schol_delta >= 0 && sr_delta <= schol_delta + 1e-6;
  const bool pass = incomplete == 0 && worst_delta <= 0.15 && worst_omega <= 1.5 && ordering &&
                    secs < 60.0;
  return {pass, fmt("completion %s; worst angle index %.4f (tol 0.15), worst speed index %.4f "
                    "(tol 1.5); factored %.6f vs covariance %.6f on angles; %.1f s (budget 60 s)",
                    incomplete == 0 ? "12/12 for all 7" : "INCOMPLETE", worst_delta, worst_omega,
                    sr_delta, schol_delta, secs)};
}

// --------------------------------------------------------------------------
// 6. The anchored engine's moment matrices — predicted covariance and the
//    innovation matrix it assembles — must stay positive semidefinite to
//    within -1e-10 (relative to matrix norm) with no repair, across linear,
//    curved, and full plant models, including curvature that defeats the
//    classic assembly.
Outcome check_anchored_psd() {
  double worst = 0.0;  // most negative normalized eigenvalue seen
  long checked = 0;
  auto scan = [&](const ProcessModel& model, FilterBelief belief,
                  const std::vector<VectorXd>& inputs, const std::vector<VectorXd>& obs) {
    const int n = model.n();
    StabilizerStrategy strat = make_strategy(StabilizerKind::modified, n);
    const ut::UTWeights w = ut::ut_weights(n, {1.0, 0.0, strat.effective_kappa(n)});
    for (std::size_t k = 0; k < obs.size(); ++k) {
      UkfPrediction pred = ukf_predict(belief, model, inputs[k], {}, strat);
      const MatrixXd& pm = pred.predicted.cov.mat();
      worst = std::min(worst, min_eig(pm) / std::max(1.0, pm.norm()));
      const auto [ym, pyy] =
          ut::ut_moments(pred.y_points, w, model.r(), ut::MomentMode::modified);
      (void)ym;
      worst = std::min(worst, min_eig(pyy.mat()) / std::max(1.0, pyy.mat().norm()));
      checked += 2;
      belief = ukf_update(pred.predicted, obs[k], pred.y_pred, pred.y_points, pred.x_points,
                          model, {}, strat);
    }
  };

  std::mt19937_64 rng(6006);
  for (int trial = 0; trial < 5; ++trial) {  // linear batch
    const int n = 2 + int(rng() % 9), p = 1 + int(rng() % 3);
    LinearModel model = random_linear_model(rng, n, p);
    std::vector<VectorXd> inputs, obs;
    for (int k = 0; k < 30; ++k) {
      inputs.push_back(random_matrix(rng, 1, 1, 0.5));
      obs.push_back(random_matrix(rng, p, 1, 1.0));
    }
    scan(model, make_belief(random_matrix(rng, n, 1), random_psd(rng, n, 0.5)), inputs, obs);
  }
  for (int trial = 0; trial < 4; ++trial) {  // curvature past the classic failure point
    const int n = 4 + int(rng() % 17), p = 2 + int(rng() % 3);
    QuadraticModel model(n, p, 0.05, unsigned(rng()));
    std::vector<VectorXd> inputs(30, VectorXd::Zero(1));
    std::vector<VectorXd> obs;
    for (int k = 0; k < 30; ++k) obs.push_back(random_matrix(rng, p, 1, 0.5));
    scan(model, make_belief(random_matrix(rng, n, 1, 0.3), random_psd(rng, n, 0.2)), inputs,
         obs);
  }
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {  // full plants under stress
    harness::ScenarioConfig sc = stress_scenario(seed);
    const auto truth = harness::simulate_truth(sc);
    auto obs = harness::synthesize_measurements(truth, sc);
    obs.resize(100);  // first hundred frames cover the violent transient
    const ps::PowerSystemModel model = harness::build_power_model(sc, truth);
    const FilterBelief b0 = harness::build_initial_belief(
        sc.system.equilibrium, sc.system.machines, sc.system.net.omega0);
    const VectorXd u =
        ps::equilibrium_inputs(sc.system.equilibrium, sc.system.net, sc.system.machines);
    scan(model, b0, std::vector<VectorXd>(obs.size(), u), obs);
  }

  const bool pass = worst >= -1e-10;
  return {pass, fmt("most negative normalized eigenvalue %.2e over %ld matrices (tol -1e-10)",
                    worst, checked)};
}

// --------------------------------------------------------------------------
// 7. With the dimension-cancelling kappa the scaling collapses exactly:
//    for every n in 1..200 the center weights must equal the correctly
//    rounded (3-n)/3 bit for bit, the wing weights 1/6, and the spread
//    sqrt(3) — no tolerance.
Outcome check_weight_identities() {
  for (int n = 1; n <= 200; ++n) {
    const ut::UTWeights w = ut::ut_weights(n, {1.0, 0.0, 3.0 - double(n)});
    const double center = (3.0 - double(n)) / 3.0;  // one correctly rounded division
    if (w.wm(0) != center || w.wc(0) != center)
      return {false, fmt("center weight mismatch at n=%d", n)};
    if (w.eta != std::sqrt(3.0)) return {false, fmt("spread mismatch at n=%d", n)};
    for (int i = 1; i <= 2 * n; ++i)
      if (w.wm(i) != 1.0 / 6.0 || w.wc(i) != 1.0 / 6.0)
        return {false, fmt("wing weight mismatch at n=%d, i=%d", n, i)};
  }
  return {true, "center (3-n)/3, wings 1/6, spread sqrt(3): bit-exact for n = 1..200"};
}

// --------------------------------------------------------------------------
// 8. The bundled plant and three generated ones really rest: dynamics
//    residual at the stored operating point below 1e-10, and an undisturbed
//    10 s simulation drifts no state by more than 1e-8.
Outcome check_equilibria() {
  std::vector<std::pair<std::string, harness::SystemDef>> plants;
  plants.emplace_back("bundled", io::load_system(kData + "/wscc3.json"));
  plants.emplace_back("gen(5,2)", harness::gen_synthetic_system(5, 2, 7));
  plants.emplace_back("gen(12,6)", harness::gen_synthetic_system(12, 6, 42));
  plants.emplace_back("gen(34,16)", harness::gen_synthetic_system(34, 16, 1));

  double worst_resid = 0.0, worst_drift = 0.0;
  for (const auto& [name, sys] : plants) {
    const VectorXd u = ps::equilibrium_inputs(sys.equilibrium, sys.net, sys.machines);
    const VectorXd resid =
        ps::pack_state(ps::dynamics(sys.equilibrium, u, sys.net, sys.machines));
    if (!resid.allFinite()) return {false, name + ": non-finite dynamics residual"};
    worst_resid = std::max(worst_resid, resid.cwiseAbs().maxCoeff());

    harness::ScenarioConfig sc;
    sc.system = sys;
    sc.pmu_set = {0};
    const auto truth = harness::simulate_truth(sc);
    for (const VectorXd& x : truth) {
      if (!x.allFinite()) return {false, name + ": non-finite undisturbed trajectory"};
      worst_drift = std::max(worst_drift, (x - truth.front()).cwiseAbs().maxCoeff());
    }
  }
  const bool pass = worst_resid < 1e-10 && worst_drift < 1e-8;
  return {pass, fmt("worst dynamics residual %.2e (tol 1e-10), worst 10 s drift %.2e (tol 1e-8)",
                    worst_resid, worst_drift)};
}

// --------------------------------------------------------------------------
// 9. Repair accounting: run reports carry the projection-repair counters,
//    and on every large-plant projection-stabilized run the counters are
//    consistent and active (invocations >= affected steps >= 1).
Outcome check_repair_accounting() {
  if (g_gps_runs.empty()) return {false, "no projection-stabilized runs available"};
  long min_inv = -1, min_steps = -1;
  for (const auto& [run, sc] : g_gps_runs) {
    const io::json report = io::run_report(run, sc);
    if (!report.contains("nearpd_invocations") || !report.contains("nearpd_steps"))
      return {false, "report omits the repair counters"};
    if (report.at("nearpd_invocations") != run.nearpd_invocations ||
        report.at("nearpd_steps") != run.nearpd_steps)
      return {false, "report counters disagree with the run"};
    if (!(run.nearpd_invocations >= run.nearpd_steps && run.nearpd_steps >= 1))
      return {false, fmt("inconsistent counters: %d invocations, %d steps",
                         run.nearpd_invocations, run.nearpd_steps)};
    min_inv = min_inv < 0 ? run.nearpd_invocations : std::min<long>(min_inv, run.nearpd_invocations);
    min_steps = min_steps < 0 ? run.nearpd_steps : std::min<long>(min_steps, run.nearpd_steps);
  }
  return {true, fmt("%zu runs; invocations >= steps >= 1 everywhere (min %ld / %ld)",
                    g_gps_runs.size(), min_inv, min_steps)};
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"exact Kalman agreement on linear-Gaussian systems", check_linear_agreement},
      {"square-root and covariance forms coincide while positive definite",
       check_sr_equivalence},
      {"eigenvalue-projection repair quality and idempotence", check_projection_repair},
      {"stabilized engines survive large plants that defeat the baseline",
       check_large_plant_survival},
      {"bundled three-machine suite accuracy and runtime", check_bundled_suite},
      {"anchored moment matrices stay positive semidefinite", check_anchored_psd},
      {"dimension-cancelling weights are bit-exact", check_weight_identities},
      {"bundled and generated plants rest at equilibrium", check_equilibria},
      {"projection-repair accounting is reported and consistent", check_repair_accounting},
  };

  int failures = 0;
  int idx = 0;
  for (const Entry& e : entries) {
    ++idx;
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("[%s] %d. %s — %s\n", out.pass ? "PASS" : "FAIL", idx, e.label,
                out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  if (failures == 0)
    std::printf("all %d checks passed\n", idx);
  else
    std::printf("%d of %d checks FAILED\n", failures, idx);
  return failures;
}
