#include "dsekit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

namespace dsekit::harness {

namespace {

constexpr double kPi = 3.14159265358979323846;

int sample_stride(const ScenarioConfig& sc) {
  return int(std::lround(sc.sim_rate / sc.meas_rate));
}

}  // namespace

double GaussianStream::next() {
  // 53-bit uniforms in [0, 1); the log argument is flipped so it never sees 0.
  const double u1 = double(rng_() >> 11) * 0x1.0p-53;
  const double u2 = double(rng_() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate_scenario(const ScenarioConfig& sc) {
  if (sc.system.machines.empty()) throw DimensionError("scenario has no machines");
  if (!(sc.horizon > 0.0)) throw NonPositiveScale("scenario horizon must be positive");
  if (!(sc.sim_rate > 0.0) || !(sc.meas_rate > 0.0))
    throw NonPositiveScale("scenario rates must be positive");
  const double ratio = sc.sim_rate / sc.meas_rate;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9 || std::lround(ratio) < 1)
    throw DimensionError("simulation rate must be an integer multiple of the frame rate");
  if (sc.meas_noise_var < 0.0) throw NonPositiveScale("measurement noise variance must be >= 0");
  if (!(sc.q_fraction > 0.0)) throw NonPositiveScale("process-noise fraction must be positive");
  if (!(sc.q_floor > 0.0)) throw NonPositiveScale("process-noise floor must be positive");
  if (sc.pmu_set.empty()) throw DimensionError("scenario instruments no machine");
  for (int i : sc.pmu_set)
    if (i < 0 || i >= sc.system.g())
      throw DimensionError("instrumented machine index out of range");
  if (sc.filter_substeps < 1) throw DimensionError("filter substep count must be at least 1");
  if (sc.disturbance.kind == DisturbanceKind::state_perturbation &&
      sc.disturbance.state_shift.size() != sc.system.n())
    throw DimensionError("state perturbation length does not match the state dimension");
  if (sc.disturbance.kind == DisturbanceKind::two_stage_ybar) {
    if (sc.disturbance.ybar_during.rows() != sc.system.g() ||
        sc.disturbance.ybar_during.cols() != sc.system.g())
      throw DimensionError("alternate coupling matrix size does not match the machine count");
    if (sc.disturbance.t_switch < 0.0 || sc.disturbance.t_switch > sc.horizon)
      throw DimensionError("coupling switch time outside the horizon");
  }
}

std::vector<Eigen::VectorXd> simulate_truth(const ScenarioConfig& sc) {
  validate_scenario(sc);
  const auto& sys = sc.system;
  const Eigen::VectorXd u = ps::equilibrium_inputs(sys.equilibrium, sys.net, sys.machines);

  Eigen::VectorXd x = ps::pack_state(sys.equilibrium);
  if (sc.disturbance.kind == DisturbanceKind::state_perturbation)
    x += sc.disturbance.state_shift;

  ps::ReducedNetwork alt = sys.net;
  if (sc.disturbance.kind == DisturbanceKind::two_stage_ybar)
    alt.ybar = sc.disturbance.ybar_during;

  GaussianStream jitter(stream_seed(sc.seed, kProcessStream));
  const double dt = 1.0 / sc.sim_rate;
  const int steps = int(std::lround(sc.horizon * sc.sim_rate));

  std::vector<Eigen::VectorXd> truth;
  truth.reserve(std::size_t(steps) + 1);
  truth.push_back(x);
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const bool alternate = sc.disturbance.kind == DisturbanceKind::two_stage_ybar &&
                           t < sc.disturbance.t_switch - 1e-12;
    x = ps::step_modified_euler(x, u, u, dt, alternate ? alt : sys.net, sys.machines);
    if (sc.process_noise_std > 0.0)
      for (int j = 0; j < x.size(); ++j) x(j) += sc.process_noise_std * jitter.next();
    truth.push_back(x);
  }
  return truth;
}

std::vector<Eigen::VectorXd> synthesize_measurements(const std::vector<Eigen::VectorXd>& truth,
                                                     const ScenarioConfig& sc) {
  validate_scenario(sc);
  const int stride = sample_stride(sc);
  if (truth.size() < 2 || (truth.size() - 1) % std::size_t(stride) != 0)
    throw DimensionError("truth series does not sit on the simulation grid");
  const int frames = int((truth.size() - 1) / std::size_t(stride));
  const double noise_std = std::sqrt(sc.meas_noise_var);

  GaussianStream noise(stream_seed(sc.seed, kMeasurementStream));
  std::vector<Eigen::VectorXd> obs;
  obs.reserve(std::size_t(frames));
  for (int k = 1; k <= frames; ++k) {
    const ps::SystemState s =
        ps::unpack_state(truth[std::size_t(k) * std::size_t(stride)], sc.system.machines);
    Eigen::VectorXd y = ps::measure(s, sc.system.net, sc.system.machines, sc.pmu_set);
    for (int j = 0; j < y.size(); ++j) y(j) += noise_std * noise.next();
    obs.push_back(std::move(y));
  }
  return obs;
}

Eigen::VectorXd derive_process_noise(const std::vector<Eigen::VectorXd>& truth, double fraction,
                                     double floor_value) {
  if (truth.empty()) throw DimensionError("truth series is empty");
  if (!(fraction > 0.0) || !(floor_value > 0.0))
    throw NonPositiveScale("noise derivation needs positive fraction and floor");
  const int n = int(truth.front().size());
  Eigen::VectorXd max_step = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 1; k < truth.size(); ++k) {
    if (truth[k].size() != n) throw DimensionError("truth series is ragged");
    max_step = max_step.cwiseMax((truth[k] - truth[k - 1]).cwiseAbs());
  }
  Eigen::VectorXd q = (fraction * max_step).array().square().matrix();
  return q.cwiseMax(floor_value);
}

filters::FilterBelief build_initial_belief(const ps::SystemState& x_pre,
                                           const std::vector<ps::MachineParams>& machines,
                                           double omega0, const InitialBelief& cfg) {
  if (!(cfg.r_delta > 0.0) || !(cfg.r_omega_scale > 0.0) || !(cfg.r_eq > 0.0) ||
      !(cfg.r_ed > 0.0))
    throw NonPositiveScale("belief radii must be positive");
  if (!(omega0 > 0.0)) throw NonPositiveScale("rated speed must be positive");
  const int g = int(machines.size());
  const int g4 = int(ps::order4_indices(machines).size());
  const double r_omega = cfg.r_omega_scale * omega0;

  Eigen::VectorXd diag(2 * g + 2 * g4);
  diag.segment(0, g).setConstant(cfg.r_delta * cfg.r_delta);
  diag.segment(g, g).setConstant(r_omega * r_omega);
  diag.segment(2 * g, g4).setConstant(cfg.r_eq * cfg.r_eq);
  diag.segment(2 * g + g4, g4).setConstant(cfg.r_ed * cfg.r_ed);

  filters::FilterBelief b;
  b.mean = ps::pack_state(x_pre);
  if (b.mean.size() != diag.size())
    throw DimensionError("initial state does not match the machine roster");
  b.cov = matstab::SymMatrix(Eigen::MatrixXd(diag.asDiagonal()));
  b.step = 0;
  return b;
}

double error_index(const std::vector<Eigen::VectorXd>& est,
                   const std::vector<Eigen::VectorXd>& truth, StateBlock which,
                   const std::vector<ps::MachineParams>& machines) {
  if (est.size() != truth.size()) throw DimensionError("series lengths differ");
  if (est.empty()) throw DimensionError("series are empty");
  const int g = int(machines.size());
  const int g4 = int(ps::order4_indices(machines).size());
  int offset = 0, count = g;
  switch (which) {
    case StateBlock::delta: offset = 0; count = g; break;
    case StateBlock::omega: offset = g; count = g; break;
    case StateBlock::eq_p: offset = 2 * g; count = g4; break;
    case StateBlock::ed_p: offset = 2 * g + g4; count = g4; break;
  }
  if (count == 0) return 0.0;

  double acc = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    if (est[k].size() != 2 * g + 2 * g4 || truth[k].size() != 2 * g + 2 * g4)
      throw DimensionError("series entry does not match the state dimension");
    acc += (est[k].segment(offset, count) - truth[k].segment(offset, count)).squaredNorm();
  }
  return std::sqrt(acc / (double(count) * double(est.size())));
}

ps::PowerSystemModel build_power_model(const ScenarioConfig& sc,
                                       const std::vector<Eigen::VectorXd>& truth) {
  validate_scenario(sc);
  ps::PowerSystemModel model(sc.system.machines, sc.system.net, sc.pmu_set, 1.0 / sc.meas_rate,
                             sc.filter_substeps);
  const Eigen::VectorXd qdiag = derive_process_noise(truth, sc.q_fraction, sc.q_floor);
  model.set_process_noise(matstab::SymMatrix(Eigen::MatrixXd(qdiag.asDiagonal())));
  const int p = model.p();
  model.set_measurement_noise(
      matstab::SymMatrix(Eigen::MatrixXd::Identity(p, p) * sc.meas_noise_var));
  return model;
}

EstimationRun run_dse(const ScenarioConfig& sc, filters::FilterKind kind) {
  const auto truth = simulate_truth(sc);
  const auto obs = synthesize_measurements(truth, sc);
  return run_dse(sc, kind, truth, obs);
}

EstimationRun run_dse(const ScenarioConfig& sc, filters::FilterKind kind,
                      const std::vector<Eigen::VectorXd>& truth,
                      const std::vector<Eigen::VectorXd>& observations) {
  validate_scenario(sc);
  ps::PowerSystemModel model = build_power_model(sc, truth);
  filters::FilterBelief belief0 =
      build_initial_belief(sc.system.equilibrium, sc.system.machines, sc.system.net.omega0);
  const Eigen::VectorXd u =
      ps::equilibrium_inputs(sc.system.equilibrium, sc.system.net, sc.system.machines);
  const std::vector<Eigen::VectorXd> inputs(observations.size(), u);

  const auto t0 = std::chrono::steady_clock::now();
  filters::FilterRun fr = filters::run_filter(kind, model, belief0, inputs, observations);
  const auto t1 = std::chrono::steady_clock::now();

  EstimationRun run;
  run.kind = kind;
  run.status = fr.status;
  run.failure_step = fr.failure_step;
  run.failure_reason = fr.failure_reason;
  run.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  run.diagnostics = std::move(fr.diagnostics);
  run.means.reserve(fr.beliefs.size() + 1);
  run.means.push_back(belief0.mean);  // frame k lives at index k
  for (const auto& b : fr.beliefs) run.means.push_back(b.mean);

  run.nearpd_invocations = int(fr.repair_log.size());
  std::set<int> steps;
  for (const auto& ev : fr.repair_log) steps.insert(ev.step);
  run.nearpd_steps = int(steps.size());

  if (run.status == filters::RunStatus::completed) {
    const int stride = sample_stride(sc);
    const int frames = int(observations.size());
    std::vector<Eigen::VectorXd> est, tru;
    est.reserve(std::size_t(frames));
    tru.reserve(std::size_t(frames));
    for (int k = 1; k <= frames; ++k) {
      est.push_back(run.means[std::size_t(k)]);
      tru.push_back(truth[std::size_t(k) * std::size_t(stride)]);
    }
    run.e_delta = error_index(est, tru, StateBlock::delta, sc.system.machines);
    run.e_omega = error_index(est, tru, StateBlock::omega, sc.system.machines);
    run.e_eq = error_index(est, tru, StateBlock::eq_p, sc.system.machines);
    run.e_ed = error_index(est, tru, StateBlock::ed_p, sc.system.machines);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    run.e_delta = run.e_omega = run.e_eq = run.e_ed = nan;
  }
  return run;
}

ComparisonSummary batch_compare(const std::vector<ScenarioConfig>& scenarios,
                                const std::vector<filters::FilterKind>& kinds) {
  if (scenarios.empty() || kinds.empty())
    throw DimensionError("comparison needs at least one scenario and one filter");

  struct Acc {
    std::vector<double> ed, eo, eq, ee, wall;
    int failures = 0;
    long inv = 0, steps = 0;
  };
  std::vector<Acc> acc(kinds.size());

  for (const auto& sc : scenarios) {
    const auto truth = simulate_truth(sc);
    const auto obs = synthesize_measurements(truth, sc);
    for (std::size_t f = 0; f < kinds.size(); ++f) {
      EstimationRun run = run_dse(sc, kinds[f], truth, obs);
      Acc& a = acc[f];
      a.inv += run.nearpd_invocations;
      a.steps += run.nearpd_steps;
      a.wall.push_back(run.wall_seconds);
      if (run.status == filters::RunStatus::completed) {
        a.ed.push_back(run.e_delta);
        a.eo.push_back(run.e_omega);
        a.eq.push_back(run.e_eq);
        a.ee.push_back(run.e_ed);
      } else {
        ++a.failures;
      }
    }
  }

  auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  auto std_of = [&](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size()));
  };

  ComparisonSummary sum;
  sum.scenario_count = int(scenarios.size());
  for (std::size_t f = 0; f < kinds.size(); ++f) {
    const Acc& a = acc[f];
    FilterAggregate row;
    row.kind = kinds[f];
    row.completed = int(a.ed.size());
    row.failures = a.failures;
    row.mean_e_delta = mean_of(a.ed);
    row.std_e_delta = std_of(a.ed);
    row.mean_e_omega = mean_of(a.eo);
    row.std_e_omega = std_of(a.eo);
    row.mean_e_eq = mean_of(a.eq);
    row.std_e_eq = std_of(a.eq);
    row.mean_e_ed = mean_of(a.ee);
    row.std_e_ed = std_of(a.ee);
    row.mean_wall_seconds = mean_of(a.wall);
    row.nearpd_invocations = a.inv;
    row.nearpd_steps = a.steps;
    sum.rows.push_back(row);
  }
  return sum;
}

SystemDef gen_synthetic_system(int g, int g4, std::uint64_t seed) {
  if (g < 1 || g4 < 0 || g4 > g) throw DimensionError("machine counts must satisfy g >= g4 >= 0");
  std::mt19937_64 rng(seed);
  auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
  };

  for (int attempt = 0; attempt < 25; ++attempt) {
    SystemDef sys;
    sys.machines.reserve(std::size_t(g));
    for (int i = 0; i < g; ++i) {
      ps::MachineParams m;
      m.order = i < g4 ? 4 : 2;
      m.h = unif(2.0, 10.0);
      m.k_d = unif(1.0, 3.0);
      m.s_n = 100.0;
      m.xp_d = unif(0.2, 0.5);
      if (m.order == 4) {
        m.x_d = m.xp_d + unif(0.5, 1.2);
        m.x_q = m.x_d * unif(0.65, 0.9);
        m.xp_q = std::min(unif(0.25, 0.6), 0.75 * m.x_q);
        m.tp_d0 = unif(4.0, 9.0);
        m.tp_q0 = unif(0.5, 1.5);
      } else {
        m.x_d = m.x_q = m.xp_q = m.xp_d;
        m.eq_p_fixed = unif(0.95, 1.1);
        m.ed_p_fixed = 0.0;
      }
      sys.machines.push_back(m);
    }

    // Ring plus random chords, inductive coupling with a dominant
    // capacitive-free diagonal, mirroring reduced-network structure.
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(g, g);
    for (int i = 0; i < g; ++i) {
      std::vector<int> partners;
      if (g > 1) partners.push_back((i + 1) % g);
      for (int j = i + 2; j < g; ++j)
        if (!(i == 0 && j == g - 1) && unif(0.0, 1.0) < 0.12) partners.push_back(j);
      for (int j : partners) {
        if (y(i, j) != std::complex<double>(0.0, 0.0)) continue;
        const double b = unif(0.5, 1.6);
        const double gc = b * unif(0.12, 0.25);
        y(i, j) = y(j, i) = std::complex<double>(gc, b);
      }
    }
    for (int i = 0; i < g; ++i) {
      double gsum = 0.0, bsum = 0.0;
      for (int j = 0; j < g; ++j)
        if (j != i) {
          gsum += y(i, j).real();
          bsum += y(i, j).imag();
        }
      y(i, i) = std::complex<double>(gsum * unif(1.3, 1.8) + unif(0.1, 0.3),
                                     -(bsum * unif(1.05, 1.25) + unif(0.1, 0.5)));
    }
    sys.net.ybar = y;
    sys.net.s_b = 100.0;

    const std::vector<int> g4idx = ps::order4_indices(sys.machines);
    sys.equilibrium.delta.resize(g);
    for (int i = 0; i < g; ++i) sys.equilibrium.delta(i) = unif(-0.25, 0.25);
    sys.equilibrium.omega = Eigen::VectorXd::Constant(g, sys.net.omega0);
    sys.equilibrium.eq_p.resize(int(g4idx.size()));
    for (int i = 0; i < int(g4idx.size()); ++i) sys.equilibrium.eq_p(i) = unif(0.95, 1.1);
    sys.equilibrium.ed_p = Eigen::VectorXd::Zero(int(g4idx.size()));

    // The transverse EMFs have no balancing input, so the rest state needs
    // ed_p to equal the current it induces. For fixed angles that map is
    // exactly affine in ed_p, so the fixed point is one linear solve; an
    // iteration would diverge on strongly coupled plants.
    const int m4 = int(g4idx.size());
    if (m4 > 0) {
      auto ed_to_target = [&](const Eigen::VectorXd& ed) {
        sys.equilibrium.ed_p = ed;
        const ps::MachineElectricals el =
            ps::machine_electricals(sys.equilibrium, sys.net, sys.machines);
        Eigen::VectorXd t(m4);
        for (int slot = 0; slot < m4; ++slot) {
          const auto& m = sys.machines[std::size_t(g4idx[std::size_t(slot)])];
          t(slot) = (m.x_q - m.xp_q) * el.i_q(g4idx[std::size_t(slot)]);
        }
        return t;
      };
      const Eigen::VectorXd b = ed_to_target(Eigen::VectorXd::Zero(m4));
      Eigen::MatrixXd a(m4, m4);
      for (int j = 0; j < m4; ++j)
        a.col(j) = ed_to_target(Eigen::VectorXd::Unit(m4, j)) - b;
      const Eigen::VectorXd ed =
          (Eigen::MatrixXd::Identity(m4, m4) - a).partialPivLu().solve(b);
      sys.equilibrium.ed_p = ed;
      const Eigen::VectorXd check = ed_to_target(ed);
      if (!ed.allFinite() || ed.cwiseAbs().maxCoeff() > 1.5 ||
          (check - ed).cwiseAbs().maxCoeff() > 1e-11)
        continue;
    }

    const Eigen::VectorXd u = ps::equilibrium_inputs(sys.equilibrium, sys.net, sys.machines);
    const Eigen::VectorXd resid =
        ps::pack_state(ps::dynamics(sys.equilibrium, u, sys.net, sys.machines));
    if (resid.allFinite() && resid.cwiseAbs().maxCoeff() < 1e-10) return sys;
  }
  throw EquilibriumNotFound("no synthetic plant with a clean rest state after bounded retries");
}

}  // namespace dsekit::harness
