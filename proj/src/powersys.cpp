#include "dsekit/powersys.hpp"

#include <cmath>
#include <string>

namespace dsekit::ps {

namespace {

void check_machines(const std::vector<MachineParams>& params) {
  if (params.empty()) throw DimensionError("machine list is empty");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& m = params[i];
    const std::string tag = "machine " + std::to_string(i) + ": ";
    if (m.order != 2 && m.order != 4) throw DimensionError(tag + "order must be 2 or 4");
    if (!(m.h > 0.0)) throw NonPositiveScale(tag + "inertia must be positive");
    if (!(m.s_n > 0.0)) throw NonPositiveScale(tag + "machine base must be positive");
    if (m.order == 4) {
      if (!(m.tp_d0 > 0.0) || !(m.tp_q0 > 0.0))
        throw NonPositiveScale(tag + "transient time constants must be positive");
    }
  }
}

void check_state(const SystemState& s, const std::vector<MachineParams>& params) {
  const int g = int(params.size());
  const int g4 = int(order4_indices(params).size());
  if (s.delta.size() != g || s.omega.size() != g)
    throw DimensionError("state angle/speed blocks do not match the machine count");
  if (s.eq_p.size() != g4 || s.ed_p.size() != g4)
    throw DimensionError("state EMF blocks do not match the order-4 machine count");
}

void check_network(const ReducedNetwork& net, const std::vector<MachineParams>& params) {
  if (net.ybar.rows() != net.ybar.cols()) throw DimensionError("reduced admittance must be square");
  if (net.g() != int(params.size()))
    throw DimensionError("reduced admittance size does not match the machine count");
  if (!(net.s_b > 0.0)) throw NonPositiveScale("system base must be positive");
  if (!(net.omega0 > 0.0)) throw NonPositiveScale("rated speed must be positive");
}

}  // namespace

std::vector<int> order4_indices(const std::vector<MachineParams>& params) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].order == 4) idx.push_back(int(i));
  return idx;
}

int state_dim(const std::vector<MachineParams>& params) {
  check_machines(params);
  const int g = int(params.size());
  const int g4 = int(order4_indices(params).size());
  return 2 * g + 2 * g4;
}

Eigen::VectorXd pack_state(const SystemState& s) {
  Eigen::VectorXd x(s.delta.size() + s.omega.size() + s.eq_p.size() + s.ed_p.size());
  x << s.delta, s.omega, s.eq_p, s.ed_p;
  return x;
}

SystemState unpack_state(const Eigen::VectorXd& x, const std::vector<MachineParams>& params) {
  const int g = int(params.size());
  const int g4 = int(order4_indices(params).size());
  if (x.size() != 2 * g + 2 * g4)
    throw DimensionError("state vector length does not match the machine roster");
  SystemState s;
  s.delta = x.segment(0, g);
  s.omega = x.segment(g, g);
  s.eq_p = x.segment(2 * g, g4);
  s.ed_p = x.segment(2 * g + g4, g4);
  return s;
}

MachineElectricals machine_electricals(const SystemState& x, const ReducedNetwork& net,
                                       const std::vector<MachineParams>& params) {
  check_machines(params);
  check_network(net, params);
  check_state(x, params);
  const int g = int(params.size());
  const std::vector<int> g4idx = order4_indices(params);

  // Internal EMFs per machine: dynamic states for order-4, constants otherwise.
  Eigen::VectorXd eq_p(g), ed_p(g);
  {
    int slot = 0;
    for (int i = 0; i < g; ++i) {
      if (params[i].order == 4) {
        eq_p(i) = x.eq_p(slot);
        ed_p(i) = x.ed_p(slot);
        ++slot;
      } else {
        eq_p(i) = params[i].eq_p_fixed;
        ed_p(i) = params[i].ed_p_fixed;
      }
    }
  }

  MachineElectricals e;
  e.psi_r.resize(g);
  e.psi_i.resize(g);
  for (int i = 0; i < g; ++i) {
    const double sd = std::sin(x.delta(i)), cd = std::cos(x.delta(i));
    e.psi_r(i) = ed_p(i) * sd + eq_p(i) * cd;
    e.psi_i(i) = eq_p(i) * sd - ed_p(i) * cd;
  }

  const Eigen::VectorXcd it =
      net.ybar * (e.psi_r + std::complex<double>(0.0, 1.0) * e.psi_i).matrix();
  e.i_r = it.real();
  e.i_i = it.imag();

  e.i_q.resize(g);
  e.i_d.resize(g);
  e.e_q.resize(g);
  e.e_d.resize(g);
  e.p_e.resize(g);
  e.t_e.resize(g);
  for (int i = 0; i < g; ++i) {
    const auto& m = params[i];
    const double sd = std::sin(x.delta(i)), cd = std::cos(x.delta(i));
    const double base = net.s_b / m.s_n;
    e.i_q(i) = base * (e.i_i(i) * sd + e.i_r(i) * cd);
    e.i_d(i) = base * (e.i_r(i) * sd - e.i_i(i) * cd);
    e.e_q(i) = eq_p(i) - m.xp_d * e.i_d(i);
    e.e_d(i) = ed_p(i) + m.xp_q * e.i_q(i);
    e.p_e(i) = e.e_q(i) * e.i_q(i) + e.e_d(i) * e.i_d(i);
    e.t_e(i) = base * e.p_e(i);
  }
  return e;
}

SystemState dynamics(const SystemState& x, const Eigen::VectorXd& u, const ReducedNetwork& net,
                     const std::vector<MachineParams>& params) {
  const int g = int(params.size());
  if (u.size() != 2 * g) throw DimensionError("input vector must stack [T_m; E_fd]");
  const MachineElectricals el = machine_electricals(x, net, params);
  const std::vector<int> g4idx = order4_indices(params);

  SystemState d;
  d.delta.resize(g);
  d.omega.resize(g);
  d.eq_p.resize(int(g4idx.size()));
  d.ed_p.resize(int(g4idx.size()));
  for (int i = 0; i < g; ++i) {
    const auto& m = params[i];
    const double tm = u(i);
    const double dev = x.omega(i) - net.omega0;
    d.delta(i) = dev;
    d.omega(i) = (net.omega0 / (2.0 * m.h)) * (tm - el.t_e(i) - (m.k_d / net.omega0) * dev);
  }
  for (std::size_t slot = 0; slot < g4idx.size(); ++slot) {
    const int i = g4idx[slot];
    const auto& m = params[i];
    const double efd = u(g + i);
    d.eq_p(int(slot)) = (efd - x.eq_p(int(slot)) - (m.x_d - m.xp_d) * el.i_d(i)) / m.tp_d0;
    d.ed_p(int(slot)) = (-x.ed_p(int(slot)) + (m.x_q - m.xp_q) * el.i_q(i)) / m.tp_q0;
  }
  return d;
}

Eigen::VectorXd measure(const SystemState& x, const ReducedNetwork& net,
                        const std::vector<MachineParams>& params, const std::vector<int>& pmu_set) {
  if (pmu_set.empty()) throw DimensionError("measurement requires at least one instrumented machine");
  const int g = int(params.size());
  for (int i : pmu_set)
    if (i < 0 || i >= g) throw DimensionError("instrumented machine index out of range");
  const MachineElectricals el = machine_electricals(x, net, params);

  const int p = int(pmu_set.size());
  Eigen::VectorXd y(4 * p);
  for (int j = 0; j < p; ++j) {
    const int i = pmu_set[j];
    const double sd = std::sin(x.delta(i)), cd = std::cos(x.delta(i));
    y(j) = el.e_d(i) * sd + el.e_q(i) * cd;       // e_R
    y(p + j) = el.e_q(i) * sd - el.e_d(i) * cd;   // e_I
    y(2 * p + j) = el.i_r(i);
    y(3 * p + j) = el.i_i(i);
  }
  return y;
}

Eigen::VectorXd step_modified_euler(const Eigen::VectorXd& x, const Eigen::VectorXd& u_km1,
                                    const Eigen::VectorXd& u_k, double dt,
                                    const ReducedNetwork& net,
                                    const std::vector<MachineParams>& params) {
  auto field = [&](const Eigen::VectorXd& xv, const Eigen::VectorXd& uv) {
    return pack_state(dynamics(unpack_state(xv, params), uv, net, params));
  };
  return heun_step(field, x, u_km1, u_k, dt);
}

Eigen::VectorXd equilibrium_inputs(const SystemState& x_eq, const ReducedNetwork& net,
                                   const std::vector<MachineParams>& params) {
  check_machines(params);
  check_network(net, params);
  check_state(x_eq, params);
  const int g = int(params.size());
  for (int i = 0; i < g; ++i)
    if (std::abs(x_eq.omega(i) - net.omega0) > 1e-9 * net.omega0)
      throw NotAtRatedSpeed("equilibrium inputs require every machine at rated speed");

  const MachineElectricals el = machine_electricals(x_eq, net, params);
  const std::vector<int> g4idx = order4_indices(params);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * g);
  for (int i = 0; i < g; ++i) u(i) = el.t_e(i);
  for (std::size_t slot = 0; slot < g4idx.size(); ++slot) {
    const int i = g4idx[slot];
    u(g + i) = x_eq.eq_p(int(slot)) + (params[i].x_d - params[i].xp_d) * el.i_d(i);
  }
  return u;
}

Eigen::MatrixXcd kron_reduce(const Eigen::MatrixXcd& yfull, int retain) {
  if (yfull.rows() != yfull.cols()) throw DimensionError("admittance matrix must be square");
  const int n = int(yfull.rows());
  if (retain <= 0 || retain > n) throw DimensionError("retained node count out of range");
  if (retain == n) return yfull;
  const int m = n - retain;
  const Eigen::MatrixXcd ygg = yfull.topLeftCorner(retain, retain);
  const Eigen::MatrixXcd ygl = yfull.topRightCorner(retain, m);
  const Eigen::MatrixXcd ylg = yfull.bottomLeftCorner(m, retain);
  const Eigen::MatrixXcd yll = yfull.bottomRightCorner(m, m);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(yll);
  if (!lu.isInvertible()) throw SingularLoadBlock("eliminated node block is singular");
  return ygg - ygl * lu.solve(ylg);
}

PowerSystemModel::PowerSystemModel(std::vector<MachineParams> params, ReducedNetwork net,
                                   std::vector<int> pmu_set, double dt, int substeps)
    : params_(std::move(params)),
      net_(std::move(net)),
      pmu_(std::move(pmu_set)),
      dt_(dt),
      substeps_(substeps),
      n_(state_dim(params_)),
      q_(matstab::SymMatrix::Zero(n_)),
      r_(matstab::SymMatrix::Zero(int(pmu_.size()) * 4)) {
  check_network(net_, params_);
  if (pmu_.empty()) throw DimensionError("model requires at least one instrumented machine");
  for (int i : pmu_)
    if (i < 0 || i >= int(params_.size()))
      throw DimensionError("instrumented machine index out of range");
  if (!(dt_ > 0.0)) throw NonPositiveScale("transition interval must be positive");
  if (substeps_ < 1) throw DimensionError("substep count must be at least 1");
}

Eigen::VectorXd PowerSystemModel::f(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const double h = dt_ / substeps_;
  Eigen::VectorXd cur = x;
  for (int s = 0; s < substeps_; ++s) cur = step_modified_euler(cur, u, u, h, net_, params_);
  return cur;
}

Eigen::VectorXd PowerSystemModel::h(const Eigen::VectorXd& x, const Eigen::VectorXd&) const {
  return measure(unpack_state(x, params_), net_, params_, pmu_);
}

}  // namespace dsekit::ps
