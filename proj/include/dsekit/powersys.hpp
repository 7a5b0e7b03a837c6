#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dsekit/errors.hpp"
#include "dsekit/filters.hpp"
#include "dsekit/matstab.hpp"

// Multi-machine swing/transient dynamics on a reduced admittance network,
// PMU measurement functions, the two-stage explicit integrator, equilibrium
// input construction, and network reduction.
namespace dsekit::ps {

struct MachineParams {
  int order = 2;  // 2: constant internal EMF; 4: transient EMF dynamics
  double h = 1.0;
  double k_d = 0.0;
  double x_d = 0.0, x_q = 0.0;
  double xp_d = 0.0, xp_q = 0.0;
  double tp_d0 = 1.0, tp_q0 = 1.0;
  double s_n = 100.0;
  // Internal voltages of order-2 machines are parameters, not states.
  double eq_p_fixed = 0.0, ed_p_fixed = 0.0;
};

struct ReducedNetwork {
  Eigen::MatrixXcd ybar;
  double s_b = 100.0;
  double omega0 = 2.0 * 3.14159265358979323846 * 60.0;

  int g() const { return int(ybar.rows()); }
};

// Dynamic state split into named blocks; the flat ordering is
// [delta; omega; eq_p; ed_p] with the EMF blocks holding only order-4
// machines (ascending machine index).
struct SystemState {
  Eigen::VectorXd delta;
  Eigen::VectorXd omega;
  Eigen::VectorXd eq_p;
  Eigen::VectorXd ed_p;
};

struct MachineElectricals {
  Eigen::VectorXd psi_r, psi_i;  // internal voltage source, system frame
  Eigen::VectorXd i_r, i_i;      // terminal current, system frame
  Eigen::VectorXd i_q, i_d;      // machine frame, machine base
  Eigen::VectorXd e_q, e_d;      // terminal voltage, machine frame
  Eigen::VectorXd p_e, t_e;      // electrical power and torque
};

std::vector<int> order4_indices(const std::vector<MachineParams>& params);
int state_dim(const std::vector<MachineParams>& params);

Eigen::VectorXd pack_state(const SystemState& s);
SystemState unpack_state(const Eigen::VectorXd& x, const std::vector<MachineParams>& params);

// Full per-machine electrical chain: voltage source from internal EMFs and
// angles, network current, machine-frame currents with the base-change
// scaling, terminal EMFs, power, torque.
MachineElectricals machine_electricals(const SystemState& x, const ReducedNetwork& net,
                                       const std::vector<MachineParams>& params);

// Continuous-time derivatives. u stacks [T_m; E_fd] (2g entries; E_fd is
// ignored for order-2 machines, whose EMFs do not move).
SystemState dynamics(const SystemState& x, const Eigen::VectorXd& u, const ReducedNetwork& net,
                     const std::vector<MachineParams>& params);

// PMU outputs for the selected machines (ascending 0-based indices),
// stacked [e_R; e_I; i_R; i_I].
Eigen::VectorXd measure(const SystemState& x, const ReducedNetwork& net,
                        const std::vector<MachineParams>& params, const std::vector<int>& pmu_set);

// One explicit two-stage (Heun) step of an arbitrary field: predictor with
// the step-start input, corrector averaging start and end evaluations.
// Throws SimulationBlowup if the result leaves the finite range.
template <typename Field>
Eigen::VectorXd heun_step(Field&& f_c, const Eigen::VectorXd& x, const Eigen::VectorXd& u_km1,
                          const Eigen::VectorXd& u_k, double dt) {
  if (dt <= 0.0) throw NonPositiveScale("heun_step: dt must be positive");
  Eigen::VectorXd f0 = f_c(x, u_km1);
  Eigen::VectorXd xt = x + f0 * dt;
  Eigen::VectorXd fbar = 0.5 * (f_c(xt, u_k) + f0);
  Eigen::VectorXd next = x + fbar * dt;
  if (!next.allFinite()) throw SimulationBlowup("heun_step: state left the finite range");
  return next;
}

// Heun step of the generator dynamics on the packed state vector.
Eigen::VectorXd step_modified_euler(const Eigen::VectorXd& x, const Eigen::VectorXd& u_km1,
                                    const Eigen::VectorXd& u_k, double dt,
                                    const ReducedNetwork& net,
                                    const std::vector<MachineParams>& params);

// Inputs [T_m; E_fd] that make x_eq a fixed point. Requires every machine
// at rated speed (within 1e-9 relative).
Eigen::VectorXd equilibrium_inputs(const SystemState& x_eq, const ReducedNetwork& net,
                                   const std::vector<MachineParams>& params);

// Schur elimination of the trailing block: Ybar = Ygg - Ygl Yll^-1 Ylg.
Eigen::MatrixXcd kron_reduce(const Eigen::MatrixXcd& yfull, int retain);

// ProcessModel adapter: one (or several) Heun substeps per discrete
// transition, PMU measurement as the output map. Noise covariances are
// assigned by the experiment layer after derivation.
class PowerSystemModel : public filters::ProcessModel {
 public:
  PowerSystemModel(std::vector<MachineParams> params, ReducedNetwork net, std::vector<int> pmu_set,
                   double dt, int substeps = 1);

  int n() const override { return n_; }
  int p() const override { return int(pmu_.size()) * 4; }
  Eigen::VectorXd f(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  Eigen::VectorXd h(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  const matstab::SymMatrix& q() const override { return q_; }
  const matstab::SymMatrix& r() const override { return r_; }

  void set_process_noise(matstab::SymMatrix q) { q_ = std::move(q); }
  void set_measurement_noise(matstab::SymMatrix r) { r_ = std::move(r); }

  const std::vector<MachineParams>& params() const { return params_; }
  const ReducedNetwork& net() const { return net_; }
  const std::vector<int>& pmu_set() const { return pmu_; }
  double dt() const { return dt_; }
  int substeps() const { return substeps_; }

 private:
  std::vector<MachineParams> params_;
  ReducedNetwork net_;
  std::vector<int> pmu_;
  double dt_;
  int substeps_;
  int n_;
  matstab::SymMatrix q_, r_;
};

}  // namespace dsekit::ps
