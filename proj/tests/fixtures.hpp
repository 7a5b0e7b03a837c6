#pragma once

#include <complex>
#include <vector>

#include "dsekit/harness.hpp"
#include "dsekit/powersys.hpp"

// Desk-scale three-machine benchmark used across the experiment-layer tests:
// constant-EMF rotors behind transient reactance on a reduced coupling matrix.
namespace testsupport {

inline dsekit::harness::SystemDef wscc3() {
  using C = std::complex<double>;
  dsekit::harness::SystemDef sys;

  const double emf[3] = {1.0566, 1.0502, 1.0170};
  const double hh[3] = {23.64, 6.4, 3.01};
  const double xp[3] = {0.0608, 0.1198, 0.1813};
  for (int i = 0; i < 3; ++i) {
    dsekit::ps::MachineParams m;
    m.order = 2;
    m.h = hh[i];
    m.k_d = 2.0;
    m.x_d = m.x_q = m.xp_d = m.xp_q = xp[i];
    m.s_n = 100.0;
    m.eq_p_fixed = emf[i];
    m.ed_p_fixed = 0.0;
    sys.machines.push_back(m);
  }

  sys.net.ybar.resize(3, 3);
  sys.net.ybar << C(0.846, -2.988), C(0.287, 1.513), C(0.210, 1.226),  //
      C(0.287, 1.513), C(0.420, -2.724), C(0.213, 1.088),              //
      C(0.210, 1.226), C(0.213, 1.088), C(0.277, -2.368);
  sys.net.s_b = 100.0;

  const double deg = 3.14159265358979323846 / 180.0;
  sys.equilibrium.delta.resize(3);
  sys.equilibrium.delta << 2.2717 * deg, 19.7315 * deg, 13.1664 * deg;
  sys.equilibrium.omega = Eigen::VectorXd::Constant(3, sys.net.omega0);
  sys.equilibrium.eq_p.resize(0);
  sys.equilibrium.ed_p.resize(0);
  return sys;
}

// Ready-to-run benchmark scenario: angle kick on one machine, instruments on
// the third machine only.
inline dsekit::harness::ScenarioConfig wscc3_scenario(double kick_rad = 0.1, int machine = 0,
                                                      std::uint64_t seed = 7) {
  dsekit::harness::ScenarioConfig sc;
  sc.system = wscc3();
  sc.disturbance.kind = dsekit::harness::DisturbanceKind::state_perturbation;
  sc.disturbance.state_shift = Eigen::VectorXd::Zero(6);
  sc.disturbance.state_shift(machine) = kick_rad;
  sc.pmu_set = {2};
  sc.seed = seed;
  sc.name = "bench3-kick";
  return sc;
}

}  // namespace testsupport
