// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <vector>

#include "envforge/network.hpp"

namespace envforge::net {

struct BaseOperatingPoint {
  // voltages[bus][phase], p.u.; zero for absent phases
  std::vector<std::array<std::complex<double>, 3>> voltages;
  double residual = 0.0;  // max nodal current mismatch, p.u.
  int iterations = 0;

  double magnitude(int bus, Phase ph) const {
    return std::abs(voltages[bus][static_cast<int>(ph)]);
  }
};

// Net consumption at a customer (import-positive), kW/kvar.
struct Injection {
  double p_kw = 0.0;
  double q_kvar = 0.0;
};

struct PowerFlowOptions {
  double mismatch_tol_pu = 1e-8;
  int max_iterations = 100;
};

// Injections for all customers with actives at the given setpoints and
// passives at their fixed file values.
std::vector<Injection> nominal_injections(const NetworkModel& net);

// Fixed-point backward/forward sweep with constant-power loads. Throws
// PowerFlowError on non-convergence (no solution / extreme loading).
BaseOperatingPoint solve_exact_power_flow(const NetworkModel& net,
                                          const std::vector<Injection>& injections,
                                          const PowerFlowOptions& options = {});

}  // namespace envforge::net
