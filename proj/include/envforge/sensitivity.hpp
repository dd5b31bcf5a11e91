// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <vector>

#include "envforge/powerflow.hpp"

namespace envforge::net {

struct MonitoredNodePhase {
  int bus;
  Phase phase;
};

// Linearization of voltage magnitudes around a base operating point:
// |V| ~ v_base + dv_dp * p + dv_dq * (q - q_base), with p, q the active
// customers' powers (import-positive, kW/kvar).
struct SensitivityMatrices {
  Eigen::MatrixXd dv_dp;  // monitored x active, p.u./kW
  Eigen::MatrixXd dv_dq;  // monitored x active, p.u./kvar
  Eigen::VectorXd v_base;
  std::vector<MonitoredNodePhase> monitored;
  std::vector<int> active;        // customer indices
  std::vector<Injection> base;    // injections the linearization is anchored at
};

struct SensitivityOptions {
  double step_kw = 0.1;
  double step_kvar = 0.1;
  bool monitor_all_node_phases = false;  // default: customer connection node-phases
  PowerFlowOptions power_flow;
};

// Central finite differences through the exact power flow; base has actives
// at the given injections (normally 0 kW and the base q dispatch) and
// passives at their forecast.
SensitivityMatrices build_voltage_sensitivities(const NetworkModel& net,
                                                const std::vector<Injection>& base_injections,
                                                const SensitivityOptions& options = {});

}  // namespace envforge::net
