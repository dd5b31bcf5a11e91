// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <optional>

#include "envforge/conic.hpp"
#include "envforge/envelope.hpp"
#include "envforge/feasible_region.hpp"
#include "envforge/rdoe.hpp"

namespace envforge::baselines {

struct BaselineConfig {
  int so_vertex_cap = 16;  // refuse enumeration beyond this many customers
  double eps_md = 1e3;
  std::vector<int> statuses;  // per active customer, empty -> all 0
  std::optional<Eigen::VectorXd> q_lower, q_upper;
  conic::SolveOptions solver;
};

// Non-robust allocation at a single feasible operating point: LP driving each
// customer in its status direction (both directions tried jointly for unknown
// statuses), envelope [0, p] / [p, 0] by sign, symmetric for lambda = 0.
EnvelopeAllocation deterministic_doe(const fr::FeasibleRegion& region,
                                     const BaselineConfig& cfg);

// Globally optimal box: every one of the 2^v box vertices becomes a linear
// constraint, total width maximized. Refuses v beyond the cap.
EnvelopeAllocation so_enumeration(const fr::FeasibleRegion& region, const BaselineConfig& cfg);

struct EllipsoidResult {
  EnvelopeAllocation box;       // inscribed box of the K=1 hyperellipsoid
  Eigen::VectorXd semi_axes;    // L diagonal
  Eigen::VectorXd center;
};

// Maximum-volume inscribed hyperellipsoid (the squareness-1 program) and its
// box.
EllipsoidResult ellipsoid_rdoe(const fr::FeasibleRegion& region, const rdoe::RdoeConfig& cfg);

}  // namespace envforge::baselines
