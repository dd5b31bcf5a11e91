// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "envforge/envelope.hpp"
#include "envforge/feasible_region.hpp"
#include "envforge/powerflow.hpp"

namespace envforge::validation {

struct DrawRecord {
  int index = 0;
  double worst_v_pu = 0.0;    // voltage closest to / furthest past a limit
  std::string location;       // "bus.phase"
  bool violated = false;
  bool diverged = false;
};

struct ViolationReport {
  int draws = 0;
  int violations = 0;
  int divergences = 0;
  double max_overshoot_pu = 0.0;  // worst distance past a limit, 0 if clean
  std::uint64_t seed = 0;
  double vmin_pu = 0.0, vmax_pu = 0.0;
  std::vector<DrawRecord> records;

  std::string summary_json() const;
  std::string per_draw_csv() const;
};

struct ValidationOptions {
  // report a violation only beyond this band (raw truth by default)
  double violation_budget_pu = 0.0;
  net::PowerFlowOptions power_flow;
};

// Samples active powers uniformly and independently inside each customer's
// envelope (reactive at the dispatched q, passives at their forecast), runs
// the exact power flow and checks every node-phase against the voltage
// limits. Deterministic for a fixed seed.
ViolationReport monte_carlo_validate(const net::NetworkModel& net,
                                     const EnvelopeAllocation& alloc, int draws,
                                     std::uint64_t seed, const ValidationOptions& options = {});

struct CertifyReport {
  double min_slack = 0.0;   // over all checked box points and region rows
  std::int64_t checked_points = 0;
  std::string worst_row;
};

// Exact certification: per row the box corner maximizing the left-hand side
// is taken coordinatewise; for v <= 10 the full 2^v vertex sweep is run as
// well (identical result, kept as a cross-check).
CertifyReport certify_box_in_polyhedron(const fr::FeasibleRegion& region,
                                        const EnvelopeAllocation& alloc,
                                        const Eigen::VectorXd& q);

struct DualGapProbe {
  double primal = 0.0;  // numeric max of x'y over the squaring tower set
  double dual = 0.0;    // numeric min of the tower dual objective
};

// Probes strong duality of the inner worst-case problem at small scale
// (dim <= 4, K <= 3).
DualGapProbe dual_gap_probe(const Eigen::VectorXd& x, int squareness);

}  // namespace envforge::validation
