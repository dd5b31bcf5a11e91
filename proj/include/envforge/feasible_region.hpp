// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "envforge/sensitivity.hpp"

namespace envforge::fr {

enum class RowKind { v_upper, v_lower, p_upper, p_lower };

struct RowLabel {
  RowKind kind;
  std::string bus;    // bus id, or customer id for p-limit rows
  std::string phase;  // empty for p-limit rows
  std::string str() const;
};

// Reduced polyhedron Gp*p + Gq*q <= h over the active customers' powers p and
// controllable reactive powers q (import-positive, kW/kvar). Obtained from
// the linearized voltage constraints with the nodal-voltage variables
// eliminated analytically.
struct FeasibleRegion {
  Eigen::MatrixXd Gp;  // M x v
  Eigen::MatrixXd Gq;  // M x v (one controllable q per active customer)
  Eigen::VectorXd h;   // M
  std::vector<RowLabel> labels;
  std::vector<std::string> active_ids;
  Eigen::VectorXd q_lower, q_upper;  // kvar
  Eigen::VectorXd q_base;            // dispatch the rows are folded around
  Eigen::VectorXd p_lower, p_upper;  // device kW limits (informational)

  int rows() const { return static_cast<int>(h.size()); }
  int active_count() const { return static_cast<int>(Gp.cols()); }

  // per-row slack h - Gp p - Gq q (positive inside)
  Eigen::VectorXd slack(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const;
};

struct AssemblyOptions {
  // Append per-customer device kW limit rows so every method, the
  // deterministic baseline included, sees one and the same polyhedron.
  bool include_p_limits = false;
  // Scale every row to unit max-|coefficient| (pure preconditioning).
  bool normalize_rows = true;
  std::optional<double> vmin_pu;  // override network limits
  std::optional<double> vmax_pu;
};

// Rows encode vmin <= |V|_linearized <= vmax for every monitored node-phase.
// Throws when the base point itself violates a limit (names the row).
FeasibleRegion assemble_feasible_region(const net::NetworkModel& net,
                                        const net::SensitivityMatrices& sens,
                                        const AssemblyOptions& options = {});

// One LP per row over the remaining rows; a row is dropped when its bound is
// unreachable (max LHS <= h_i + tol), which preserves the feasible set
// exactly. Pass a fixed q to test redundancy at that dispatch; otherwise q
// ranges over its box.
FeasibleRegion remove_redundant_rows(const FeasibleRegion& fr,
                                     const std::optional<Eigen::VectorXd>& q_fixed = std::nullopt,
                                     double tol = 1e-9);

}  // namespace envforge::fr
