// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "envforge/conic.hpp"
#include "envforge/envelope.hpp"
#include "envforge/feasible_region.hpp"

namespace envforge::rdoe {

struct RdoeConfig {
  int squareness = 7;     // K; 1 gives the inscribed-hyperellipsoid program
  double eps_md = 1e3;    // status-penalty weight
  int pwl_points = 15;
  double pwl_min_kw = 0.05;
  std::optional<double> pwl_max_kw;                // default: per-axis device span
  std::optional<std::vector<double>> pwl_anchors;  // explicit anchors (shared per axis)
  std::vector<int> statuses;                       // per active customer, empty -> all 0
  std::optional<Eigen::VectorXd> q_lower, q_upper; // override the region's q box
  conic::SolveOptions solver;

  void check(int active_count) const;  // throws InvalidArgument
};

// Built robust counterpart plus the variable layout needed for extraction.
struct RdoeProblem {
  conic::ConicProblem problem;
  int v = 0;
  int squareness = 1;
  int var_uc = 0, var_L = 0, var_q = 0, var_delta = 0, var_gamma = 0;
  std::vector<std::vector<double>> anchors;  // per axis
  int robust_row_count = 0;                  // one linear row per region row
  int cone_block_count = 0;
};

// Robust counterpart of the volume-maximization program: per region row one
// linear row over (alpha_K, t, u_c, q), a dual tower of rotated cones per
// (row, axis), a terminal Euclidean ball per row, two-sided status rows and
// tangent cuts for the log objective.
RdoeProblem build_rdoe_problem(const fr::FeasibleRegion& region, const RdoeConfig& cfg);

// x^2 <= 4 y z (with y, z >= 0) as the second-order cone ||(x, y-z)|| <= y+z.
void soc_encode(conic::ConicProblem& p, conic::AffineExpr x, conic::AffineExpr y,
                conic::AffineExpr z, std::string label = "");

struct RdoeSolution {
  conic::Status status = conic::Status::numerical_limit;
  Eigen::VectorXd u_c, L_diag, q, delta, gamma;
  double objective = 0.0;
  int iterations = 0;
  double solve_time_s = 0.0;
};

RdoeSolution solve_rdoe(const fr::FeasibleRegion& region, const RdoeConfig& cfg);

// Envelopes u_c(i) -+ L_ii * v^(-1/2^K); requires an optimal solution.
EnvelopeAllocation extract_envelopes(const RdoeSolution& sol, const fr::FeasibleRegion& region,
                                     int squareness);

// Log-spaced tangent anchors and the surrogate they induce (tangent cuts of
// log are an overestimator with equality at the anchors).
std::vector<double> log_spaced_anchors(double lo, double hi, int count);
double pwl_log_surrogate(double x, const std::vector<double>& anchors);
double pwl_gap(double x, const std::vector<double>& anchors);

}  // namespace envforge::rdoe
