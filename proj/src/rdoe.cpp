// SPDX-License-Identifier: Apache-2.0
#include "envforge/rdoe.hpp"

#include <cmath>
#include <limits>

#include "envforge/errors.hpp"
#include "envforge/superellipsoid.hpp"

namespace envforge::rdoe {

namespace se = envforge::superellipsoid;
using conic::AffineExpr;
using conic::ConeBlock;
using conic::ConicProblem;
using conic::LinearTerm;
using conic::Relation;
using conic::Sense;

void RdoeConfig::check(int active_count) const {
  if (squareness < 1 || squareness > se::kMaxSquareness)
    throw InvalidArgument("rdoe: squareness K must lie in [1, 16]");
  if (!(eps_md > 0.0)) throw InvalidArgument("rdoe: eps_md must be positive");
  if (pwl_anchors) {
    if (pwl_anchors->size() < 2) throw InvalidArgument("rdoe: need at least 2 pwl anchors");
    for (std::size_t i = 0; i < pwl_anchors->size(); ++i) {
      if (!((*pwl_anchors)[i] > 0.0)) throw InvalidArgument("rdoe: pwl anchors must be positive");
      if (i > 0 && (*pwl_anchors)[i] <= (*pwl_anchors)[i - 1])
        throw InvalidArgument("rdoe: pwl anchors must be strictly increasing");
    }
  } else {
    if (pwl_points < 2) throw InvalidArgument("rdoe: need at least 2 pwl points");
    if (!(pwl_min_kw > 0.0)) throw InvalidArgument("rdoe: pwl_min_kw must be positive");
  }
  if (!statuses.empty() && static_cast<int>(statuses.size()) != active_count)
    throw InvalidArgument("rdoe: statuses must cover all active customers");
  for (int s : statuses)
    if (s != -1 && s != 0 && s != 1) throw InvalidArgument("rdoe: statuses must be -1, 0 or +1");
}

std::vector<double> log_spaced_anchors(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    throw InvalidArgument("log_spaced_anchors: need 0 < lo < hi and count >= 2");
  std::vector<double> a(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    a[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
  a.front() = lo;
  a.back() = hi;
  return a;
}

double pwl_log_surrogate(double x, const std::vector<double>& anchors) {
  double best = std::numeric_limits<double>::infinity();
  for (double a : anchors) best = std::min(best, (x - a) / a + std::log(a));
  return best;
}

double pwl_gap(double x, const std::vector<double>& anchors) {
  return pwl_log_surrogate(x, anchors) - std::log(x);
}

void soc_encode(ConicProblem& p, AffineExpr x, AffineExpr y, AffineExpr z, std::string label) {
  ConeBlock block;
  block.label = std::move(label);
  block.entries.resize(3);
  // e0 = y + z
  block.entries[0] = y;
  for (const auto& t : z.terms) block.entries[0].terms.push_back(t);
  block.entries[0].constant += z.constant;
  // e1 = x
  block.entries[1] = std::move(x);
  // e2 = y - z
  block.entries[2] = std::move(y);
  for (const auto& t : z.terms) block.entries[2].terms.push_back({t.var, -t.coeff});
  block.entries[2].constant -= z.constant;
  p.add_soc(std::move(block));
}

RdoeProblem build_rdoe_problem(const fr::FeasibleRegion& region, const RdoeConfig& cfg) {
  const int v = region.active_count();
  const int M = region.rows();
  const int K = cfg.squareness;
  if (v < 1) throw InvalidArgument("rdoe: region has no active customers");
  cfg.check(v);

  RdoeProblem out;
  out.v = v;
  out.squareness = K;
  ConicProblem& p = out.problem;

  out.var_uc = p.add_variables("u_c", v);
  out.var_L = p.add_variables("L", v, 1e-9);
  out.var_q = p.add_variables("q", v);
  for (int j = 0; j < v; ++j) {
    const double lo = cfg.q_lower ? (*cfg.q_lower)[j] : region.q_lower[j];
    const double hi = cfg.q_upper ? (*cfg.q_upper)[j] : region.q_upper[j];
    p.set_variable_bounds(out.var_q + j, lo, hi);
  }
  out.var_delta = p.add_variables("delta", v, 0.0);
  out.var_gamma = p.add_variables("gamma", v);

  // objective: max sum(gamma) - eps_md * sum(delta)
  {
    std::vector<LinearTerm> obj;
    for (int j = 0; j < v; ++j) obj.push_back({out.var_gamma + j, 1.0});
    for (int j = 0; j < v; ++j) obj.push_back({out.var_delta + j, -cfg.eps_md});
    p.set_objective(Sense::maximize, obj);
  }

  // per-axis tangent anchors for the log surrogate
  for (int j = 0; j < v; ++j) {
    if (cfg.pwl_anchors) {
      out.anchors.push_back(*cfg.pwl_anchors);
    } else {
      double hi = cfg.pwl_max_kw.value_or(region.p_upper[j] - region.p_lower[j]);
      hi = std::max(hi, 2.0 * cfg.pwl_min_kw);
      out.anchors.push_back(log_spaced_anchors(cfg.pwl_min_kw, hi, cfg.pwl_points));
    }
    for (double a : out.anchors[j])
      p.add_row({{out.var_gamma + j, 1.0}, {out.var_L + j, -1.0 / a}}, Relation::le,
                std::log(a) - 1.0, "pwl");
  }

  // status rows: -delta <= u_c(i) - lambda_i L_ii v^(-1/2^K) <= delta
  const double wstar = se::corner_factor(v, K);
  for (int j = 0; j < v; ++j) {
    const double lam = cfg.statuses.empty() ? 0.0 : cfg.statuses[j];
    p.add_row({{out.var_uc + j, 1.0}, {out.var_L + j, -lam * wstar}, {out.var_delta + j, -1.0}},
              Relation::le, 0.0, "status+");
    p.add_row({{out.var_uc + j, -1.0}, {out.var_L + j, lam * wstar}, {out.var_delta + j, -1.0}},
              Relation::le, 0.0, "status-");
  }

  // robust counterpart of every region row; rows are rescaled to unit
  // max-coefficient first, which only rescales that row's dual tower
  for (int m = 0; m < M; ++m) {
    double rscale =
        std::max(region.Gp.row(m).cwiseAbs().maxCoeff(), region.Gq.row(m).cwiseAbs().maxCoeff());
    if (rscale <= 1e-300) rscale = 1.0;
    const Eigen::VectorXd gp = region.Gp.row(m) / rscale;
    const Eigen::VectorXd gq = region.Gq.row(m) / rscale;
    const double hm = region.h[m] / rscale;

    std::vector<int> nz;
    for (int j = 0; j < v; ++j)
      if (gp[j] != 0.0) nz.push_back(j);

    std::vector<LinearTerm> robust;  // alpha_K + sum t + Gp u_c + Gq q <= h_m
    const int alphaK = p.add_variable("alphaK[" + std::to_string(m) + "]", 0.0);
    robust.push_back({alphaK, 1.0});
    for (int j = 0; j < v; ++j)
      if (gp[j] != 0.0) robust.push_back({out.var_uc + j, gp[j]});
    for (int j = 0; j < v; ++j)
      if (gq[j] != 0.0) robust.push_back({out.var_q + j, gq[j]});

    if (K == 1) {
      // no tower: ||(Gp L)_m|| <= alpha_K directly
      if (!nz.empty()) {
        ConeBlock ball;
        ball.label = "ball[" + std::to_string(m) + "]";
        ball.entries.push_back({{{alphaK, 1.0}}, 0.0});
        for (int j : nz) ball.entries.push_back({{{out.var_L + j, gp[j]}}, 0.0});
        p.add_soc(std::move(ball));
        ++out.cone_block_count;
      }
      p.add_row(robust, Relation::le, hm, "robust[" + std::to_string(m) + "]");
      ++out.robust_row_count;
      continue;
    }

    // dual tower variables alpha_{k,i}, t_{k,i}, k = 1..K-1, for the axes
    // this row actually touches (zero columns contribute exactly nothing)
    const std::string ms = std::to_string(m);
    std::vector<std::vector<int>> alpha(nz.size()), tee(nz.size());
    for (std::size_t a = 0; a < nz.size(); ++a) {
      const std::string is = std::to_string(nz[a]);
      alpha[a].resize(K);  // levels 1..K-1 used
      tee[a].resize(K);
      for (int k = 1; k <= K - 1; ++k) {
        alpha[a][k] = p.add_variable("alpha[" + ms + "][" + std::to_string(k) + "][" + is + "]", 0.0);
        tee[a][k] = p.add_variable("t[" + ms + "][" + std::to_string(k) + "][" + is + "]", 0.0);
        robust.push_back({tee[a][k], 1.0});
      }
    }

    for (std::size_t a = 0; a < nz.size(); ++a) {
      const int j = nz[a];
      // ((Gp L)_{m,i})^2 <= 4 alpha_1 t_1
      soc_encode(p, {{{out.var_L + j, gp[j]}}, 0.0}, {{{alpha[a][1], 1.0}}, 0.0},
                 {{{tee[a][1], 1.0}}, 0.0}, "tower");
      ++out.cone_block_count;
      // alpha_{k-1}^2 <= 4 alpha_k t_k
      for (int k = 2; k <= K - 1; ++k) {
        soc_encode(p, {{{alpha[a][k - 1], 1.0}}, 0.0}, {{{alpha[a][k], 1.0}}, 0.0},
                   {{{tee[a][k], 1.0}}, 0.0}, "tower");
        ++out.cone_block_count;
      }
    }

    // terminal ball ||alpha_{K-1}|| <= alpha_K
    if (!nz.empty()) {
      ConeBlock ball;
      ball.label = "ball[" + ms + "]";
      ball.entries.push_back({{{alphaK, 1.0}}, 0.0});
      for (std::size_t a = 0; a < nz.size(); ++a)
        ball.entries.push_back({{{alpha[a][K - 1], 1.0}}, 0.0});
      p.add_soc(std::move(ball));
      ++out.cone_block_count;
    }

    p.add_row(robust, Relation::le, hm, "robust[" + std::to_string(m) + "]");
    ++out.robust_row_count;
  }

  return out;
}

RdoeSolution solve_rdoe(const fr::FeasibleRegion& region, const RdoeConfig& cfg) {
  RdoeProblem built = build_rdoe_problem(region, cfg);
  const auto rep = conic::solve(built.problem, cfg.solver);

  RdoeSolution sol;
  sol.status = rep.status;
  sol.objective = rep.objective;
  sol.iterations = rep.iterations;
  sol.solve_time_s = rep.solve_time_s;
  if (rep.status != conic::Status::optimal) return sol;

  const int v = built.v;
  sol.u_c.resize(v);
  sol.L_diag.resize(v);
  sol.q.resize(v);
  sol.delta.resize(v);
  sol.gamma.resize(v);
  for (int j = 0; j < v; ++j) {
    sol.u_c[j] = rep.x[built.var_uc + j];
    sol.L_diag[j] = rep.x[built.var_L + j];
    sol.q[j] = rep.x[built.var_q + j];
    sol.delta[j] = rep.x[built.var_delta + j];
    sol.gamma[j] = rep.x[built.var_gamma + j];
  }
  return sol;
}

EnvelopeAllocation extract_envelopes(const RdoeSolution& sol, const fr::FeasibleRegion& region,
                                     int squareness) {
  if (sol.status != conic::Status::optimal)
    throw InvalidArgument("extract_envelopes: solution status is " + conic::to_string(sol.status));
  const int v = region.active_count();
  const double wstar = se::corner_factor(v, squareness);

  EnvelopeAllocation a;
  a.method = squareness == 1 ? "ellipsoid" : "sesd";
  a.squareness = squareness;
  a.solver_status = "optimal";
  a.objective = sol.objective;
  a.solve_time_s = sol.solve_time_s;
  a.gap = se::relative_gap(v, squareness);
  for (int j = 0; j < v; ++j) {
    const double half = sol.L_diag[j] * wstar;
    a.customers.push_back({region.active_ids[j], sol.u_c[j] - half, sol.u_c[j] + half});
    a.q_dispatch_kvar.push_back(sol.q[j]);
    if (sol.delta[j] > 1e-3)
      a.notes.push_back("status row for " + region.active_ids[j] +
                        " could not be pinned (delta = " + std::to_string(sol.delta[j]) + " kW)");
  }
  a.total_doe_kw = a.total_width();
  return a;
}

}  // namespace envforge::rdoe
