// SPDX-License-Identifier: Apache-2.0
#include "envforge/baselines.hpp"

#include <chrono>
#include <cmath>

#include "envforge/errors.hpp"

namespace envforge::baselines {

using conic::ConicProblem;
using conic::LinearTerm;
using conic::Relation;
using conic::Sense;
using conic::Status;

namespace {

std::vector<int> resolve_statuses(const BaselineConfig& cfg, int v) {
  if (cfg.statuses.empty()) return std::vector<int>(v, 0);
  if (static_cast<int>(cfg.statuses.size()) != v)
    throw InvalidArgument("baseline: statuses must cover all active customers");
  return cfg.statuses;
}

void add_region_rows(ConicProblem& lp, const fr::FeasibleRegion& fr, int pv, int qv) {
  for (int m = 0; m < fr.rows(); ++m) {
    std::vector<LinearTerm> terms;
    for (int j = 0; j < fr.active_count(); ++j) {
      if (fr.Gp(m, j) != 0.0) terms.push_back({pv + j, fr.Gp(m, j)});
      if (fr.Gq(m, j) != 0.0) terms.push_back({qv + j, fr.Gq(m, j)});
    }
    lp.add_row(std::move(terms), Relation::le, fr.h[m]);
  }
}

void set_q_bounds(ConicProblem& lp, const fr::FeasibleRegion& fr, const BaselineConfig& cfg,
                  int qv) {
  for (int j = 0; j < fr.active_count(); ++j) {
    const double lo = cfg.q_lower ? (*cfg.q_lower)[j] : fr.q_lower[j];
    const double hi = cfg.q_upper ? (*cfg.q_upper)[j] : fr.q_upper[j];
    lp.set_variable_bounds(qv + j, lo, hi);
  }
}

}  // namespace

EnvelopeAllocation deterministic_doe(const fr::FeasibleRegion& fr, const BaselineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int v = fr.active_count();
  const auto statuses = resolve_statuses(cfg, v);

  bool any_unknown = false;
  for (int s : statuses) any_unknown |= (s == 0);

  struct Attempt {
    conic::SolveReport rep;
    int pv, qv;
    double total;
  };
  auto run = [&](int dir_for_unknown) {
    ConicProblem lp;
    const int pv = lp.add_variables("p", v);
    const int qv = lp.add_variables("q", v);
    set_q_bounds(lp, fr, cfg, qv);
    std::vector<LinearTerm> obj;
    for (int j = 0; j < v; ++j) {
      const double sign = statuses[j] != 0 ? statuses[j] : dir_for_unknown;
      obj.push_back({pv + j, sign});
    }
    lp.set_objective(Sense::maximize, obj);
    add_region_rows(lp, fr, pv, qv);
    Attempt at;
    at.rep = conic::solve_lp(lp, cfg.solver);
    at.pv = pv;
    at.qv = qv;
    at.total = 0.0;
    if (at.rep.status == Status::optimal)
      for (int j = 0; j < v; ++j) {
        const double p = at.rep.x[pv + j];
        at.total += statuses[j] != 0 ? std::fabs(p) : 2.0 * std::fabs(p);
      }
    return at;
  };

  Attempt best = run(+1);
  if (any_unknown && best.rep.status == Status::optimal) {
    Attempt alt = run(-1);
    if (alt.rep.status == Status::optimal && alt.total > best.total) best = alt;
  }

  EnvelopeAllocation a;
  a.method = "dmtd";
  a.solver_status = conic::to_string(best.rep.status);
  a.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  a.notes.push_back(
      "allocation anchored at a single feasible operating point (status-signed LP objective)");
  if (best.rep.status != Status::optimal) return a;

  a.objective = best.rep.objective;
  for (int j = 0; j < v; ++j) {
    const double p = best.rep.x[best.pv + j];
    CustomerEnvelope ce;
    ce.id = fr.active_ids[j];
    if (statuses[j] == 0) {
      ce.lower_kw = -std::fabs(p);
      ce.upper_kw = std::fabs(p);
    } else {
      ce.lower_kw = std::min(0.0, p);
      ce.upper_kw = std::max(0.0, p);
    }
    a.customers.push_back(ce);
    a.q_dispatch_kvar.push_back(best.rep.x[best.qv + j]);
  }
  a.total_doe_kw = a.total_width();
  return a;
}

EnvelopeAllocation so_enumeration(const fr::FeasibleRegion& fr, const BaselineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int v = fr.active_count();
  if (v > cfg.so_vertex_cap)
    throw InvalidArgument(
        "so_enumeration: " + std::to_string(v) + " active customers would require 2^" +
        std::to_string(v) +
        " vertex constraints per region row; enumeration is capped at " +
        std::to_string(cfg.so_vertex_cap) + " customers");
  const auto statuses = resolve_statuses(cfg, v);

  ConicProblem lp;
  const int lo = lp.add_variables("lo", v);
  const int hi = lp.add_variables("hi", v);
  const int qv = lp.add_variables("q", v);
  const int del = lp.add_variables("delta", v, 0.0);
  set_q_bounds(lp, fr, cfg, qv);

  std::vector<LinearTerm> obj;
  for (int j = 0; j < v; ++j) {
    obj.push_back({hi + j, 1.0});
    obj.push_back({lo + j, -1.0});
    obj.push_back({del + j, -cfg.eps_md});
  }
  lp.set_objective(Sense::maximize, obj);

  for (int j = 0; j < v; ++j) lp.add_row({{lo + j, 1.0}, {hi + j, -1.0}}, Relation::le, 0.0);

  // status pinning mirrors the superellipsoid program: importers pin the
  // export (lower) side, exporters the import (upper) side, unknown the mid
  for (int j = 0; j < v; ++j) {
    std::vector<LinearTerm> pin;
    if (statuses[j] == 1)
      pin = {{lo + j, 1.0}};
    else if (statuses[j] == -1)
      pin = {{hi + j, 1.0}};
    else
      pin = {{lo + j, 0.5}, {hi + j, 0.5}};
    auto neg = pin;
    for (auto& t : neg) t.coeff = -t.coeff;
    auto pos = pin;
    pos.push_back({del + j, -1.0});
    neg.push_back({del + j, -1.0});
    lp.add_row(std::move(pos), Relation::le, 0.0);
    lp.add_row(std::move(neg), Relation::le, 0.0);
  }

  // every box vertex must satisfy every region row
  for (std::uint64_t mask = 0; mask < (1ull << v); ++mask) {
    for (int m = 0; m < fr.rows(); ++m) {
      std::vector<LinearTerm> terms;
      for (int j = 0; j < v; ++j) {
        if (fr.Gp(m, j) != 0.0)
          terms.push_back({(mask >> j & 1) ? hi + j : lo + j, fr.Gp(m, j)});
        if (fr.Gq(m, j) != 0.0) terms.push_back({qv + j, fr.Gq(m, j)});
      }
      lp.add_row(std::move(terms), Relation::le, fr.h[m]);
    }
  }

  const auto rep = conic::solve_lp(lp, cfg.solver);
  EnvelopeAllocation a;
  a.method = "so";
  a.solver_status = conic::to_string(rep.status);
  a.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rep.status != Status::optimal) return a;
  a.objective = rep.objective;
  for (int j = 0; j < v; ++j) {
    const double lo_v = rep.x[lo + j];
    // lo <= hi holds only to solver tolerance
    const double hi_v = std::max(rep.x[hi + j], lo_v);
    a.customers.push_back({fr.active_ids[j], lo_v, hi_v});
    a.q_dispatch_kvar.push_back(rep.x[qv + j]);
  }
  a.total_doe_kw = a.total_width();
  return a;
}

EllipsoidResult ellipsoid_rdoe(const fr::FeasibleRegion& fr, const rdoe::RdoeConfig& cfg) {
  rdoe::RdoeConfig c1 = cfg;
  c1.squareness = 1;
  const auto sol = rdoe::solve_rdoe(fr, c1);
  EllipsoidResult out;
  if (sol.status != Status::optimal) {
    out.box.method = "ellipsoid";
    out.box.solver_status = conic::to_string(sol.status);
    return out;
  }
  out.box = rdoe::extract_envelopes(sol, fr, 1);
  out.semi_axes = sol.L_diag;
  out.center = sol.u_c;
  return out;
}

}  // namespace envforge::baselines
