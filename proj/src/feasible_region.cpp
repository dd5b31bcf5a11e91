// SPDX-License-Identifier: Apache-2.0
#include "envforge/feasible_region.hpp"

#include <cmath>

#include "envforge/conic.hpp"
#include "envforge/errors.hpp"

namespace envforge::fr {

std::string RowLabel::str() const {
  switch (kind) {
    case RowKind::v_upper: return "v_upper@" + bus + "." + phase;
    case RowKind::v_lower: return "v_lower@" + bus + "." + phase;
    case RowKind::p_upper: return "p_upper@" + bus;
    case RowKind::p_lower: return "p_lower@" + bus;
  }
  return "?";
}

Eigen::VectorXd FeasibleRegion::slack(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
  return h - Gp * p - Gq * q;
}

FeasibleRegion assemble_feasible_region(const net::NetworkModel& net,
                                        const net::SensitivityMatrices& sens,
                                        const AssemblyOptions& options) {
  const int nm = static_cast<int>(sens.monitored.size());
  const int v = static_cast<int>(sens.active.size());
  const double vmin = options.vmin_pu.value_or(net.limits.vmin_pu);
  const double vmax = options.vmax_pu.value_or(net.limits.vmax_pu);

  FeasibleRegion out;
  out.q_lower.resize(v);
  out.q_upper.resize(v);
  out.q_base.resize(v);
  out.p_lower.resize(v);
  out.p_upper.resize(v);
  for (int j = 0; j < v; ++j) {
    const auto& c = net.customers[sens.active[j]];
    out.active_ids.push_back(c.id);
    out.q_lower[j] = c.q_limits_kvar[0];
    out.q_upper[j] = c.q_limits_kvar[1];
    out.q_base[j] = sens.base[sens.active[j]].q_kvar;
    out.p_lower[j] = c.p_limits_kw[0];
    out.p_upper[j] = c.p_limits_kw[1];
  }

  const int extra = options.include_p_limits ? 2 * v : 0;
  const int m = 2 * nm + extra;
  out.Gp.setZero(m, v);
  out.Gq.setZero(m, v);
  out.h.setZero(m);
  out.labels.resize(m);

  const Eigen::VectorXd gq_base = sens.dv_dq * out.q_base;
  for (int r = 0; r < nm; ++r) {
    const auto& mp = sens.monitored[r];
    const std::string bus = net.buses[mp.bus].id;
    const std::string ph = net::to_string(mp.phase);
    // upper: v_base + Sp p + Sq (q - q_base) <= vmax
    out.Gp.row(2 * r) = sens.dv_dp.row(r);
    out.Gq.row(2 * r) = sens.dv_dq.row(r);
    out.h[2 * r] = vmax - sens.v_base[r] + gq_base[r];
    out.labels[2 * r] = {RowKind::v_upper, bus, ph};
    // lower: v_base + Sp p + Sq (q - q_base) >= vmin
    out.Gp.row(2 * r + 1) = -sens.dv_dp.row(r);
    out.Gq.row(2 * r + 1) = -sens.dv_dq.row(r);
    out.h[2 * r + 1] = sens.v_base[r] - vmin - gq_base[r];
    out.labels[2 * r + 1] = {RowKind::v_lower, bus, ph};
  }
  for (int j = 0; j < v && options.include_p_limits; ++j) {
    const int r = 2 * nm + 2 * j;
    out.Gp(r, j) = 1.0;
    out.h[r] = out.p_upper[j];
    out.labels[r] = {RowKind::p_upper, out.active_ids[j], ""};
    out.Gp(r + 1, j) = -1.0;
    out.h[r + 1] = -out.p_lower[j];
    out.labels[r + 1] = {RowKind::p_lower, out.active_ids[j], ""};
  }

  // base point (p = 0, q = q_base) must be strictly inside
  const Eigen::VectorXd s0 = out.slack(Eigen::VectorXd::Zero(v), out.q_base);
  for (int r = 0; r < m; ++r)
    if (s0[r] <= 0.0)
      throw InvalidArgument("feasible region empty at the base point: row " +
                            out.labels[r].str() + " violated by " + std::to_string(-s0[r]));

  if (options.normalize_rows) {
    for (int r = 0; r < m; ++r) {
      const double scale =
          std::max(out.Gp.row(r).cwiseAbs().maxCoeff(), out.Gq.row(r).cwiseAbs().maxCoeff());
      if (scale > 1e-300) {
        out.Gp.row(r) /= scale;
        out.Gq.row(r) /= scale;
        out.h[r] /= scale;
      }
    }
  }
  return out;
}

namespace {

FeasibleRegion filter_rows(const FeasibleRegion& fr, const std::vector<bool>& keep) {
  FeasibleRegion out = fr;
  int m2 = 0;
  for (bool k : keep) m2 += k;
  out.Gp.resize(m2, fr.Gp.cols());
  out.Gq.resize(m2, fr.Gq.cols());
  out.h.resize(m2);
  out.labels.clear();
  int r2 = 0;
  for (int r = 0; r < fr.rows(); ++r) {
    if (!keep[r]) continue;
    out.Gp.row(r2) = fr.Gp.row(r);
    out.Gq.row(r2) = fr.Gq.row(r);
    out.h[r2] = fr.h[r];
    out.labels.push_back(fr.labels[r]);
    ++r2;
  }
  return out;
}

}  // namespace

FeasibleRegion remove_redundant_rows(const FeasibleRegion& fr,
                                     const std::optional<Eigen::VectorXd>& q_fixed, double tol) {
  const int m = fr.rows();
  const int v = fr.active_count();
  const bool with_q = !q_fixed.has_value();
  std::vector<bool> keep(m, true);

  for (int r = 0; r < m; ++r) {
    conic::ConicProblem lp;
    const int pv = lp.add_variables("p", v);
    int qv = -1;
    if (with_q) {
      qv = lp.add_variables("q", v);
      for (int j = 0; j < v; ++j) lp.set_variable_bounds(qv + j, fr.q_lower[j], fr.q_upper[j]);
    }
    auto row_terms = [&](int i) {
      std::vector<conic::LinearTerm> terms;
      for (int j = 0; j < v; ++j)
        if (fr.Gp(i, j) != 0.0) terms.push_back({pv + j, fr.Gp(i, j)});
      if (with_q) {
        for (int j = 0; j < v; ++j)
          if (fr.Gq(i, j) != 0.0) terms.push_back({qv + j, fr.Gq(i, j)});
      }
      return terms;
    };
    auto rhs_of = [&](int i) {
      return with_q ? fr.h[i] : fr.h[i] - fr.Gq.row(i).dot(*q_fixed);
    };

    lp.set_objective(conic::Sense::maximize, row_terms(r));
    for (int i = 0; i < m; ++i) {
      if (i == r || !keep[i]) continue;
      lp.add_row(row_terms(i), conic::Relation::le, rhs_of(i));
    }
    const auto rep = conic::solve_lp(lp);
    if (rep.status == conic::Status::optimal) {
      if (rep.objective <= rhs_of(r) + tol) keep[r] = false;
    } else if (rep.status != conic::Status::unbounded) {
      throw SolverError("remove_redundant_rows: LP for row " + std::to_string(r) +
                        " returned " + conic::to_string(rep.status));
    }
  }
  return filter_rows(fr, keep);
}

}  // namespace envforge::fr
