// SPDX-License-Identifier: Apache-2.0
#include "envforge/powerflow.hpp"

#include <cmath>
#include <queue>

#include "envforge/errors.hpp"

namespace envforge::net {

namespace {

using cd = std::complex<double>;
using PhaseVec = std::array<cd, 3>;

struct Tree {
  std::vector<int> order;        // BFS order, source first
  std::vector<int> parent;       // bus -> parent bus (-1 at source)
  std::vector<int> parent_line;  // bus -> line index to parent (-1 at source)
};

Tree build_tree(const NetworkModel& net) {
  const int nb = static_cast<int>(net.buses.size());
  std::vector<std::vector<std::pair<int, int>>> adj(nb);  // (neighbor, line)
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const int u = net.bus_index(net.lines[l].from);
    const int v = net.bus_index(net.lines[l].to);
    adj[u].push_back({v, static_cast<int>(l)});
    adj[v].push_back({u, static_cast<int>(l)});
  }
  Tree t;
  t.parent.assign(nb, -1);
  t.parent_line.assign(nb, -1);
  std::vector<bool> seen(nb, false);
  std::queue<int> q;
  const int src = net.source_bus_index();
  q.push(src);
  seen[src] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    t.order.push_back(u);
    for (auto [v, l] : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        t.parent[v] = u;
        t.parent_line[v] = l;
        q.push(v);
      }
  }
  return t;
}

}  // namespace

std::vector<Injection> nominal_injections(const NetworkModel& net) {
  std::vector<Injection> inj(net.customers.size());
  for (std::size_t i = 0; i < net.customers.size(); ++i)
    if (net.customers[i].kind == CustomerKind::passive)
      inj[i] = {net.customers[i].p_kw, net.customers[i].q_kvar};
  return inj;
}

BaseOperatingPoint solve_exact_power_flow(const NetworkModel& net,
                                          const std::vector<Injection>& injections,
                                          const PowerFlowOptions& options) {
  if (injections.size() != net.customers.size())
    throw InvalidArgument("power flow: injections must cover all customers");

  const int nb = static_cast<int>(net.buses.size());
  const int nl = static_cast<int>(net.lines.size());
  const Tree tree = build_tree(net);
  const double zbase = net.impedance_base_ohm();
  const double sbase = net.source.base_power_kva;

  // complex load per bus/phase, p.u. (consumption-positive)
  std::vector<PhaseVec> load(nb, PhaseVec{});
  for (std::size_t i = 0; i < net.customers.size(); ++i) {
    const auto& c = net.customers[i];
    load[net.bus_index(c.bus)][static_cast<int>(c.phase)] +=
        cd(injections[i].p_kw, injections[i].q_kvar) / sbase;
  }

  BaseOperatingPoint op;
  op.voltages.assign(nb, PhaseVec{});
  for (int b = 0; b < nb; ++b)
    for (int ph = 0; ph < 3; ++ph)
      if (net.buses[b].phases[ph]) op.voltages[b][ph] = net.source.voltage_pu[ph];

  std::vector<PhaseVec> draw(nb), branch(nl), subtree(nb);
  auto load_current = [&](int b, int ph) -> cd {
    const cd s = load[b][ph];
    if (s == 0.0) return 0.0;
    const cd v = op.voltages[b][ph];
    return std::conj(s / v);
  };

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    bool finite = true;
    for (int b = 0; b < nb && finite; ++b)
      for (int ph = 0; ph < 3; ++ph) {
        const cd v = op.voltages[b][ph];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) ||
            (net.buses[b].phases[ph] && std::abs(v) < 1e-6)) {
          finite = false;
          break;
        }
      }
    if (!finite)
      throw PowerFlowError("power flow diverged (voltage collapse) after " +
                           std::to_string(iter - 1) + " iterations");

    for (int b = 0; b < nb; ++b)
      for (int ph = 0; ph < 3; ++ph) draw[b][ph] = load_current(b, ph);

    // backward: accumulate subtree draws into branch currents
    for (int b = 0; b < nb; ++b) subtree[b] = draw[b];
    for (auto itb = tree.order.rbegin(); itb != tree.order.rend(); ++itb) {
      const int b = *itb;
      if (tree.parent[b] < 0) continue;
      branch[tree.parent_line[b]] = subtree[b];
      for (int ph = 0; ph < 3; ++ph) subtree[tree.parent[b]][ph] += subtree[b][ph];
    }

    // forward: propagate voltage drops from the source
    for (int b : tree.order) {
      if (tree.parent[b] < 0) continue;
      const auto& ln = net.lines[tree.parent_line[b]];
      const PhaseVec& ib = branch[tree.parent_line[b]];
      for (int ph = 0; ph < 3; ++ph) {
        if (!net.buses[b].phases[ph]) {
          op.voltages[b][ph] = 0.0;
          continue;
        }
        cd drop = 0.0;
        for (int c = 0; c < 3; ++c) drop += (ln.z_ohm[ph][c] / zbase) * ib[c];
        op.voltages[b][ph] = op.voltages[tree.parent[b]][ph] - drop;
      }
    }

    // fixed-point residual: nodal current mismatch at the updated voltages
    double mismatch = 0.0;
    for (int b = 0; b < nb; ++b)
      for (int ph = 0; ph < 3; ++ph)
        mismatch = std::max(mismatch, std::abs(load_current(b, ph) - draw[b][ph]));

    op.iterations = iter;
    op.residual = mismatch;
    if (mismatch <= options.mismatch_tol_pu) return op;
  }
  throw PowerFlowError("power flow did not converge in " +
                       std::to_string(options.max_iterations) +
                       " iterations (mismatch " + std::to_string(op.residual) + " p.u.)");
}

}  // namespace envforge::net
