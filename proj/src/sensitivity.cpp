// SPDX-License-Identifier: Apache-2.0
#include "envforge/sensitivity.hpp"

#include <algorithm>
#include <set>

#include "envforge/errors.hpp"

namespace envforge::net {

SensitivityMatrices build_voltage_sensitivities(const NetworkModel& net,
                                                const std::vector<Injection>& base_injections,
                                                const SensitivityOptions& options) {
  SensitivityMatrices out;
  out.active = net.active_customer_indices();
  if (out.active.empty()) throw InvalidArgument("sensitivities: no active customers");
  out.base = base_injections;

  // monitored set, deterministic order
  std::set<std::pair<int, int>> mon;
  if (options.monitor_all_node_phases) {
    for (std::size_t b = 0; b < net.buses.size(); ++b)
      for (int ph = 0; ph < 3; ++ph)
        if (net.buses[b].phases[ph]) mon.insert({static_cast<int>(b), ph});
  } else {
    for (const auto& c : net.customers)
      mon.insert({net.bus_index(c.bus), static_cast<int>(c.phase)});
  }
  for (auto [b, ph] : mon) out.monitored.push_back({b, static_cast<Phase>(ph)});
  const int nm = static_cast<int>(out.monitored.size());
  const int na = static_cast<int>(out.active.size());

  const BaseOperatingPoint base = solve_exact_power_flow(net, base_injections, options.power_flow);
  out.v_base.resize(nm);
  for (int r = 0; r < nm; ++r)
    out.v_base[r] = base.magnitude(out.monitored[r].bus, out.monitored[r].phase);

  out.dv_dp.resize(nm, na);
  out.dv_dq.resize(nm, na);

  auto magnitudes = [&](const std::vector<Injection>& inj) {
    const BaseOperatingPoint op = solve_exact_power_flow(net, inj, options.power_flow);
    Eigen::VectorXd v(nm);
    for (int r = 0; r < nm; ++r) v[r] = op.magnitude(out.monitored[r].bus, out.monitored[r].phase);
    return v;
  };

  for (int j = 0; j < na; ++j) {
    const int ci = out.active[j];
    {
      auto up = base_injections, dn = base_injections;
      up[ci].p_kw += options.step_kw;
      dn[ci].p_kw -= options.step_kw;
      out.dv_dp.col(j) = (magnitudes(up) - magnitudes(dn)) / (2.0 * options.step_kw);
    }
    {
      auto up = base_injections, dn = base_injections;
      up[ci].q_kvar += options.step_kvar;
      dn[ci].q_kvar -= options.step_kvar;
      out.dv_dq.col(j) = (magnitudes(up) - magnitudes(dn)) / (2.0 * options.step_kvar);
    }
  }
  return out;
}

}  // namespace envforge::net
