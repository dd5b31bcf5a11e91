// SPDX-License-Identifier: Apache-2.0
#include "envforge/network.hpp"

#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "envforge/errors.hpp"

namespace envforge::net {

using nlohmann::json;

Phase parse_phase(const std::string& s) {
  if (s == "a" || s == "A") return Phase::a;
  if (s == "b" || s == "B") return Phase::b;
  if (s == "c" || s == "C") return Phase::c;
  throw SchemaError("unknown phase '" + s + "' (expected a, b or c)");
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::a: return "a";
    case Phase::b: return "b";
    case Phase::c: return "c";
  }
  return "?";
}

int NetworkModel::bus_index(const std::string& id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<int> NetworkModel::active_customer_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < customers.size(); ++i)
    if (customers[i].kind == CustomerKind::active) out.push_back(static_cast<int>(i));
  return out;
}

void NetworkModel::validate() const {
  if (buses.empty()) throw SchemaError("network has no buses");
  if (source_bus_index() < 0)
    throw SchemaError("source bus '" + source.bus + "' is not a declared bus");
  if (!(source.base_voltage_v > 0.0) || !(source.base_power_kva > 0.0))
    throw SchemaError("source base voltage/power must be positive");
  if (!(limits.vmin_pu < limits.vmax_pu))
    throw SchemaError("voltage limits: vmin must be strictly below vmax");

  for (const auto& ln : lines) {
    if (bus_index(ln.from) < 0)
      throw SchemaError("line endpoint '" + ln.from + "' is not a declared bus");
    if (bus_index(ln.to) < 0)
      throw SchemaError("line endpoint '" + ln.to + "' is not a declared bus");
  }
  for (const auto& cust : customers) {
    const int b = bus_index(cust.bus);
    if (b < 0) throw SchemaError("customer '" + cust.id + "': unknown bus '" + cust.bus + "'");
    if (!buses[b].has_phase(cust.phase))
      throw SchemaError("customer '" + cust.id + "': unknown phase " + to_string(cust.phase) +
                        " at bus '" + cust.bus + "'");
    if (cust.kind == CustomerKind::active) {
      if (cust.p_limits_kw[0] > cust.p_limits_kw[1])
        throw SchemaError("customer '" + cust.id + "': p limits out of order");
      if (cust.q_limits_kvar[0] > cust.q_limits_kvar[1])
        throw SchemaError("customer '" + cust.id + "': q limits out of order");
      if (cust.status != -1 && cust.status != 0 && cust.status != 1)
        throw SchemaError("customer '" + cust.id + "': status must be -1, 0 or +1");
    }
  }
  const int src = source_bus_index();
  for (int ph = 0; ph < 3; ++ph)
    if (buses[src].phases[ph] && std::abs(source.voltage_pu[ph]) == 0.0)
      throw SchemaError("source voltage for phase " +
                        to_string(static_cast<Phase>(ph)) + " is zero");

  // connectivity + radiality (BFS over the line graph)
  const int nb = static_cast<int>(buses.size());
  std::vector<std::vector<int>> adj(nb);
  for (const auto& ln : lines) {
    const int u = bus_index(ln.from), v = bus_index(ln.to);
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<bool> seen(nb, false);
  std::queue<int> q;
  q.push(src);
  seen[src] = true;
  int reached = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        q.push(v);
      }
  }
  if (reached != nb) throw SchemaError("network graph is disconnected");
  if (static_cast<int>(lines.size()) != nb - 1)
    throw SchemaError("network is not radial (expected " + std::to_string(nb - 1) +
                      " lines for " + std::to_string(nb) + " buses, got " +
                      std::to_string(lines.size()) + ")");
}

namespace {

const json& require(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(ctx + ": missing field '" + key + "'");
  return *it;
}

std::complex<double> parse_complex(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw SchemaError(ctx + ": expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

NetworkModel parse_network(const json& root) {
  NetworkModel net;

  for (const auto& jb : require(root, "buses", "network")) {
    Bus b;
    b.id = require(jb, "id", "bus").get<std::string>();
    for (const auto& jp : require(jb, "phases", "bus '" + b.id + "'"))
      b.phases[static_cast<int>(parse_phase(jp.get<std::string>()))] = true;
    net.buses.push_back(std::move(b));
  }

  if (root.contains("lines")) {
    for (const auto& jl : root["lines"]) {
      Line ln;
      ln.from = require(jl, "from", "line").get<std::string>();
      ln.to = require(jl, "to", "line").get<std::string>();
      const auto& jz = require(jl, "impedance_ohm", "line " + ln.from + "-" + ln.to);
      if (!jz.is_array() || jz.size() != 3)
        throw SchemaError("line " + ln.from + "-" + ln.to + ": impedance_ohm must be 3x3");
      for (int r = 0; r < 3; ++r) {
        if (!jz[r].is_array() || jz[r].size() != 3)
          throw SchemaError("line " + ln.from + "-" + ln.to + ": impedance_ohm must be 3x3");
        for (int c = 0; c < 3; ++c)
          ln.z_ohm[r][c] = parse_complex(jz[r][c], "line " + ln.from + "-" + ln.to);
      }
      net.lines.push_back(std::move(ln));
    }
  }

  {
    const auto& js = require(root, "source", "network");
    net.source.bus = require(js, "bus", "source").get<std::string>();
    const auto& jv = require(js, "voltage_pu", "source");
    for (const auto& [ph, val] : jv.items())
      net.source.voltage_pu[static_cast<int>(parse_phase(ph))] = parse_complex(val, "source voltage");
    net.source.base_voltage_v = require(js, "base_voltage_v", "source").get<double>();
    net.source.base_power_kva = require(js, "base_power_kva", "source").get<double>();
  }

  for (const auto& jc : require(root, "customers", "network")) {
    Customer c;
    c.id = require(jc, "id", "customer").get<std::string>();
    c.bus = require(jc, "bus", "customer '" + c.id + "'").get<std::string>();
    c.phase = parse_phase(require(jc, "phase", "customer '" + c.id + "'").get<std::string>());
    const std::string kind = require(jc, "kind", "customer '" + c.id + "'").get<std::string>();
    if (kind == "active") {
      c.kind = CustomerKind::active;
      const auto& jp = require(jc, "p_limits_kw", "customer '" + c.id + "'");
      const auto& jq = require(jc, "q_limits_kvar", "customer '" + c.id + "'");
      if (!jp.is_array() || jp.size() != 2 || !jq.is_array() || jq.size() != 2)
        throw SchemaError("customer '" + c.id + "': limits must be [lo, hi]");
      c.p_limits_kw = {jp[0].get<double>(), jp[1].get<double>()};
      c.q_limits_kvar = {jq[0].get<double>(), jq[1].get<double>()};
      c.status = jc.value("status", 0);
    } else if (kind == "passive") {
      c.kind = CustomerKind::passive;
      c.p_kw = require(jc, "p_kw", "customer '" + c.id + "'").get<double>();
      c.q_kvar = require(jc, "q_kvar", "customer '" + c.id + "'").get<double>();
    } else {
      throw SchemaError("customer '" + c.id + "': kind must be 'active' or 'passive'");
    }
    net.customers.push_back(std::move(c));
  }

  if (root.contains("limits")) {
    net.limits.vmin_pu = root["limits"].value("vmin_pu", 0.95);
    net.limits.vmax_pu = root["limits"].value("vmax_pu", 1.05);
  }

  net.validate();
  return net;
}

}  // namespace

NetworkModel parse_network_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("network file is not valid JSON: ") + e.what());
  }
  return parse_network(root);
}

NetworkModel load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open network file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_network_json(ss.str());
}

}  // namespace envforge::net
