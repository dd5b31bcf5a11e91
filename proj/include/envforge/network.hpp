// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace envforge::net {

enum class Phase : int { a = 0, b = 1, c = 2 };

Phase parse_phase(const std::string& s);
std::string to_string(Phase p);

struct Bus {
  std::string id;
  std::array<bool, 3> phases{false, false, false};

  bool has_phase(Phase p) const { return phases[static_cast<int>(p)]; }
};

// Three-phase series element; entries for phases absent at either endpoint
// are ignored by the power flow.
struct Line {
  std::string from;
  std::string to;
  std::array<std::array<std::complex<double>, 3>, 3> z_ohm{};
};

struct Source {
  std::string bus;
  std::array<std::complex<double>, 3> voltage_pu{};  // per phase
  double base_voltage_v = 230.0;                     // line-to-neutral
  double base_power_kva = 30.0;                      // per-phase base
};

enum class CustomerKind { active, passive };

// Customer powers are consumption-positive (import > 0, export < 0).
struct Customer {
  std::string id;
  std::string bus;
  Phase phase = Phase::a;
  CustomerKind kind = CustomerKind::passive;
  double p_kw = 0.0;    // fixed injection, passive only
  double q_kvar = 0.0;
  std::array<double, 2> p_limits_kw{0.0, 0.0};    // active only
  std::array<double, 2> q_limits_kvar{0.0, 0.0};
  int status = 0;  // +1 importing, -1 exporting, 0 unknown
};

struct VoltageLimits {
  double vmin_pu = 0.95;
  double vmax_pu = 1.05;
};

struct NetworkModel {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  Source source;
  std::vector<Customer> customers;
  VoltageLimits limits;

  int bus_index(const std::string& id) const;
  int source_bus_index() const { return bus_index(source.bus); }
  std::vector<int> active_customer_indices() const;

  // ohm -> p.u. divisor: V_base^2 / S_base(per phase)
  double impedance_base_ohm() const {
    return source.base_voltage_v * source.base_voltage_v / (source.base_power_kva * 1000.0);
  }

  // Checks the model invariants: references resolve, customer phases exist,
  // q/p limit ordering, vmin < vmax, graph connected and radial.
  void validate() const;
};

NetworkModel load_network(const std::string& path);
NetworkModel parse_network_json(const std::string& text);

}  // namespace envforge::net
