// SPDX-License-Identifier: Apache-2.0
#include "envforge/envelope.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "envforge/errors.hpp"

namespace envforge {

using nlohmann::json;

double EnvelopeAllocation::total_width() const {
  double t = 0.0;
  for (const auto& c : customers) t += c.upper_kw - c.lower_kw;
  return t;
}

std::string to_json(const EnvelopeAllocation& a) {
  json j;
  j["method"] = a.method;
  if (a.squareness > 0) j["K"] = a.squareness;
  j["customers"] = json::array();
  for (const auto& c : a.customers)
    j["customers"].push_back({{"id", c.id}, {"lower_kw", c.lower_kw}, {"upper_kw", c.upper_kw}});
  j["q_dispatch_kvar"] = a.q_dispatch_kvar;
  j["total_doe_kw"] = a.total_doe_kw;
  j["objective"] = a.objective;
  j["solve_time_s"] = a.solve_time_s;
  j["solver_status"] = a.solver_status;
  if (a.squareness > 0) j["gap"] = a.gap;
  if (!a.notes.empty()) j["notes"] = a.notes;
  return j.dump(2) + "\n";
}

EnvelopeAllocation allocation_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("allocation file is not valid JSON: ") + e.what());
  }
  EnvelopeAllocation a;
  a.method = j.value("method", "");
  a.squareness = j.value("K", 0);
  if (!j.contains("customers")) throw SchemaError("allocation: missing field 'customers'");
  for (const auto& jc : j["customers"]) {
    CustomerEnvelope c;
    c.id = jc.at("id").get<std::string>();
    c.lower_kw = jc.at("lower_kw").get<double>();
    c.upper_kw = jc.at("upper_kw").get<double>();
    if (c.lower_kw > c.upper_kw + 1e-9)
      throw SchemaError("allocation: customer '" + c.id + "' has lower > upper");
    a.customers.push_back(std::move(c));
  }
  a.q_dispatch_kvar = j.value("q_dispatch_kvar", std::vector<double>{});
  a.total_doe_kw = j.value("total_doe_kw", 0.0);
  a.objective = j.value("objective", 0.0);
  a.solve_time_s = j.value("solve_time_s", 0.0);
  a.solver_status = j.value("solver_status", "");
  a.gap = j.value("gap", 0.0);
  a.notes = j.value("notes", std::vector<std::string>{});
  return a;
}

void save_allocation(const EnvelopeAllocation& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write allocation file '" + path + "'");
  out << to_json(a);
}

EnvelopeAllocation load_allocation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open allocation file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return allocation_from_json(ss.str());
}

}  // namespace envforge
