// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace envforge {

struct CustomerEnvelope {
  std::string id;
  double lower_kw = 0.0;
  double upper_kw = 0.0;
};

// Per-customer kW import/export limits for one dispatch interval, plus the
// reactive dispatch they were computed with. Powers are import-positive.
struct EnvelopeAllocation {
  std::string method;  // dmtd | so | ellipsoid | sesd
  int squareness = 0;  // K, 0 when not applicable
  std::vector<CustomerEnvelope> customers;
  std::vector<double> q_dispatch_kvar;  // aligned with customers
  double total_doe_kw = 0.0;            // sum of envelope widths
  double objective = 0.0;
  double solve_time_s = 0.0;
  std::string solver_status;
  double gap = 0.0;  // 1 - v^(-1/2^K) for superellipsoid methods
  std::vector<std::string> notes;

  double total_width() const;
};

std::string to_json(const EnvelopeAllocation& alloc);
EnvelopeAllocation allocation_from_json(const std::string& text);
void save_allocation(const EnvelopeAllocation& alloc, const std::string& path);
EnvelopeAllocation load_allocation(const std::string& path);

}  // namespace envforge
