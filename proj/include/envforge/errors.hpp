// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace envforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad function arguments / configuration.
struct InvalidArgument : Error {
  using Error::Error;
};

// Network file does not match the documented schema.
struct SchemaError : Error {
  using Error::Error;
};

// Power flow failed to converge (extreme loading / no solution).
struct PowerFlowError : Error {
  using Error::Error;
};

// Conic/LP backend failure that is not an infeasible/unbounded status.
struct SolverError : Error {
  using Error::Error;
};

}  // namespace envforge
