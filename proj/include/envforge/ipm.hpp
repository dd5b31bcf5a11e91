// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "envforge/conic.hpp"

namespace envforge::ipm {

// Primal-dual interior-point method for LP/SOCP in homogeneous self-dual
// form. Backend behind conic::solve(); call that instead of this directly.
conic::SolveReport solve_hsd(const conic::ConicProblem& problem,
                             const conic::SolveOptions& options);

}  // namespace envforge::ipm
