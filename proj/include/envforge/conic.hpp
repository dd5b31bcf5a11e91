// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <string>
#include <vector>

namespace envforge::conic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { minimize, maximize };
enum class Relation { le, eq };
enum class Status { optimal, infeasible, unbounded, numerical_limit };

std::string to_string(Status s);

struct LinearTerm {
  int var;
  double coeff;
};

// sum(terms) + constant
struct AffineExpr {
  std::vector<LinearTerm> terms;
  double constant = 0.0;
};

struct LinearRow {
  std::vector<LinearTerm> terms;
  Relation rel = Relation::le;
  double rhs = 0.0;
  std::string label;
};

// entries[0] >= || (entries[1], ..., entries[d-1]) ||_2
struct ConeBlock {
  std::vector<AffineExpr> entries;
  std::string label;
};

struct VariableInfo {
  std::string name;
  double lb = -kInf;
  double ub = kInf;
};

// Solver-agnostic cone program: scalar variables with optional box bounds, a
// linear objective, linear (<=, =) rows and second-order cone blocks over
// affine expressions.
class ConicProblem {
 public:
  int add_variable(std::string name, double lb = -kInf, double ub = kInf);
  // Adds `count` scalars named base[0..count-1]; returns the first index.
  int add_variables(const std::string& base, int count, double lb = -kInf, double ub = kInf);
  void set_variable_bounds(int var, double lb, double ub);

  void set_objective(Sense sense, std::vector<LinearTerm> terms);
  void add_row(LinearRow row);
  void add_row(std::vector<LinearTerm> terms, Relation rel, double rhs, std::string label = "");
  void add_soc(ConeBlock block);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  const std::vector<VariableInfo>& variables() const { return vars_; }
  const std::vector<LinearRow>& rows() const { return rows_; }
  const std::vector<ConeBlock>& cones() const { return cones_; }
  Sense objective_sense() const { return sense_; }
  const std::vector<LinearTerm>& objective() const { return objective_; }

  // Checks variable references, dimensions and finiteness; throws
  // InvalidArgument naming the offender.
  void validate() const;

  // Plain-text dump, round-trip parseable (full double precision).
  std::string dump() const;
  static ConicProblem parse(const std::string& text);

 private:
  std::vector<VariableInfo> vars_;
  Sense sense_ = Sense::minimize;
  std::vector<LinearTerm> objective_;
  std::vector<LinearRow> rows_;
  std::vector<ConeBlock> cones_;
};

struct SolveOptions {
  double feastol = 1e-8;
  double reltol = 1e-8;
  double abstol = 1e-9;
  int max_iter = 200;
  bool verbose = false;
  // Relative perturbation applied to the interior initialization; exposes a
  // "different starting state" knob for convexity sanity checks.
  double init_perturbation = 0.0;
  // Empty -> ENVFORGE_BACKEND env var -> "ipm".
  std::string backend;
};

struct SolveReport {
  Status status = Status::numerical_limit;
  std::vector<double> x;  // primal values, present iff status == optimal
  double objective = 0.0;
  int iterations = 0;
  double solve_time_s = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string backend;
};

SolveReport solve(const ConicProblem& problem, const SolveOptions& options = {});

// LP fast path; rejects problems with cone blocks.
SolveReport solve_lp(const ConicProblem& problem, const SolveOptions& options = {});

std::vector<std::string> backend_names();

}  // namespace envforge::conic
