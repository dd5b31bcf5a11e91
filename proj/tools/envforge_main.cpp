// SPDX-License-Identifier: Apache-2.0
// envforge: robust dynamic operating envelopes for unbalanced distribution
// networks. Subcommands: solve, sweep-k, validate, compare.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "envforge/baselines.hpp"
#include "envforge/envelope.hpp"
#include "envforge/errors.hpp"
#include "envforge/feasible_region.hpp"
#include "envforge/network.hpp"
#include "envforge/rdoe.hpp"
#include "envforge/sensitivity.hpp"
#include "envforge/superellipsoid.hpp"
#include "envforge/validation.hpp"

namespace {

namespace se = envforge::superellipsoid;
using namespace envforge;

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

struct CommonArgs {
  std::string network;
  double eps_md = 1e3;
  int pwl_points = 15;
  std::optional<double> vmin, vmax;
};

struct Pipeline {
  net::NetworkModel network;
  fr::FeasibleRegion region;
  std::vector<int> statuses;
};

Pipeline build_pipeline(const CommonArgs& args) {
  Pipeline pl;
  pl.network = net::load_network(args.network);

  // base: actives at 0 kW and a q dispatch of 0 clamped into bounds,
  // passives at their file forecast
  auto inj = net::nominal_injections(pl.network);
  for (int ci : pl.network.active_customer_indices()) {
    const auto& c = pl.network.customers[ci];
    inj[ci].q_kvar = std::clamp(0.0, c.q_limits_kvar[0], c.q_limits_kvar[1]);
    pl.statuses.push_back(c.status);
  }
  const auto sens = net::build_voltage_sensitivities(pl.network, inj);

  fr::AssemblyOptions opts;
  opts.include_p_limits = true;
  opts.vmin_pu = args.vmin;
  opts.vmax_pu = args.vmax;
  pl.region = assemble_feasible_region(pl.network, sens, opts);
  return pl;
}

rdoe::RdoeConfig make_rdoe_config(const Pipeline& pl, const CommonArgs& args, int K) {
  rdoe::RdoeConfig cfg;
  cfg.squareness = K;
  cfg.eps_md = args.eps_md;
  cfg.pwl_points = args.pwl_points;
  cfg.statuses = pl.statuses;
  return cfg;
}

baselines::BaselineConfig make_baseline_config(const Pipeline& pl, const CommonArgs& args) {
  baselines::BaselineConfig cfg;
  cfg.eps_md = args.eps_md;
  cfg.statuses = pl.statuses;
  return cfg;
}

int resolve_squareness(const Pipeline& pl, std::optional<int> K, std::optional<double> theta) {
  if (K && theta) throw InvalidArgument("give exactly one of --K and --theta");
  if (K) return *K;
  const int v = pl.region.active_count();
  if (v < 2) return K.value_or(1);
  return se::select_squareness(v, theta.value_or(0.01));
}

EnvelopeAllocation run_method(const Pipeline& pl, const CommonArgs& args,
                              const std::string& method, std::optional<int> K,
                              std::optional<double> theta) {
  if (method == "dmtd") return baselines::deterministic_doe(pl.region, make_baseline_config(pl, args));
  if (method == "so") return baselines::so_enumeration(pl.region, make_baseline_config(pl, args));
  if (method == "ellipsoid")
    return baselines::ellipsoid_rdoe(pl.region, make_rdoe_config(pl, args, 1)).box;
  if (method == "sesd") {
    const int k = resolve_squareness(pl, K, theta);
    const auto cfg = make_rdoe_config(pl, args, k);
    const auto sol = rdoe::solve_rdoe(pl.region, cfg);
    if (sol.status != conic::Status::optimal) {
      EnvelopeAllocation a;
      a.method = "sesd";
      a.squareness = k;
      a.solver_status = conic::to_string(sol.status);
      a.solve_time_s = sol.solve_time_s;
      return a;
    }
    return rdoe::extract_envelopes(sol, pl.region, k);
  }
  throw InvalidArgument("unknown method '" + method + "' (dmtd, so, ellipsoid, sesd)");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

int cmd_solve(const CommonArgs& args, const std::string& method, std::optional<int> K,
              std::optional<double> theta, const std::string& out_path) {
  const Pipeline pl = build_pipeline(args);
  const EnvelopeAllocation alloc = run_method(pl, args, method, K, theta);
  if (alloc.solver_status != "optimal") {
    std::fprintf(stderr, "error: %s solve finished with status '%s'\n", method.c_str(),
                 alloc.solver_status.c_str());
    return kExitSolver;
  }
  save_allocation(alloc, out_path);
  std::printf("%-10s  total DOE %10.4f kW  solve time %8.3f s  -> %s\n", alloc.method.c_str(),
              alloc.total_doe_kw, alloc.solve_time_s, out_path.c_str());
  for (const auto& c : alloc.customers)
    std::printf("  %-8s  [%10.4f, %10.4f] kW\n", c.id.c_str(), c.lower_kw, c.upper_kw);
  return kExitOk;
}

int cmd_sweep_k(const CommonArgs& args, int k_min, int k_max, bool no_solve, int synthetic_v,
                const std::string& out_path) {
  if (k_min < 1 || k_max < k_min) throw InvalidArgument("empty or invalid K range");
  if (k_max > se::kMaxSquareness) throw InvalidArgument("K range exceeds the cap of 16");

  std::optional<Pipeline> pl;
  int v = synthetic_v;
  if (synthetic_v <= 0) {
    pl = build_pipeline(args);
    v = pl->region.active_count();
  }

  std::ostringstream table;
  table << "K,total_doe_kw,gap,solve_time_s\n";
  std::printf("%4s  %14s  %12s  %12s\n", "K", "total_doe_kw", "gap", "solve_time_s");
  for (int k = k_min; k <= k_max; ++k) {
    const double gap = se::relative_gap(v, k);
    if (no_solve || !pl) {
      table << k << ",," << std::setprecision(12) << gap << ",\n";
      std::printf("%4d  %14s  %12.6g  %12s\n", k, "-", gap, "-");
      continue;
    }
    const auto alloc = run_method(*pl, args, "sesd", k, std::nullopt);
    if (alloc.solver_status != "optimal") {
      std::fprintf(stderr, "error: sweep at K=%d finished with status '%s'\n", k,
                   alloc.solver_status.c_str());
      return kExitSolver;
    }
    table << k << ',' << std::setprecision(12) << alloc.total_doe_kw << ',' << gap << ','
          << alloc.solve_time_s << "\n";
    std::printf("%4d  %14.4f  %12.6g  %12.3f\n", k, alloc.total_doe_kw, gap, alloc.solve_time_s);
  }
  if (!out_path.empty()) write_file(out_path, table.str());
  return kExitOk;
}

int cmd_validate(const CommonArgs& args, const std::string& allocation_path, int draws,
                 std::uint64_t seed, double budget, const std::string& out_prefix) {
  if (draws < 1) throw InvalidArgument("--draws must be >= 1");
  const auto network = net::load_network(args.network);
  const auto alloc = load_allocation(allocation_path);
  validation::ValidationOptions vopts;
  vopts.violation_budget_pu = budget;
  const auto report = validation::monte_carlo_validate(network, alloc, draws, seed, vopts);
  if (!out_prefix.empty()) {
    write_file(out_prefix + "_report.json", report.summary_json());
    write_file(out_prefix + "_draws.csv", report.per_draw_csv());
  }
  std::printf("validate %s: %d draws, %d violations, %d divergences, max overshoot %.6g p.u.\n",
              alloc.method.c_str(), report.draws, report.violations, report.divergences,
              report.max_overshoot_pu);
  return report.violations == 0 && report.divergences == 0 ? kExitOk : kExitViolations;
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& methods) {
  const Pipeline pl = build_pipeline(args);
  std::printf("%-14s  %14s  %10s  %12s  %s\n", "method", "total_doe_kw", "gap", "solve_time_s",
              "status");
  for (const auto& spec : methods) {
    std::string method = spec;
    std::optional<int> K;
    if (auto colon = spec.find(':'); colon != std::string::npos) {
      method = spec.substr(0, colon);
      K = std::stoi(spec.substr(colon + 1));
    }
    std::string name = spec;
    try {
      const auto alloc = run_method(pl, args, method, K, std::nullopt);
      if (alloc.solver_status != "optimal") {
        std::printf("%-14s  %14s  %10s  %12s  %s\n", name.c_str(), "-", "-", "-",
                    alloc.solver_status.c_str());
        continue;
      }
      if (alloc.squareness > 0)
        std::printf("%-14s  %14.4f  %10.6f  %12.3f  %s\n", name.c_str(), alloc.total_doe_kw,
                    alloc.gap, alloc.solve_time_s, alloc.solver_status.c_str());
      else
        std::printf("%-14s  %14.4f  %10s  %12.3f  %s\n", name.c_str(), alloc.total_doe_kw, "-",
                    alloc.solve_time_s, alloc.solver_status.c_str());
    } catch (const Error& e) {
      std::printf("%-14s  %14s  %10s  %12s  error: %s\n", name.c_str(), "-", "-", "-", e.what());
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust dynamic operating envelopes via superellipsoid-based conic optimization"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string method = "sesd";
  std::optional<int> K;
  std::optional<double> theta;
  std::string out_path = "envelope.json";
  std::string allocation_path;
  int draws = 10000;
  std::uint64_t seed = 1;
  int k_min = 1, k_max = 7;
  bool no_solve = false;
  int synthetic_v = 0;
  std::string out_prefix;
  std::vector<std::string> methods;

  auto add_common = [&](CLI::App* cmd, bool network_required = true) {
    auto* opt = cmd->add_option("--network", common.network, "network model file (JSON)");
    if (network_required) opt->required();
    cmd->add_option("--eps-md", common.eps_md, "status-penalty weight");
    cmd->add_option("--pwl-points", common.pwl_points, "tangent points for the log objective");
    cmd->add_option("--vmin", common.vmin, "override lower voltage limit (p.u.)");
    cmd->add_option("--vmax", common.vmax, "override upper voltage limit (p.u.)");
  };

  auto* solve = app.add_subcommand("solve", "compute envelopes with one method");
  add_common(solve);
  solve->add_option("--method", method, "dmtd | so | ellipsoid | sesd")->required();
  solve->add_option("--K", K, "superellipsoid squareness (sesd)");
  solve->add_option("--theta", theta, "target relative gap; picks K (sesd)");
  solve->add_option("--out", out_path, "envelope result file");

  auto* sweep = app.add_subcommand("sweep-k", "solve across a squareness range");
  add_common(sweep, false);
  sweep->add_option("--k-min", k_min, "first K");
  sweep->add_option("--k-max", k_max, "last K");
  sweep->add_flag("--no-solve", no_solve, "emit only the gap column");
  sweep->add_option("--synthetic-v", synthetic_v,
                    "gap table for this many customers without a network");
  sweep->add_option("--out", out_prefix, "CSV output file");

  double budget = 0.0;
  auto* validate = app.add_subcommand("validate", "Monte-Carlo stress test of an allocation");
  add_common(validate);
  validate->add_option("--allocation", allocation_path, "envelope result file")->required();
  validate->add_option("--draws", draws, "number of random draws");
  validate->add_option("--seed", seed, "RNG seed");
  validate->add_option("--budget", budget,
                       "flag violations only beyond this band (p.u.); raw truth by default");
  validate->add_option("--out", out_prefix, "output prefix for report files");

  auto* compare = app.add_subcommand("compare", "run several methods, one table");
  add_common(compare);
  compare
      ->add_option("--methods", methods,
                   "comma-separated methods; sesd may carry :K (e.g. sesd:7)")
      ->delimiter(',')
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(common, method, K, theta, out_path);
    if (sweep->parsed()) {
      if (synthetic_v <= 0 && common.network.empty())
        throw InvalidArgument("sweep-k needs --network or --synthetic-v");
      return cmd_sweep_k(common, k_min, k_max, no_solve, synthetic_v, out_prefix);
    }
    if (validate->parsed())
      return cmd_validate(common, allocation_path, draws, seed, budget, out_prefix);
    if (compare->parsed()) return cmd_compare(common, methods);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitUsage;
}
