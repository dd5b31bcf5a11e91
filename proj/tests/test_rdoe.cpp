// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "envforge/baselines.hpp"
#include "envforge/errors.hpp"
#include "envforge/rdoe.hpp"
#include "envforge/superellipsoid.hpp"
#include "test_support.hpp"

using namespace envforge;
namespace se = envforge::superellipsoid;
using test_support::make_box_region;
using test_support::make_random_region;
using test_support::make_region;

namespace {

double eval_affine(const conic::AffineExpr& e, const std::vector<double>& x) {
  double v = e.constant;
  for (const auto& t : e.terms) v += t.coeff * x[t.var];
  return v;
}

// direct arithmetic oracle for the rotated-cone encoding
bool rotated_cone_holds(double x, double y, double z) {
  return y >= 0.0 && z >= 0.0 && x * x <= 4.0 * y * z;
}

}  // namespace

TEST_CASE("soc_encode equals the rotated-cone predicate") {
  conic::ConicProblem p;
  const int x = p.add_variable("x");
  const int y = p.add_variable("y");
  const int z = p.add_variable("z");
  rdoe::soc_encode(p, {{{x, 1.0}}, 0.0}, {{{y, 1.0}}, 0.0}, {{{z, 1.0}}, 0.0});
  REQUIRE(p.cones().size() == 1);
  const auto& cone = p.cones()[0];
  REQUIRE(cone.entries.size() == 3);

  auto cone_holds = [&](double xv, double yv, double zv) {
    const std::vector<double> vals = {xv, yv, zv};
    const double e0 = eval_affine(cone.entries[0], vals);
    const double e1 = eval_affine(cone.entries[1], vals);
    const double e2 = eval_affine(cone.entries[2], vals);
    return e0 >= std::hypot(e1, e2);
  };

  // boundary: (2,1,1) gives ||(2,0)|| = 2 = y+z
  CHECK(cone_holds(2.0, 1.0, 1.0));
  CHECK_FALSE(cone_holds(2.0 + 1e-9, 1.0, 1.0));
  // inside: (0,0,5)
  CHECK(cone_holds(0.0, 0.0, 5.0));

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> U(-2.0, 3.0);
  for (int t = 0; t < 1000; ++t) {
    const double xv = U(rng), yv = U(rng), zv = U(rng);
    CHECK(cone_holds(xv, yv, zv) == rotated_cone_holds(xv, yv, zv));
  }
}

TEST_CASE("constraint counts match the published formula") {
  std::mt19937_64 rng(321);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int v = 1 + static_cast<int>(rng() % 5);
    const int M = 2 + static_cast<int>(rng() % 14);
    const int K = 1 + static_cast<int>(rng() % 8);

    // dense random region (no zero entries almost surely); h keeps 0 interior
    Eigen::MatrixXd G(M, v);
    Eigen::VectorXd h(M);
    for (int m = 0; m < M; ++m) {
      for (int j = 0; j < v; ++j) G(m, j) = N(rng) + (N(rng) > 0 ? 0.1 : -0.1);
      h[m] = 1.0 + std::fabs(N(rng));
    }
    auto fr = make_region(G, h);
    rdoe::RdoeConfig cfg;
    cfg.squareness = K;
    const auto built = rdoe::build_rdoe_problem(fr, cfg);

    CHECK(built.robust_row_count == M);
    CHECK(built.cone_block_count == v * M * (K - 1) + M);
    CHECK(static_cast<int>(built.problem.cones().size()) == built.cone_block_count);

    int robust_rows = 0;
    for (const auto& row : built.problem.rows())
      if (row.label.rfind("robust", 0) == 0) ++robust_rows;
    CHECK(robust_rows == M);
  }
}

TEST_CASE("v=1 interval region: envelopes reach the interval") {
  auto fr = make_box_region({5.0});
  rdoe::RdoeConfig cfg;
  cfg.squareness = 2;
  const auto sol = rdoe::solve_rdoe(fr, cfg);
  REQUIRE(sol.status == conic::Status::optimal);
  const auto alloc = rdoe::extract_envelopes(sol, fr, 2);
  // v = 1 makes the corner factor exactly 1: [-5, 5]
  CHECK(alloc.customers[0].lower_kw == doctest::Approx(-5.0).epsilon(1e-5));
  CHECK(alloc.customers[0].upper_kw == doctest::Approx(5.0).epsilon(1e-5));
  CHECK(alloc.total_doe_kw == doctest::Approx(10.0).epsilon(1e-5));
}

TEST_CASE("v=2 box region: scale reaches the box, half-widths shrink by the gap") {
  const double a = 4.0, b = 1.5;
  auto fr = make_box_region({a, b});
  for (int K : {2, 5, 7}) {
    rdoe::RdoeConfig cfg;
    cfg.squareness = K;
    const auto sol = rdoe::solve_rdoe(fr, cfg);
    REQUIRE(sol.status == conic::Status::optimal);
    const double w = se::corner_factor(2, K);
    CHECK(sol.u_c[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.u_c[1] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.L_diag[0] == doctest::Approx(a).epsilon(1e-5));
    CHECK(sol.L_diag[1] == doctest::Approx(b).epsilon(1e-5));
    const auto alloc = rdoe::extract_envelopes(sol, fr, K);
    CHECK(alloc.customers[0].upper_kw == doctest::Approx(a * w).epsilon(1e-5));
    CHECK(alloc.customers[1].upper_kw == doctest::Approx(b * w).epsilon(1e-5));
  }
}

TEST_CASE("status pinning at large penalty") {
  const double a = 5.0;
  auto fr = make_box_region({a, a});
  rdoe::RdoeConfig cfg;
  cfg.squareness = 7;
  cfg.eps_md = 1e3;

  // importer pins the export (lower) side to ~0
  cfg.statuses = {1, 1};
  auto sol = rdoe::solve_rdoe(fr, cfg);
  REQUIRE(sol.status == conic::Status::optimal);
  auto alloc = rdoe::extract_envelopes(sol, fr, 7);
  for (const auto& c : alloc.customers) {
    CHECK(std::fabs(c.lower_kw) <= 1e-3);
    CHECK(c.upper_kw >= 4.9);
  }

  // exporter pins the import (upper) side to ~0
  cfg.statuses = {-1, -1};
  sol = rdoe::solve_rdoe(fr, cfg);
  REQUIRE(sol.status == conic::Status::optimal);
  alloc = rdoe::extract_envelopes(sol, fr, 7);
  for (const auto& c : alloc.customers) {
    CHECK(std::fabs(c.upper_kw) <= 1e-3);
    CHECK(c.lower_kw <= -4.9);
  }

  // unknown pins the center
  cfg.statuses = {0, 0};
  sol = rdoe::solve_rdoe(fr, cfg);
  REQUIRE(sol.status == conic::Status::optimal);
  CHECK(std::fabs(sol.u_c[0]) <= 1e-3);
  CHECK(std::fabs(sol.u_c[1]) <= 1e-3);
}

TEST_CASE("forced status slack is absorbed and reported") {
  // region keeps p in [-3, -1]; an importer cannot pin its lower side at 0
  Eigen::MatrixXd G(2, 1);
  Eigen::VectorXd h(2);
  G << 1, -1;
  h << -1.0, 3.0;
  auto fr = make_region(G, h);
  rdoe::RdoeConfig cfg;
  cfg.squareness = 3;
  cfg.statuses = {1};
  cfg.eps_md = 10.0;  // mild penalty so the width stays visible
  const auto sol = rdoe::solve_rdoe(fr, cfg);
  REQUIRE(sol.status == conic::Status::optimal);
  CHECK(sol.delta[0] > 1e-3);
  const auto alloc = rdoe::extract_envelopes(sol, fr, 3);
  REQUIRE(!alloc.notes.empty());
  CHECK(alloc.notes[0].find("could not be pinned") != std::string::npos);
}

TEST_CASE("contradictory region rows give an infeasible status") {
  Eigen::MatrixXd G(2, 1);
  Eigen::VectorXd h(2);
  G << 1, -1;
  h << -1.0, 0.0;  // p <= -1 and p >= 0
  auto fr = make_region(G, h);
  rdoe::RdoeConfig cfg;
  cfg.squareness = 2;
  const auto sol = rdoe::solve_rdoe(fr, cfg);
  CHECK(sol.status == conic::Status::infeasible);
  CHECK_THROWS_AS(rdoe::extract_envelopes(sol, fr, 2), InvalidArgument);
}

TEST_CASE("robust feasibility: box vertices and the dual-norm certificate") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 6; ++trial) {
    const int v = 2 + static_cast<int>(rng() % 4);  // 2..5
    auto fr = make_random_region(rng, v, 3 * v);
    const int K = se::select_squareness(v, 0.01);
    rdoe::RdoeConfig cfg;
    cfg.squareness = K;
    const auto sol = rdoe::solve_rdoe(fr, cfg);
    REQUIRE(sol.status == conic::Status::optimal);
    const auto alloc = rdoe::extract_envelopes(sol, fr, K);

    // every box vertex satisfies every row
    Eigen::VectorXd x(v);
    for (std::uint32_t mask = 0; mask < (1u << v); ++mask) {
      for (int j = 0; j < v; ++j)
        x[j] = (mask >> j & 1) ? alloc.customers[j].upper_kw : alloc.customers[j].lower_kw;
      CHECK(fr.slack(x, sol.q).minCoeff() >= -1e-6);
    }

    // stronger: the whole superellipsoid fits; worst case per row is the
    // dual norm of (Gp L)_m with n* = n/(n-1)
    const double n = std::ldexp(1.0, K);
    const double nstar = n / (n - 1.0);
    for (int m = 0; m < fr.rows(); ++m) {
      double dual = 0.0;
      for (int j = 0; j < v; ++j)
        dual += std::pow(std::fabs(fr.Gp(m, j) * sol.L_diag[j]), nstar);
      dual = std::pow(dual, 1.0 / nstar);
      const double lhs = dual + fr.Gp.row(m).dot(sol.u_c) + fr.Gq.row(m).dot(sol.q);
      CHECK(lhs <= fr.h[m] + 1e-6);
    }
  }
}

TEST_CASE("total width never beats the enumeration optimum") {
  std::mt19937_64 rng(888);
  for (int trial = 0; trial < 5; ++trial) {
    const int v = 2 + static_cast<int>(rng() % 3);
    auto fr = make_random_region(rng, v, 2 * v + 2);
    const int K = se::select_squareness(v, 0.01);
    rdoe::RdoeConfig cfg;
    cfg.squareness = K;
    const auto sol = rdoe::solve_rdoe(fr, cfg);
    REQUIRE(sol.status == conic::Status::optimal);
    const auto sesd = rdoe::extract_envelopes(sol, fr, K);

    baselines::BaselineConfig bcfg;
    const auto so = baselines::so_enumeration(fr, bcfg);
    REQUIRE(so.solver_status == "optimal");
    CHECK(sesd.total_doe_kw <= so.total_doe_kw + 1e-6);
  }
}

TEST_CASE("deep towers at the squareness cap stay accurate") {
  auto fr = make_box_region({4.0, 1.5});
  for (int K : {10, 13, 16}) {
    rdoe::RdoeConfig cfg;
    cfg.squareness = K;
    const auto sol = rdoe::solve_rdoe(fr, cfg);
    REQUIRE(sol.status == conic::Status::optimal);
    CHECK(sol.L_diag[0] == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(sol.L_diag[1] == doctest::Approx(1.5).epsilon(1e-6));
  }
}

TEST_CASE("rows spanning six orders of magnitude solve like normalized ones") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    auto fr = make_random_region(rng, 3, 9);
    auto skewed = fr;
    for (int m = 0; m < skewed.rows(); ++m) {
      const double s = std::pow(10.0, static_cast<double>(static_cast<int>(rng() % 7)) - 3.0);
      skewed.Gp.row(m) *= s;
      skewed.h[m] *= s;
    }
    rdoe::RdoeConfig cfg;
    cfg.squareness = 8;
    const auto a = rdoe::solve_rdoe(fr, cfg);
    const auto b = rdoe::solve_rdoe(skewed, cfg);
    REQUIRE(a.status == conic::Status::optimal);
    REQUIRE(b.status == conic::Status::optimal);
    CHECK((a.L_diag - b.L_diag).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((a.u_c - b.u_c).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("scaling covariance: row scaling leaves envelopes unchanged") {
  std::mt19937_64 rng(99);
  auto fr = make_random_region(rng, 3, 8);
  rdoe::RdoeConfig cfg;
  cfg.squareness = 5;
  const auto sol1 = rdoe::solve_rdoe(fr, cfg);

  auto scaled = fr;
  scaled.Gp *= 3.7;
  scaled.Gq *= 3.7;
  scaled.h *= 3.7;
  const auto sol2 = rdoe::solve_rdoe(scaled, cfg);
  REQUIRE(sol1.status == conic::Status::optimal);
  REQUIRE(sol2.status == conic::Status::optimal);
  for (int j = 0; j < 3; ++j) {
    CHECK(sol1.u_c[j] == doctest::Approx(sol2.u_c[j]).epsilon(1e-6));
    CHECK(sol1.L_diag[j] == doctest::Approx(sol2.L_diag[j]).epsilon(1e-6));
  }
}

TEST_CASE("convexity sanity on a built robust counterpart") {
  std::mt19937_64 rng(111);
  auto fr = make_random_region(rng, 3, 6);
  rdoe::RdoeConfig cfg;
  cfg.squareness = 4;
  auto built = rdoe::build_rdoe_problem(fr, cfg);
  conic::SolveOptions plain;
  conic::SolveOptions shifted;
  shifted.init_perturbation = 0.5;
  const auto r1 = conic::solve(built.problem, plain);
  const auto r2 = conic::solve(built.problem, shifted);
  REQUIRE(r1.status == conic::Status::optimal);
  REQUIRE(r2.status == conic::Status::optimal);
  CHECK(std::fabs(r1.objective - r2.objective) <= 1e-6 * (1.0 + std::fabs(r1.objective)));
}

TEST_CASE("extraction identities") {
  auto fr = make_box_region({1.0, 1.0});
  rdoe::RdoeSolution sol;
  sol.status = conic::Status::optimal;
  sol.u_c = Eigen::VectorXd::Zero(2);
  sol.L_diag = Eigen::VectorXd::Ones(2);
  sol.q = Eigen::VectorXd::Zero(2);
  sol.delta = Eigen::VectorXd::Zero(2);
  sol.gamma = Eigen::VectorXd::Zero(2);

  const auto alloc = rdoe::extract_envelopes(sol, fr, 7);
  // 2^(-1/128) = 0.99460 per axis; S_h = 4 * 0.99460
  CHECK(alloc.customers[0].upper_kw == doctest::Approx(0.99460).epsilon(1e-5));
  CHECK(alloc.customers[0].lower_kw == doctest::Approx(-0.99460).epsilon(1e-5));
  CHECK(alloc.total_doe_kw == doctest::Approx(3.9784).epsilon(1e-4));

  // S_h / S_bar + gap = 1 exactly
  const double s_bar = 2.0 * sol.L_diag.sum();
  CHECK(alloc.total_doe_kw / s_bar + se::relative_gap(2, 7) == doctest::Approx(1.0).epsilon(1e-12));

  // v = 1: limits are u_c +- L exactly
  auto fr1 = make_box_region({2.0});
  rdoe::RdoeSolution s1;
  s1.status = conic::Status::optimal;
  s1.u_c = Eigen::VectorXd::Constant(1, 0.5);
  s1.L_diag = Eigen::VectorXd::Constant(1, 1.25);
  s1.q = s1.delta = s1.gamma = Eigen::VectorXd::Zero(1);
  const auto a1 = rdoe::extract_envelopes(s1, fr1, 9);
  CHECK(a1.customers[0].lower_kw == doctest::Approx(0.5 - 1.25));
  CHECK(a1.customers[0].upper_kw == doctest::Approx(0.5 + 1.25));
}

TEST_CASE("log surrogate: tangent cuts from above, anchors exact") {
  using rdoe::log_spaced_anchors;
  using rdoe::pwl_gap;
  using rdoe::pwl_log_surrogate;

  // single-anchor tangent at 1: gamma <= L - 1, exact at L = 1
  CHECK(pwl_log_surrogate(1.0, {1.0, 2.0}) == doctest::Approx(0.0));

  const auto anchors = log_spaced_anchors(0.2, 10.0, 15);
  REQUIRE(anchors.size() == 15);
  CHECK(anchors.front() == doctest::Approx(0.2));
  CHECK(anchors.back() == doctest::Approx(10.0));

  // dense-grid oracle over the anchor range
  double worst = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = 0.2 + (10.0 - 0.2) * i / 20000.0;
    const double gap = pwl_gap(x, anchors);
    CHECK(gap >= -1e-12);  // tangents of a concave function stay above it
    worst = std::max(worst, gap);
  }
  CHECK(worst <= 0.01);

  // a wider anchor range exceeds the 1% bound; the true worst gap
  // is t - 1 - log t at the cut crossing, about 0.0179
  const auto wide = log_spaced_anchors(0.05, 10.0, 15);
  double worst_wide = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = 0.05 + (10.0 - 0.05) * i / 20000.0;
    worst_wide = std::max(worst_wide, pwl_gap(x, wide));
  }
  CHECK(worst_wide == doctest::Approx(0.01797).epsilon(2e-3));

  CHECK_THROWS_AS(log_spaced_anchors(0.0, 1.0, 5), InvalidArgument);
  CHECK_THROWS_AS(log_spaced_anchors(0.1, 1.0, 1), InvalidArgument);
}

TEST_CASE("built counterpart survives the conic dump round trip") {
  std::mt19937_64 rng(12);
  auto fr = make_random_region(rng, 3, 7);
  rdoe::RdoeConfig cfg;
  cfg.squareness = 4;
  cfg.statuses = {1, -1, 0};
  const auto built = rdoe::build_rdoe_problem(fr, cfg);
  const std::string text = built.problem.dump();
  const auto back = conic::ConicProblem::parse(text);
  CHECK(back.dump() == text);
  const auto r1 = conic::solve(built.problem);
  const auto r2 = conic::solve(back);
  REQUIRE(r1.status == conic::Status::optimal);
  CHECK(r1.objective == r2.objective);
}

TEST_CASE("config validation") {
  auto fr = make_box_region({1.0});
  rdoe::RdoeConfig cfg;
  cfg.squareness = 0;
  CHECK_THROWS_AS(rdoe::build_rdoe_problem(fr, cfg), InvalidArgument);
  cfg.squareness = 17;
  CHECK_THROWS_AS(rdoe::build_rdoe_problem(fr, cfg), InvalidArgument);
  cfg.squareness = 3;
  cfg.eps_md = 0.0;
  CHECK_THROWS_AS(rdoe::build_rdoe_problem(fr, cfg), InvalidArgument);
  cfg.eps_md = 1e3;
  cfg.statuses = {1, -1};  // wrong length for v = 1
  CHECK_THROWS_AS(rdoe::build_rdoe_problem(fr, cfg), InvalidArgument);
  cfg.statuses = {1};
  cfg.pwl_anchors = std::vector<double>{2.0, 1.0};
  CHECK_THROWS_AS(rdoe::build_rdoe_problem(fr, cfg), InvalidArgument);
  cfg.pwl_anchors = std::vector<double>{1.0};
  CHECK_THROWS_AS(rdoe::build_rdoe_problem(fr, cfg), InvalidArgument);
}
