// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "envforge/conic.hpp"
#include "envforge/errors.hpp"

using namespace envforge::conic;
using envforge::InvalidArgument;

namespace {

// brute-force LP oracle: enumerate all row-triple intersections of a 3-D
// polytope, keep the feasible ones, take the best vertex
double lp3_vertex_oracle(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  double best = -1e300;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = j + 1; k < m; ++k) {
        Eigen::Matrix3d M;
        M.row(0) = A.row(i);
        M.row(1) = A.row(j);
        M.row(2) = A.row(k);
        if (std::fabs(M.determinant()) < 1e-9) continue;
        Eigen::Vector3d rhs(b[i], b[j], b[k]);
        Eigen::Vector3d x = M.fullPivLu().solve(rhs);
        if (((A * x - b).array() <= 1e-8).all()) best = std::max(best, c.dot(x));
      }
  return best;
}

struct RandomSocp {
  ConicProblem prob;
  int n = 0;
  std::vector<Eigen::MatrixXd> cone_A;
  std::vector<Eigen::VectorXd> cone_b;
  std::vector<Eigen::VectorXd> cone_c;
  std::vector<double> cone_d;
  Eigen::VectorXd obj;

  bool feasible(const Eigen::VectorXd& x, double tol = 0.0) const {
    if ((x.array() < -1.0 - tol).any() || (x.array() > 1.0 + tol).any()) return false;
    for (std::size_t k = 0; k < cone_A.size(); ++k) {
      const double lhs = (cone_A[k] * x + cone_b[k]).norm();
      const double rhs = cone_c[k].dot(x) + cone_d[k];
      if (lhs > rhs + tol) return false;
    }
    return true;
  }
  double objective(const Eigen::VectorXd& x) const { return obj.dot(x); }
};

// min obj'x over the unit box intersected with random SOCs kept strictly
// feasible at the origin
RandomSocp make_random_socp(std::mt19937_64& rng, int n, int n_cones) {
  std::normal_distribution<double> N(0.0, 1.0);
  RandomSocp s;
  s.n = n;
  const int xs = s.prob.add_variables("x", n, -1.0, 1.0);
  s.obj.resize(n);
  std::vector<LinearTerm> obj_terms;
  for (int i = 0; i < n; ++i) {
    s.obj[i] = N(rng);
    obj_terms.push_back({xs + i, s.obj[i]});
  }
  s.prob.set_objective(Sense::minimize, obj_terms);

  for (int k = 0; k < n_cones; ++k) {
    const int rows = 1 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd A(rows, n);
    Eigen::VectorXd b(rows), c(n);
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < n; ++j) A(r, j) = 0.6 * N(rng);
      b[r] = 0.3 * N(rng);
    }
    for (int j = 0; j < n; ++j) c[j] = 0.2 * N(rng);
    const double d = b.norm() + 0.7 + std::fabs(N(rng));  // strictly feasible at 0
    s.cone_A.push_back(A);
    s.cone_b.push_back(b);
    s.cone_c.push_back(c);
    s.cone_d.push_back(d);

    ConeBlock block;
    AffineExpr e0;
    for (int j = 0; j < n; ++j)
      if (c[j] != 0.0) e0.terms.push_back({xs + j, c[j]});
    e0.constant = d;
    block.entries.push_back(e0);
    for (int r = 0; r < rows; ++r) {
      AffineExpr er;
      for (int j = 0; j < n; ++j)
        if (A(r, j) != 0.0) er.terms.push_back({xs + j, A(r, j)});
      er.constant = b[r];
      block.entries.push_back(er);
    }
    s.prob.add_soc(block);
  }
  return s;
}

// derivative-free oracle: best random feasible point polished by shrinking
// line searches along random directions
double socp_search_oracle(const RandomSocp& s, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::VectorXd best = Eigen::VectorXd::Zero(s.n);
  double best_obj = s.objective(best);
  for (int t = 0; t < 4000; ++t) {
    Eigen::VectorXd x(s.n);
    for (int i = 0; i < s.n; ++i) x[i] = U(rng);
    if (s.feasible(x) && s.objective(x) < best_obj) {
      best = x;
      best_obj = s.objective(x);
    }
  }
  auto try_direction = [&](const Eigen::VectorXd& dir) {
    double step = 1.0;
    while (step > 1e-9) {
      Eigen::VectorXd cand = best + step * dir;
      if (s.feasible(cand) && s.objective(cand) < best_obj - 1e-13) {
        best = cand;
        best_obj = s.objective(cand);
      } else {
        step *= 0.5;
      }
    }
  };
  const Eigen::VectorXd steepest = -s.obj.normalized();
  for (int round = 0; round < 4000; ++round) {
    try_direction(steepest);
    for (int i = 0; i < s.n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(s.n);
      e[i] = 1.0;
      try_direction(e);
      try_direction(-e);
    }
    Eigen::VectorXd dir(s.n);
    for (int i = 0; i < s.n; ++i) dir[i] = N(rng);
    dir.normalize();
    if (s.obj.dot(dir) > 0) dir = -dir;
    try_direction(dir);
    // lateral drift to slide along a curved boundary
    Eigen::VectorXd lat(s.n);
    for (int i = 0; i < s.n; ++i) lat[i] = N(rng);
    lat -= lat.dot(s.obj) / s.obj.squaredNorm() * s.obj;
    if (lat.norm() > 1e-12) {
      lat.normalize();
      Eigen::VectorXd cand = best + 0.01 * lat;
      if (s.feasible(cand) && s.objective(cand) <= best_obj + 1e-12) {
        const double keep = best_obj;
        best = cand;
        best_obj = s.objective(cand);
        best_obj = std::min(best_obj, keep);
      }
    }
  }
  return best_obj;
}

}  // namespace

TEST_CASE("validate rejects malformed problems") {
  ConicProblem p;
  p.add_variable("x");
  p.set_objective(Sense::minimize, {{3, 1.0}});
  CHECK_THROWS_AS(p.validate(), InvalidArgument);

  ConicProblem q;
  q.add_variable("x");
  q.set_objective(Sense::minimize, {{0, std::numeric_limits<double>::quiet_NaN()}});
  CHECK_THROWS_AS(q.validate(), InvalidArgument);

  ConicProblem r;
  CHECK_THROWS_AS(r.add_variable("x", 2.0, 1.0), InvalidArgument);
}

TEST_CASE("LP basics") {
  {
    ConicProblem p;
    int x = p.add_variable("x");
    p.set_objective(Sense::maximize, {{x, 1.0}});
    p.add_row({{x, 1.0}}, Relation::le, 3.0);
    auto r = solve_lp(p);
    REQUIRE(r.status == Status::optimal);
    CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-7));
  }
  {
    // max p1 + p2 over the unit box
    ConicProblem p;
    int v = p.add_variables("p", 2, -1.0, 1.0);
    p.set_objective(Sense::maximize, {{v, 1.0}, {v + 1, 1.0}});
    auto r = solve_lp(p);
    REQUIRE(r.status == Status::optimal);
    CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-7));
  }
  {
    // infeasible pair
    ConicProblem p;
    int x = p.add_variable("x");
    p.set_objective(Sense::maximize, {{x, 1.0}});
    p.add_row({{x, 1.0}}, Relation::le, 0.0);
    p.add_row({{x, -1.0}}, Relation::le, -1.0);
    CHECK(solve_lp(p).status == Status::infeasible);
  }
  {
    // unbounded
    ConicProblem p;
    int x = p.add_variable("x", 0.0);
    p.set_objective(Sense::maximize, {{x, 1.0}});
    CHECK(solve_lp(p).status == Status::unbounded);
  }
}

TEST_CASE("solve_lp rejects cone blocks") {
  ConicProblem p;
  int x = p.add_variable("x");
  p.set_objective(Sense::minimize, {{x, 1.0}});
  ConeBlock cb;
  cb.entries.push_back({{{x, 1.0}}, 0.0});
  cb.entries.push_back({{}, 1.0});
  p.add_soc(cb);
  CHECK_THROWS_AS(solve_lp(p), InvalidArgument);
}

TEST_CASE("random 3-D polytopes match vertex enumeration") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int extra = 4 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd A(6 + extra, 3);
    Eigen::VectorXd b(6 + extra);
    // box [-1,1]^3 plus random cuts with positive margin at 0
    A.setZero();
    for (int i = 0; i < 3; ++i) {
      A(2 * i, i) = 1.0;
      b[2 * i] = 1.0;
      A(2 * i + 1, i) = -1.0;
      b[2 * i + 1] = 1.0;
    }
    for (int r = 6; r < 6 + extra; ++r) {
      for (int j = 0; j < 3; ++j) A(r, j) = N(rng);
      b[r] = 0.2 + std::fabs(N(rng));
    }
    Eigen::VectorXd c(3);
    for (int j = 0; j < 3; ++j) c[j] = N(rng);

    ConicProblem p;
    const int xs = p.add_variables("x", 3);
    std::vector<LinearTerm> obj;
    for (int j = 0; j < 3; ++j) obj.push_back({xs + j, c[j]});
    p.set_objective(Sense::maximize, obj);
    for (int r = 0; r < A.rows(); ++r)
      p.add_row({{xs, A(r, 0)}, {xs + 1, A(r, 1)}, {xs + 2, A(r, 2)}}, Relation::le, b[r]);

    const auto rep = solve_lp(p);
    REQUIRE(rep.status == Status::optimal);
    const double oracle = lp3_vertex_oracle(A, b, c);
    CHECK(rep.objective == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("SOC basics") {
  {
    // min t s.t. ||(3,4)|| <= t
    ConicProblem p;
    int t = p.add_variable("t");
    p.set_objective(Sense::minimize, {{t, 1.0}});
    ConeBlock cb;
    cb.entries.push_back({{{t, 1.0}}, 0.0});
    cb.entries.push_back({{}, 3.0});
    cb.entries.push_back({{}, 4.0});
    p.add_soc(cb);
    auto r = solve(p);
    REQUIRE(r.status == Status::optimal);
    CHECK(r.objective == doctest::Approx(5.0).epsilon(1e-7));
  }
  {
    // equality rows + cone: max x s.t. x^2 <= 4yz, y = z = 1
    ConicProblem p;
    int x = p.add_variable("x");
    int y = p.add_variable("y", 0.0);
    int z = p.add_variable("z", 0.0);
    p.set_objective(Sense::maximize, {{x, 1.0}});
    p.add_row({{y, 1.0}}, Relation::eq, 1.0);
    p.add_row({{z, 1.0}}, Relation::eq, 1.0);
    ConeBlock cb;
    cb.entries.push_back({{{y, 1.0}, {z, 1.0}}, 0.0});
    cb.entries.push_back({{{x, 1.0}}, 0.0});
    cb.entries.push_back({{{y, 1.0}, {z, -1.0}}, 0.0});
    p.add_soc(cb);
    auto r = solve(p);
    REQUIRE(r.status == Status::optimal);
    CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-7));
  }
}

TEST_CASE("randomized SOCPs against the search oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);  // 2..4
    RandomSocp s = make_random_socp(rng, n, 1 + static_cast<int>(rng() % 3));
    const auto rep = solve(s.prob);
    REQUIRE(rep.status == Status::optimal);

    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = rep.x[i];
    CHECK(s.feasible(x, 1e-6));

    const double oracle = socp_search_oracle(s, rng);
    // the oracle visits only feasible points, so it upper-bounds the optimum
    CHECK(rep.objective <= oracle + 1e-6);
    CHECK(std::fabs(rep.objective - oracle) <= 1e-3 * (1.0 + std::fabs(oracle)));
  }
}

TEST_CASE("determinism: identical problem and options, identical output") {
  std::mt19937_64 rng(5);
  RandomSocp s1 = make_random_socp(rng, 3, 2);
  auto r1 = solve(s1.prob);
  auto r2 = solve(s1.prob);
  CHECK(r1.status == r2.status);
  CHECK(r1.objective == r2.objective);
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("backend substitutability: two tolerance settings agree") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    RandomSocp s = make_random_socp(rng, 3, 2);
    SolveOptions loose;
    loose.backend = "ipm";
    SolveOptions strict;
    strict.backend = "ipm-strict";
    auto r1 = solve(s.prob, loose);
    auto r2 = solve(s.prob, strict);
    REQUIRE(r1.status == Status::optimal);
    REQUIRE(r2.status == Status::optimal);
    CHECK(std::fabs(r1.objective - r2.objective) <= 1e-5 * (1.0 + std::fabs(r1.objective)));
  }
  CHECK_THROWS_AS(solve(make_random_socp(rng, 2, 1).prob, [] {
                    SolveOptions o;
                    o.backend = "no-such-backend";
                    return o;
                  }()),
                  InvalidArgument);
}

TEST_CASE("dump/parse round trip") {
  std::mt19937_64 rng(13);
  RandomSocp s = make_random_socp(rng, 3, 2);
  s.prob.add_row({{0, 0.25}}, Relation::eq, 0.125, "a label with spaces");
  const std::string text = s.prob.dump();
  ConicProblem back = ConicProblem::parse(text);
  CHECK(back.dump() == text);

  auto r1 = solve(s.prob);
  auto r2 = solve(back);
  REQUIRE(r1.status == Status::optimal);
  CHECK(r1.objective == r2.objective);
  CHECK(back.rows().back().label == "a label with spaces");
  CHECK(back.variables()[0].lb == -1.0);
}

TEST_CASE("convexity sanity: perturbed start, same objective") {
  std::mt19937_64 rng(31);
  RandomSocp s = make_random_socp(rng, 4, 2);
  SolveOptions base;
  SolveOptions shifted;
  shifted.init_perturbation = 0.37;
  auto r1 = solve(s.prob, base);
  auto r2 = solve(s.prob, shifted);
  REQUIRE(r1.status == Status::optimal);
  REQUIRE(r2.status == Status::optimal);
  CHECK(std::fabs(r1.objective - r2.objective) <= 1e-6 * (1.0 + std::fabs(r1.objective)));
}
