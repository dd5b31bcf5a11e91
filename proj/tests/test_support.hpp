// SPDX-License-Identifier: Apache-2.0
// Shared helpers for building synthetic feasible regions and small
// brute-force oracles used across the test suites.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "envforge/feasible_region.hpp"

namespace test_support {

using envforge::fr::FeasibleRegion;
using envforge::fr::RowKind;

// device_half sizes the informational kW limits (and with them the default
// anchor range of the log surrogate); pass the geometric scale of the region
inline FeasibleRegion make_region(const Eigen::MatrixXd& Gp, const Eigen::VectorXd& h,
                                  double q_span = 0.0, double device_half = 10.0) {
  FeasibleRegion fr;
  const int v = static_cast<int>(Gp.cols());
  fr.Gp = Gp;
  fr.Gq = Eigen::MatrixXd::Zero(Gp.rows(), v);
  fr.h = h;
  for (int j = 0; j < v; ++j) fr.active_ids.push_back("c" + std::to_string(j + 1));
  fr.q_lower = Eigen::VectorXd::Constant(v, -q_span);
  fr.q_upper = Eigen::VectorXd::Constant(v, q_span);
  fr.q_base = Eigen::VectorXd::Zero(v);
  fr.p_lower = Eigen::VectorXd::Constant(v, -device_half);
  fr.p_upper = Eigen::VectorXd::Constant(v, device_half);
  fr.labels.resize(Gp.rows());
  for (int r = 0; r < Gp.rows(); ++r)
    fr.labels[r] = {RowKind::v_upper, "r" + std::to_string(r), ""};
  return fr;
}

// |p_i| <= half_i for every axis
inline FeasibleRegion make_box_region(const std::vector<double>& half) {
  const int v = static_cast<int>(half.size());
  Eigen::MatrixXd G(2 * v, v);
  Eigen::VectorXd h(2 * v);
  G.setZero();
  double scale = 0.0;
  for (int j = 0; j < v; ++j) {
    G(2 * j, j) = 1.0;
    h[2 * j] = half[j];
    G(2 * j + 1, j) = -1.0;
    h[2 * j + 1] = half[j];
    scale = std::max(scale, half[j]);
  }
  return make_region(G, h, 0.0, scale);
}

// p_i >= lo, sum p_i <= cap (2-D importer triangle for lo = 0)
inline FeasibleRegion make_triangle_region(int v, double cap, double lo = 0.0) {
  Eigen::MatrixXd G(v + 1, v);
  Eigen::VectorXd h(v + 1);
  G.setZero();
  for (int j = 0; j < v; ++j) {
    G(j, j) = -1.0;
    h[j] = -lo;
  }
  G.row(v).setOnes();
  h[v] = cap;
  return make_region(G, h, 0.0, cap);
}

// tangent rows of the disk ||p|| <= radius
inline FeasibleRegion make_polygon_region(double radius, int sides) {
  Eigen::MatrixXd G(sides, 2);
  Eigen::VectorXd h(sides);
  for (int k = 0; k < sides; ++k) {
    const double ang = 2.0 * M_PI * k / sides;
    G(k, 0) = std::cos(ang);
    G(k, 1) = std::sin(ang);
    h[k] = radius;
  }
  return make_region(G, h, 0.0, radius);
}

// random bounded polytope containing a ball around the origin: unit-normal
// rows with margins in [margin_lo, margin_hi], plus a softened box
inline FeasibleRegion make_random_region(std::mt19937_64& rng, int v, int cuts,
                                         double margin_lo = 1.5, double margin_hi = 4.0,
                                         double box = 6.0) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(margin_lo, margin_hi);
  Eigen::MatrixXd G(cuts + 2 * v, v);
  Eigen::VectorXd h(cuts + 2 * v);
  for (int r = 0; r < cuts; ++r) {
    Eigen::VectorXd g(v);
    do {
      for (int j = 0; j < v; ++j) g[j] = N(rng);
    } while (g.norm() < 1e-6);
    g.normalize();
    G.row(r) = g;
    h[r] = U(rng);
  }
  for (int j = 0; j < v; ++j) {
    G.row(cuts + 2 * j).setZero();
    G(cuts + 2 * j, j) = 1.0;
    h[cuts + 2 * j] = box;
    G.row(cuts + 2 * j + 1).setZero();
    G(cuts + 2 * j + 1, j) = -1.0;
    h[cuts + 2 * j + 1] = box;
  }
  return make_region(G, h, 0.0, box);
}

// 2-D polytope vertices by pairwise row intersection (brute force)
inline std::vector<Eigen::Vector2d> enumerate_vertices_2d(const Eigen::MatrixXd& G,
                                                          const Eigen::VectorXd& h,
                                                          double tol = 1e-7) {
  std::vector<Eigen::Vector2d> verts;
  const int m = static_cast<int>(G.rows());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Eigen::Matrix2d M;
      M.row(0) = G.row(i);
      M.row(1) = G.row(j);
      if (std::fabs(M.determinant()) < 1e-10) continue;
      Eigen::Vector2d x = M.inverse() * Eigen::Vector2d(h[i], h[j]);
      if (((G * x - h).array() <= tol).all()) verts.push_back(x);
    }
  return verts;
}

// set equality of two vertex clouds up to tolerance
inline bool same_vertex_set(std::vector<Eigen::Vector2d> a, std::vector<Eigen::Vector2d> b,
                            double tol = 1e-6) {
  auto covered = [&](const std::vector<Eigen::Vector2d>& from,
                     const std::vector<Eigen::Vector2d>& in) {
    for (const auto& x : from) {
      bool found = false;
      for (const auto& y : in)
        if ((x - y).norm() <= tol) {
          found = true;
          break;
        }
      if (!found) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

}  // namespace test_support
