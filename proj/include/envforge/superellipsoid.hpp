// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace envforge::superellipsoid {

// Axis-aligned superellipsoid {L*w + u_c : ||w||_n^n <= 1} with n = 2^K and
// diagonal positive scale L. Approaches the box [u_c - L, u_c + L] as K grows.
struct Superellipsoid {
  std::vector<double> center;   // u_c, kW
  std::vector<double> scale;    // diag(L), kW, all > 0
  int squareness = 1;           // K >= 1, n = 2^K

  int dim() const { return static_cast<int>(center.size()); }
};

struct MembershipResult {
  bool inside;    // sum <= 1
  double margin;  // sum_i |(p_i - u_c_i)/L_ii|^n
};

// One scalar quadratic link y_{k,i}^2 <= y_{k+1,i} of the tower.
struct TowerLink {
  int level;  // k, 1-based; links exist for k = 1 .. K-1
  int axis;   // i
};

// SOC-representable description of the 2^K-norm unit ball: a chain of scalar
// squaring links ending in a Euclidean ball ||y_K||_2 <= 1. Holds
// dim*(K-1) + 1 quadratic constraints in total (the terminal ball counted
// once).
struct TowerSpec {
  int squareness = 1;  // K
  int dim = 1;         // m
  std::vector<TowerLink> links;

  std::size_t quadratic_constraint_count() const { return links.size() + 1; }
};

TowerSpec make_tower(int dim, int squareness);

// Evaluates sum_i |(p_i-u_c_i)/L_ii|^(2^K); stable for K up to the cap (goes
// through exp/log so 2^16-th powers neither overflow nor flush prematurely).
MembershipResult membership(const std::vector<double>& p, const Superellipsoid& s);

// w* = v^(-1/2^K): per-axis half-width multiplier of the largest inscribed
// axis-aligned box (all of whose vertices lie on the superellipsoid surface).
double corner_factor(int active_count, int squareness);

// 1 - v^(-1/2^K), the relative total-DOE gap versus the K -> inf box ceiling.
double relative_gap(int active_count, int squareness);

struct InscribedBox {
  std::vector<double> lower;
  std::vector<double> upper;
  double volume;
};

InscribedBox inscribed_box(const Superellipsoid& s);

inline constexpr int kMaxSquareness = 16;

// Smallest K >= 1 with relative_gap(v, K) <= theta. Throws when the required
// K would exceed kMaxSquareness (the 2^16-norm is already indistinguishable
// from the max-norm in double precision).
int select_squareness(int active_count, double theta);

}  // namespace envforge::superellipsoid
