// SPDX-License-Identifier: Apache-2.0
#include "envforge/superellipsoid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "envforge/errors.hpp"

namespace envforge::superellipsoid {

namespace {

void check_valid(const Superellipsoid& s) {
  if (s.center.size() != s.scale.size())
    throw InvalidArgument("superellipsoid: center/scale dimension mismatch");
  if (s.squareness < 1 || s.squareness > kMaxSquareness)
    throw InvalidArgument("superellipsoid: squareness K out of range [1, 16]");
  for (double l : s.scale)
    if (!(l > 0.0)) throw InvalidArgument("superellipsoid: scale entries must be positive");
}

}  // namespace

TowerSpec make_tower(int dim, int squareness) {
  if (dim < 1) throw InvalidArgument("tower: dim must be >= 1");
  if (squareness < 1 || squareness > kMaxSquareness)
    throw InvalidArgument("tower: squareness K out of range [1, 16]");
  TowerSpec t;
  t.squareness = squareness;
  t.dim = dim;
  t.links.reserve(static_cast<std::size_t>(dim) * (squareness - 1));
  for (int k = 1; k <= squareness - 1; ++k)
    for (int i = 0; i < dim; ++i) t.links.push_back({k, i});
  return t;
}

MembershipResult membership(const std::vector<double>& p, const Superellipsoid& s) {
  check_valid(s);
  if (p.size() != s.center.size())
    throw InvalidArgument("superellipsoid membership: point dimension mismatch");
  const double n = std::ldexp(1.0, s.squareness);  // 2^K
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = std::fabs((p[i] - s.center[i]) / s.scale[i]);
    if (w == 0.0) continue;
    // |w|^n via exp(n log w); underflows to 0 for w << 1, overflows to inf
    // for w > 1 at large n, both of which are the right answers here.
    sum += std::exp(n * std::log(w));
    if (std::isinf(sum)) break;
  }
  return {sum <= 1.0, sum};
}

double corner_factor(int active_count, int squareness) {
  if (active_count < 1) throw InvalidArgument("corner_factor: active_count must be >= 1");
  if (squareness < 1 || squareness > kMaxSquareness)
    throw InvalidArgument("corner_factor: squareness K out of range [1, 16]");
  const double n = std::ldexp(1.0, squareness);
  return std::exp(-std::log(static_cast<double>(active_count)) / n);
}

double relative_gap(int active_count, int squareness) {
  return 1.0 - corner_factor(active_count, squareness);
}

InscribedBox inscribed_box(const Superellipsoid& s) {
  check_valid(s);
  const int v = s.dim();
  const double w = corner_factor(v, s.squareness);
  InscribedBox box;
  box.lower.resize(v);
  box.upper.resize(v);
  double vol = 1.0;
  for (int i = 0; i < v; ++i) {
    const double half = s.scale[i] * w;
    box.lower[i] = s.center[i] - half;
    box.upper[i] = s.center[i] + half;
    vol *= 2.0 * half;
  }
  box.volume = vol;
  return box;
}

int select_squareness(int active_count, double theta) {
  if (active_count < 1) throw InvalidArgument("select_squareness: active_count must be >= 1");
  if (!(theta > 0.0 && theta < 1.0))
    throw InvalidArgument("select_squareness: theta must lie in (0, 1)");
  for (int k = 1; k <= kMaxSquareness; ++k) {
    if (relative_gap(active_count, k) <= theta) return k;
  }
  throw InvalidArgument("select_squareness: required K exceeds the cap of 16");
}

}  // namespace envforge::superellipsoid
