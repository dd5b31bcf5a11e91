// SPDX-License-Identifier: Apache-2.0
#include "envforge/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "envforge/errors.hpp"


namespace envforge::validation {

namespace {

// uniform in [0,1) from the raw engine output; keeps draws bit-reproducible
// across standard libraries
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string ViolationReport::summary_json() const {
  std::ostringstream os;
  os << "{\n"
     << "  \"draws\": " << draws << ",\n"
     << "  \"violations\": " << violations << ",\n"
     << "  \"divergences\": " << divergences << ",\n"
     << "  \"max_overshoot_pu\": " << max_overshoot_pu << ",\n"
     << "  \"seed\": " << seed << ",\n"
     << "  \"vmin_pu\": " << vmin_pu << ",\n"
     << "  \"vmax_pu\": " << vmax_pu << "\n"
     << "}\n";
  return os.str();
}

std::string ViolationReport::per_draw_csv() const {
  std::ostringstream os;
  os << "draw,worst_v_pu,location,violated,diverged\n";
  os.precision(12);
  for (const auto& r : records)
    os << r.index << ',' << r.worst_v_pu << ',' << r.location << ',' << (r.violated ? 1 : 0)
       << ',' << (r.diverged ? 1 : 0) << '\n';
  return os.str();
}

ViolationReport monte_carlo_validate(const net::NetworkModel& net,
                                     const EnvelopeAllocation& alloc, int draws,
                                     std::uint64_t seed, const ValidationOptions& options) {
  if (draws < 1) throw InvalidArgument("monte_carlo_validate: draws must be >= 1");
  const auto active = net.active_customer_indices();
  if (alloc.customers.size() != active.size())
    throw InvalidArgument("monte_carlo_validate: allocation does not cover the active customers");
  for (std::size_t j = 0; j < active.size(); ++j)
    if (alloc.customers[j].id != net.customers[active[j]].id)
      throw InvalidArgument("monte_carlo_validate: allocation customer order mismatch at '" +
                            alloc.customers[j].id + "'");

  ViolationReport rep;
  rep.draws = draws;
  rep.seed = seed;
  rep.vmin_pu = net.limits.vmin_pu;
  rep.vmax_pu = net.limits.vmax_pu;
  rep.records.reserve(draws);

  // all samples generated up front: aggregation order cannot affect results
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> samples(draws, std::vector<double>(active.size()));
  for (int d = 0; d < draws; ++d)
    for (std::size_t j = 0; j < active.size(); ++j) {
      const auto& c = alloc.customers[j];
      samples[d][j] = c.lower_kw + (c.upper_kw - c.lower_kw) * unit_uniform(rng);
    }

  std::vector<net::Injection> inj = net::nominal_injections(net);
  const double budget = options.violation_budget_pu;

  for (int d = 0; d < draws; ++d) {
    for (std::size_t j = 0; j < active.size(); ++j) {
      inj[active[j]].p_kw = samples[d][j];
      inj[active[j]].q_kvar =
          j < alloc.q_dispatch_kvar.size() ? alloc.q_dispatch_kvar[j] : 0.0;
    }
    DrawRecord rec;
    rec.index = d;
    try {
      const auto op = net::solve_exact_power_flow(net, inj, options.power_flow);
      double worst_dev = -1e300;
      for (std::size_t b = 0; b < net.buses.size(); ++b)
        for (int ph = 0; ph < 3; ++ph) {
          if (!net.buses[b].phases[ph]) continue;
          const double v = op.magnitude(static_cast<int>(b), static_cast<net::Phase>(ph));
          const double dev = std::max(net.limits.vmin_pu - v, v - net.limits.vmax_pu);
          if (dev > worst_dev) {
            worst_dev = dev;
            rec.worst_v_pu = v;
            rec.location = net.buses[b].id + "." + net::to_string(static_cast<net::Phase>(ph));
          }
        }
      rec.violated = worst_dev > budget;
      if (rec.violated) {
        ++rep.violations;
        rep.max_overshoot_pu = std::max(rep.max_overshoot_pu, worst_dev);
      }
    } catch (const PowerFlowError&) {
      rec.diverged = true;
      ++rep.divergences;
    }
    rep.records.push_back(std::move(rec));
  }
  return rep;
}

CertifyReport certify_box_in_polyhedron(const fr::FeasibleRegion& region,
                                        const EnvelopeAllocation& alloc,
                                        const Eigen::VectorXd& q) {
  const int v = region.active_count();
  const int M = region.rows();
  if (static_cast<int>(alloc.customers.size()) != v)
    throw InvalidArgument("certify: allocation does not match the region");

  Eigen::VectorXd lo(v), hi(v);
  for (int j = 0; j < v; ++j) {
    lo[j] = alloc.customers[j].lower_kw;
    hi[j] = alloc.customers[j].upper_kw;
    if (lo[j] > hi[j] + 1e-9)
      throw InvalidArgument("certify: lower > upper for " + alloc.customers[j].id);
    hi[j] = std::max(hi[j], lo[j]);  // solver-tolerance dust
  }

  CertifyReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();

  // exact: per row, the corner maximizing Gp.x is picked coordinatewise
  const Eigen::VectorXd qterm = region.Gq * q;
  for (int m = 0; m < M; ++m) {
    double worst = qterm[m];
    for (int j = 0; j < v; ++j) worst += std::max(region.Gp(m, j) * lo[j], region.Gp(m, j) * hi[j]);
    const double slack = region.h[m] - worst;
    if (slack < rep.min_slack) {
      rep.min_slack = slack;
      rep.worst_row = region.labels.empty() ? ("row " + std::to_string(m)) : region.labels[m].str();
    }
  }
  rep.checked_points = M;

  if (v <= 10) {
    // exhaustive cross-check over all 2^v vertices
    double min_slack = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x(v);
    for (std::uint64_t mask = 0; mask < (1ull << v); ++mask) {
      for (int j = 0; j < v; ++j) x[j] = (mask >> j & 1) ? hi[j] : lo[j];
      min_slack = std::min(min_slack, (region.slack(x, q)).minCoeff());
    }
    rep.checked_points = 1ll << v;
    rep.min_slack = min_slack;  // equal to the closed form up to roundoff
  }
  return rep;
}

namespace {

// maximize x'y over ||y||_{2^K} <= 1: ascent on the scale-invariant
// objective g(z) = x'z / ||z||_n with backtracking, started at sign(x)
double tower_primal_max(const Eigen::VectorXd& x, int K) {
  const int d = static_cast<int>(x.size());
  const double n = std::ldexp(1.0, K);
  if (x.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;

  auto norm_n = [&](const Eigen::VectorXd& z) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::pow(std::fabs(z[i]), n);
    return std::pow(s, 1.0 / n);
  };
  auto gval = [&](const Eigen::VectorXd& z) { return x.dot(z) / norm_n(z); };

  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
  double g = gval(z);
  for (int it = 0; it < 5000; ++it) {
    const double nz = norm_n(z);
    Eigen::VectorXd grad(d);
    for (int i = 0; i < d; ++i) {
      const double dnorm =
          std::pow(std::fabs(z[i]) / nz, n - 1.0) * (z[i] >= 0.0 ? 1.0 : -1.0);
      grad[i] = x[i] / nz - x.dot(z) / (nz * nz) * dnorm;
    }
    double step = 1.0;
    bool moved = false;
    while (step > 1e-16) {
      const Eigen::VectorXd cand = z + step * grad;
      const double gc = gval(cand);
      if (gc > g + 1e-16) {
        z = cand;
        g = gc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return g;
}

// minimize ||a_{K-1}|| + sum_i x_i^2/(4 a_{1,i}) + sum_k sum_i
// a_{k-1,i}^2/(4 a_{k,i}) over a > 0. Every term is jointly convex
// (quadratic-over-linear plus a norm), and each coordinate minimizer has a
// closed form (cube root) except the top level (monotone 1-D root), so
// cyclic coordinate descent reaches the global minimum.
double tower_dual_min(const Eigen::VectorXd& x, int K) {
  const int d = static_cast<int>(x.size());
  if (K == 1) return x.norm();  // max x'y over the unit ball

  const int L = K - 1;  // chain levels per axis
  std::vector<int> active;
  for (int i = 0; i < d; ++i)
    if (x[i] != 0.0) active.push_back(i);
  if (active.empty()) return 0.0;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, L);
  for (int i : active) {
    a(i, 0) = std::max(std::fabs(x[i]) / 2.0, 1e-8);
    for (int k = 1; k < L; ++k) a(i, k) = a(i, k - 1);
  }

  auto value = [&]() {
    double f = a.col(L - 1).norm();
    for (int i : active) {
      f += x[i] * x[i] / (4.0 * a(i, 0));
      for (int k = 1; k < L; ++k) f += a(i, k - 1) * a(i, k - 1) / (4.0 * a(i, k));
    }
    return f;
  };

  double f = value();
  for (int sweep = 0; sweep < 500; ++sweep) {
    for (int i : active) {
      for (int k = 0; k < L; ++k) {
        const double upstream = k == 0 ? x[i] * x[i] : a(i, k - 1) * a(i, k - 1);
        if (k < L - 1) {
          // min upstream/(4a) + a^2/(4 a_next): a^3 = upstream * a_next / 2
          a(i, k) = std::cbrt(upstream * a(i, k + 1) / 2.0);
        } else {
          // min sqrt(a^2 + R^2) + upstream/(4a): monotone derivative, bisect
          double R2 = 0.0;
          for (int j : active)
            if (j != i) R2 += a(j, L - 1) * a(j, L - 1);
          auto dphi = [&](double t) {
            return t / std::sqrt(t * t + R2) - upstream / (4.0 * t * t);
          };
          double lo = 1e-12, hi = std::max(1.0, std::sqrt(upstream));
          while (dphi(hi) < 0.0) hi *= 2.0;
          for (int b = 0; b < 200; ++b) {
            const double mid = 0.5 * (lo + hi);
            (dphi(mid) < 0.0 ? lo : hi) = mid;
          }
          a(i, L - 1) = 0.5 * (lo + hi);
        }
      }
    }
    const double fnew = value();
    if (f - fnew < 1e-15 * (1.0 + std::fabs(f))) {
      f = fnew;
      break;
    }
    f = fnew;
  }
  return f;
}

}  // namespace

DualGapProbe dual_gap_probe(const Eigen::VectorXd& x, int squareness) {
  if (x.size() < 1 || x.size() > 4)
    throw InvalidArgument("dual_gap_probe: dimension must lie in [1, 4]");
  if (squareness < 1 || squareness > 3)
    throw InvalidArgument("dual_gap_probe: squareness must lie in [1, 3]");
  DualGapProbe p;
  p.primal = tower_primal_max(x, squareness);
  p.dual = tower_dual_min(x, squareness);
  return p;
}

}  // namespace envforge::validation
