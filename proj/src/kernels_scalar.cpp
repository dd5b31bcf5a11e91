// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>

#include "envforge/kernels.hpp"

namespace envforge::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double nrm2sq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double nrm_inf_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void ew_mul_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void ew_div_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] / y[i];
}

void ew_sqrt_ratio_scalar(const double* s, const double* z, double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) w[i] = std::sqrt(s[i] / z[i]);
}

double step_to_boundary_scalar(const double* s, const double* ds, std::size_t n) {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (ds[i] < 0.0) a = std::min(a, -s[i] / ds[i]);
  }
  return a;
}

void combine2_scalar(double a, const double* x1, double b, const double* x2, double* y,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x1[i] + b * x2[i];
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      dot_scalar,        axpy_scalar,    scal_scalar,
      nrm2sq_scalar,     nrm_inf_scalar, ew_mul_scalar,
      ew_div_scalar,     ew_sqrt_ratio_scalar,
      step_to_boundary_scalar, combine2_scalar,
  };
  return table;
}

}  // namespace envforge::kernels
