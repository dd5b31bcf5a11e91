// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace envforge::kernels {

// Vector micro-kernels used by the interior-point solver and the polyhedron
// evaluators. Every entry has a scalar reference implementation and an AVX2
// variant; the active table is picked once at startup from CPUID (override
// with ENVFORGE_SIMD=scalar|avx2|auto or force_isa()).
struct Ops {
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scal)(double a, double* x, std::size_t n);
  double (*nrm2sq)(const double* x, std::size_t n);
  double (*nrm_inf)(const double* x, std::size_t n);
  // out = x .* y
  void (*ew_mul)(const double* x, const double* y, double* out, std::size_t n);
  // out = x ./ y
  void (*ew_div)(const double* x, const double* y, double* out, std::size_t n);
  // w = sqrt(s ./ z)   (Nesterov-Todd scaling of the nonnegative cone)
  void (*ew_sqrt_ratio)(const double* s, const double* z, double* w, std::size_t n);
  // largest step a with s + a*ds >= 0; +inf when no component binds
  double (*step_to_boundary)(const double* s, const double* ds, std::size_t n);
  // y = a*x1 + b*x2
  void (*combine2)(double a, const double* x1, double b, const double* x2, double* y,
                   std::size_t n);
};

enum class Isa { scalar, avx2 };

const Ops& ops();
Isa active_isa();
std::string isa_name();
bool avx2_available();
// Test hook; no-op when the requested ISA is unavailable (falls back to scalar).
void force_isa(Isa isa);

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when this build has no AVX2 translation unit

inline double dot(const double* x, const double* y, std::size_t n) { return ops().dot(x, y, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { ops().axpy(a, x, y, n); }
inline void scal(double a, double* x, std::size_t n) { ops().scal(a, x, n); }
inline double nrm2sq(const double* x, std::size_t n) { return ops().nrm2sq(x, n); }
inline double nrm_inf(const double* x, std::size_t n) { return ops().nrm_inf(x, n); }
inline void ew_mul(const double* x, const double* y, double* o, std::size_t n) {
  ops().ew_mul(x, y, o, n);
}
inline void ew_div(const double* x, const double* y, double* o, std::size_t n) {
  ops().ew_div(x, y, o, n);
}
inline void ew_sqrt_ratio(const double* s, const double* z, double* w, std::size_t n) {
  ops().ew_sqrt_ratio(s, z, w, n);
}
inline double step_to_boundary(const double* s, const double* ds, std::size_t n) {
  return ops().step_to_boundary(s, ds, n);
}
inline void combine2(double a, const double* x1, double b, const double* x2, double* y,
                     std::size_t n) {
  ops().combine2(a, x1, b, x2, y, n);
}

}  // namespace envforge::kernels
