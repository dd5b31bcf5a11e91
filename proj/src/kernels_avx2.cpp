// SPDX-License-Identifier: Apache-2.0
// Built with -mavx2 -mfma; callers must check avx2_available() before using
// this table (the dispatcher does).
#include "envforge/kernels.hpp"

#if defined(ENVFORGE_HAVE_AVX2_TU)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace envforge::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_avx2(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double nrm2sq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double nrm_inf_avx2(const double* x, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    m = _mm256_max_pd(m, _mm256_andnot_pd(signmask, _mm256_loadu_pd(x + i)));
  __m128d lo = _mm256_castpd256_pd128(m);
  __m128d hi = _mm256_extractf128_pd(m, 1);
  lo = _mm_max_pd(lo, hi);
  double r = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) r = std::max(r, std::fabs(x[i]));
  return r;
}

void ew_mul_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void ew_div_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] / y[i];
}

void ew_sqrt_ratio_avx2(const double* s, const double* z, double* w, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        w + i, _mm256_sqrt_pd(_mm256_div_pd(_mm256_loadu_pd(s + i), _mm256_loadu_pd(z + i))));
  for (; i < n; ++i) w[i] = std::sqrt(s[i] / z[i]);
}

double step_to_boundary_avx2(const double* s, const double* ds, std::size_t n) {
  // min over {ds_i < 0} of -s_i/ds_i, computed as a masked min of the ratios
  const __m256d zero = _mm256_setzero_pd();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d amin = inf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vds = _mm256_loadu_pd(ds + i);
    __m256d vs = _mm256_loadu_pd(s + i);
    __m256d neg = _mm256_cmp_pd(vds, zero, _CMP_LT_OQ);
    __m256d ratio = _mm256_div_pd(_mm256_sub_pd(zero, vs), vds);
    ratio = _mm256_blendv_pd(inf, ratio, neg);
    amin = _mm256_min_pd(amin, ratio);
  }
  __m128d lo = _mm256_castpd256_pd128(amin);
  __m128d hi = _mm256_extractf128_pd(amin, 1);
  lo = _mm_min_pd(lo, hi);
  double a = _mm_cvtsd_f64(_mm_min_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) {
    if (ds[i] < 0.0) a = std::min(a, -s[i] / ds[i]);
  }
  return a;
}

void combine2_avx2(double a, const double* x1, double b, const double* x2, double* y,
                   std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_mul_pd(va, _mm256_loadu_pd(x1 + i));
    v = _mm256_fmadd_pd(vb, _mm256_loadu_pd(x2 + i), v);
    _mm256_storeu_pd(y + i, v);
  }
  for (; i < n; ++i) y[i] = a * x1[i] + b * x2[i];
}

const Ops avx2_table = {
    dot_avx2,        axpy_avx2,    scal_avx2,
    nrm2sq_avx2,     nrm_inf_avx2, ew_mul_avx2,
    ew_div_avx2,     ew_sqrt_ratio_avx2,
    step_to_boundary_avx2, combine2_avx2,
};

}  // namespace

const Ops* avx2_ops() { return &avx2_table; }

}  // namespace envforge::kernels

#else

namespace envforge::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace envforge::kernels

#endif
