#include "spfactor/kernels.hpp"

// AVX2+FMA lane. Compiled with -mavx2 -mfma on x86-64; on other targets (or
// when the flags are unavailable) this translation unit only provides the
// null table.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace spfactor::kernels::detail {
namespace {

// Vectorized double-precision exp, Cephes-style rational approximation after
// Cody-Waite range reduction. Accurate to ~1 ulp on the reduced interval;
// arguments are clamped to [-708, 708] so the 2^n scaling stays in the normal
// exponent range.
inline __m256d exp4(__m256d x) {
  const __m256d hi = _mm256_set1_pd(708.0);
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(0.693145751953125);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);

  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  // n = floor(x*log2(e) + 0.5); r = x - n*ln2 split into two constants.
  __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, half));
  __m256d r = _mm256_fnmadd_pd(n, c1, x);
  r = _mm256_fnmadd_pd(n, c2, r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d px = _mm256_fmadd_pd(p0, rr, p1);
  px = _mm256_fmadd_pd(px, rr, p2);
  px = _mm256_mul_pd(px, r);
  __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
  qx = _mm256_fmadd_pd(qx, rr, q2);
  qx = _mm256_fmadd_pd(qx, rr, q3);
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  e = _mm256_fmadd_pd(two, e, one);

  // Scale by 2^n through the exponent bits. n is integral and |n| <= 1022.
  __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  n64 = _mm256_slli_epi64(n64, 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(n64));
}

// Fixed lane-combine order: (acc0+acc2) + (acc1+acc3).
inline double reduce4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

void vexp_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, exp4(_mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = std::exp(x[i]);
}

double poisson_term_sum_avx2(const double* y, const double* loglam,
                             const double* offset, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ll = _mm256_loadu_pd(loglam + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d off = _mm256_loadu_pd(offset + i);
    const __m256d mean = _mm256_mul_pd(off, exp4(ll));
    acc = _mm256_add_pd(acc, _mm256_fmsub_pd(yv, ll, mean));
  }
  double total = reduce4(acc);
  for (; i < n; ++i) {
    total += y[i] * loglam[i] - offset[i] * std::exp(loglam[i]);
  }
  return total;
}

double pairwise_sqdiff_sum_avx2(const std::int32_t* a, const std::int32_t* b,
                                std::size_t nedges, const double* r) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t e = 0;
  for (; e + 4 <= nedges; e += 4) {
    const __m128i ia = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a + e));
    const __m128i ib = _mm_loadu_si128(reinterpret_cast<const __m128i*>(b + e));
    const __m256d ra = _mm256_i32gather_pd(r, ia, 8);
    const __m256d rb = _mm256_i32gather_pd(r, ib, 8);
    const __m256d d = _mm256_sub_pd(ra, rb);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double total = reduce4(acc);
  for (; e < nedges; ++e) {
    const double d = r[a[e]] - r[b[e]];
    total += d * d;
  }
  return total;
}

double pairwise_proddiff_sum_avx2(const std::int32_t* a, const std::int32_t* b,
                                  std::size_t nedges, const double* x,
                                  const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t e = 0;
  for (; e + 4 <= nedges; e += 4) {
    const __m128i ia = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a + e));
    const __m128i ib = _mm_loadu_si128(reinterpret_cast<const __m128i*>(b + e));
    const __m256d dx = _mm256_sub_pd(_mm256_i32gather_pd(x, ia, 8),
                                     _mm256_i32gather_pd(x, ib, 8));
    const __m256d dy = _mm256_sub_pd(_mm256_i32gather_pd(y, ia, 8),
                                     _mm256_i32gather_pd(y, ib, 8));
    acc = _mm256_fmadd_pd(dx, dy, acc);
  }
  double total = reduce4(acc);
  for (; e < nedges; ++e) {
    total += (x[a[e]] - x[b[e]]) * (y[a[e]] - y[b[e]]);
  }
  return total;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double total = reduce4(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  double total = reduce4(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table = {
      vexp_avx2,         poisson_term_sum_avx2,
      pairwise_sqdiff_sum_avx2, pairwise_proddiff_sum_avx2,
      dot_avx2,          sum_avx2,
  };
  return &table;
}

}  // namespace spfactor::kernels::detail

#else  // !(__AVX2__ && __FMA__)

namespace spfactor::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace spfactor::kernels::detail

#endif
