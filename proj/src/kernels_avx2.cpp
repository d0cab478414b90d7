// AVX2+FMA kernel variants.  This translation unit is the only one built
// with -mavx2 -mfma; callers reach it through the dispatch table after a
// runtime CPU check.  Lane structure mirrors the scalar reference exactly:
// four accumulator lanes combined ((l0+l2)+(l1+l3)) plus a scalar fma tail,
// so results are bit-identical to the scalar kernels.

#include "kernels_detail.hpp"

#if QBAG_BUILD_AVX2

#include <immintrin.h>

#include <cmath>

namespace qbag::kernels::detail {
namespace {

double horizontal_sum(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);    // [l0, l1]
  const __m128d hi = _mm256_extractf128_pd(acc, 1);  // [l2, l3]
  const __m128d s = _mm_add_pd(lo, hi);              // [l0+l2, l1+l3]
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t main = n & ~std::size_t(3);
  for (std::size_t i = 0; i < main; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double tail = 0.0;
  for (std::size_t i = main; i < n; ++i) tail = std::fma(a[i], b[i], tail);
  return horizontal_sum(acc) + tail;
}

double squared_l2_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t main = n & ~std::size_t(3);
  for (std::size_t i = 0; i < main; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double tail = 0.0;
  for (std::size_t i = main; i < n; ++i) {
    const double d = a[i] - b[i];
    tail = std::fma(d, d, tail);
  }
  return horizontal_sum(acc) + tail;
}

void add_inplace_avx2(double* acc, const double* x, std::size_t n) {
  const std::size_t main = n & ~std::size_t(3);
  for (std::size_t i = 0; i < main; i += 4) {
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
  }
  for (std::size_t i = main; i < n; ++i) acc[i] += x[i];
}

void scale_inplace_avx2(double* x, double factor, std::size_t n) {
  const __m256d f = _mm256_set1_pd(factor);
  const std::size_t main = n & ~std::size_t(3);
  for (std::size_t i = 0; i < main; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), f));
  }
  for (std::size_t i = main; i < n; ++i) x[i] *= factor;
}

}  // namespace

Table avx2_table() {
  return {dot_avx2, squared_l2_avx2, add_inplace_avx2, scale_inplace_avx2};
}

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace qbag::kernels::detail

#endif  // QBAG_BUILD_AVX2
