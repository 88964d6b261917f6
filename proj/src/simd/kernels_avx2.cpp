#include "cvp/simd/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define CVP_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#endif

namespace cvp::simd::detail {

#if CVP_HAVE_AVX2_KERNELS
namespace {

// Only "avx2" is enabled, never "fma": products and sums must round separately.
__attribute__((target("avx2"))) double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  const __m128d lo = _mm256_castpd256_pd128(acc);     // lane0, lane1
  const __m128d hi = _mm256_extractf128_pd(acc, 1);   // lane2, lane3
  const __m128d pair = _mm_add_pd(lo, hi);            // lane0+lane2, lane1+lane3
  double sum = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
  for (std::size_t i = body; i < n; ++i) sum = sum + a[i] * b[i];
  return sum;
}

__attribute__((target("avx2"))) void add_avx2(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), _mm256_loadu_pd(src + i)));
  }
  for (; i < n; ++i) dst[i] += src[i];
}

__attribute__((target("avx2"))) void sub_avx2(double* dst, const double* a, const double* b,
                                              std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) dst[i] = a[i] - b[i];
}

__attribute__((target("avx2"))) void divide_avx2(double* dst, double divisor, std::size_t n) {
  const __m256d d = _mm256_set1_pd(divisor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_div_pd(_mm256_loadu_pd(dst + i), d));
  }
  for (; i < n; ++i) dst[i] /= divisor;
}

__attribute__((target("avx2"))) void widen_avx2(double* dst, const float* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_cvtps_pd(_mm_loadu_ps(src + i)));
  }
  for (; i < n; ++i) dst[i] = static_cast<double>(src[i]);
}

const KernelTable avx2{Isa::Avx2, dot_avx2, add_avx2, sub_avx2, divide_avx2, widen_avx2};

}  // namespace

const KernelTable* avx2_table() { return &avx2; }

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
}

#else

const KernelTable* avx2_table() { return nullptr; }
bool cpu_has_avx2() { return false; }

#endif

}  // namespace cvp::simd::detail
