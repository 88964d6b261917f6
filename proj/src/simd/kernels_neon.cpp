#include "cvp/simd/kernels.hpp"

#if defined(__aarch64__)
#define CVP_HAVE_NEON_KERNELS 1
#include <arm_neon.h>
#endif

namespace cvp::simd::detail {

#if CVP_HAVE_NEON_KERNELS
namespace {

// Two float64x2 registers stand in for the four canonical lanes.
double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  const std::size_t body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4) {
    acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  const float64x2_t pair = vaddq_f64(acc01, acc23);
  double sum = vgetq_lane_f64(pair, 0) + vgetq_lane_f64(pair, 1);
  for (std::size_t i = body; i < n; ++i) sum = sum + a[i] * b[i];
  return sum;
}

void add_neon(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), vld1q_f64(src + i)));
  for (; i < n; ++i) dst[i] += src[i];
}

void sub_neon(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void divide_neon(double* dst, double divisor, std::size_t n) {
  const float64x2_t d = vdupq_n_f64(divisor);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, vdivq_f64(vld1q_f64(dst + i), d));
  for (; i < n; ++i) dst[i] /= divisor;
}

void widen_neon(double* dst, const float* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, vcvt_f64_f32(vld1_f32(src + i)));
  for (; i < n; ++i) dst[i] = static_cast<double>(src[i]);
}

const KernelTable neon{Isa::Neon, dot_neon, add_neon, sub_neon, divide_neon, widen_neon};

}  // namespace

const KernelTable* neon_table() { return &neon; }

#else

const KernelTable* neon_table() { return nullptr; }

#endif

}  // namespace cvp::simd::detail
