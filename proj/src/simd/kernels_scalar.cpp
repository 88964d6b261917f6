#include "cvp/simd/kernels.hpp"

namespace cvp::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4) {
    lane[0] = lane[0] + a[i] * b[i];
    lane[1] = lane[1] + a[i + 1] * b[i + 1];
    lane[2] = lane[2] + a[i + 2] * b[i + 2];
    lane[3] = lane[3] + a[i + 3] * b[i + 3];
  }
  double sum = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  for (std::size_t i = body; i < n; ++i) sum = sum + a[i] * b[i];
  return sum;
}

void add_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

void sub_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void divide_scalar(double* dst, double divisor, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] /= divisor;
}

void widen_scalar(double* dst, const float* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<double>(src[i]);
}

}  // namespace

const KernelTable scalar_table{Isa::Scalar, dot_scalar, add_scalar, sub_scalar, divide_scalar,
                               widen_scalar};

}  // namespace cvp::simd::detail
