#pragma once

// Inner-loop kernels for the embedding geometry.
//
// Every variant computes bit-identical results. The dot product is defined by
// a canonical order: four interleaved lane accumulators over the largest
// multiple-of-four prefix (lane j owns indices i with i % 4 == j, accumulated
// in increasing i), reduced as (lane0 + lane2) + (lane1 + lane3), followed by
// the remaining tail products added sequentially. The scalar variant spells
// this order out; the AVX2 and NEON variants reproduce it with vector
// registers. Element-wise kernels are trivially order-free.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cvp::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // dst[i] += src[i]
  void (*add)(double* dst, const double* src, std::size_t n);
  // dst[i] = a[i] - b[i]
  void (*sub)(double* dst, const double* a, const double* b, std::size_t n);
  // dst[i] /= divisor
  void (*divide)(double* dst, double divisor, std::size_t n);
  // dst[i] = double(src[i])
  void (*widen)(double* dst, const float* src, std::size_t n);
};

// Kernels selected for this process: the best variant the CPU supports, unless
// the CVP_SIMD environment variable names another one ("scalar", "avx2",
// "neon"). Resolved once.
const KernelTable& active();

// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable* table_for(Isa isa);

// Variants usable on this machine, scalar first.
std::vector<Isa> available();

// Convenience wrappers over active().
double dot(std::span<const double> a, std::span<const double> b);

namespace detail {
extern const KernelTable scalar_table;
const KernelTable* avx2_table();  // nullptr unless compiled for x86-64
const KernelTable* neon_table();  // nullptr unless compiled for aarch64
bool cpu_has_avx2();
}  // namespace detail

}  // namespace cvp::simd
