#include <cstdlib>
#include <string>

#include "cvp/error.hpp"
#include "cvp/simd/kernels.hpp"

namespace cvp::simd {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &detail::scalar_table;
    case Isa::Avx2:
      return detail::cpu_has_avx2() ? detail::avx2_table() : nullptr;
    case Isa::Neon:
      return detail::neon_table();  // NEON is baseline on aarch64
  }
  return nullptr;
}

std::vector<Isa> available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (table_for(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

namespace {

const KernelTable& resolve() {
  if (const char* forced = std::getenv("CVP_SIMD"); forced != nullptr && *forced != '\0') {
    const std::string name(forced);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (name == to_string(isa)) {
        if (const KernelTable* table = table_for(isa)) return *table;
        break;
      }
    }
    // Unknown or unsupported request: fall back to the reference kernels.
    return detail::scalar_table;
  }
  const std::vector<Isa> isas = available();
  return *table_for(isas.back());
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = resolve();
  return table;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dot of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  return active().dot(a.data(), b.data(), a.size());
}

}  // namespace cvp::simd
