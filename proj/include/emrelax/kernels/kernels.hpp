#pragma once

// Data-parallel inner loops shared by the steppers and the band diagnostics.
// Every kernel has a portable scalar reference; vectorized variants are
// selected once at runtime and must agree with the reference to rounding.

#include <cstddef>
#include <string_view>

#include "emrelax/common.hpp"

namespace emrelax::kernels {

/// Size of the per-mode state block (n or rho, u, E, B/H).
inline constexpr std::size_t kBlock = 10;

struct KernelTable {
  const char* name;
  /// y[m] = A[m] x[m] (or y[m] += A[m] x[m]) for row-major 10x10 blocks.
  void (*cmatvec10)(std::size_t modes, const cplx* a, const cplx* x, cplx* y, bool accumulate);
  /// out[band[i]] += w[i] |c[i]|^2, accumulated in index order.
  void (*band_abs2)(std::size_t n, const cplx* c, const double* w, const int* band, double* out);
  /// z[i] = x[i] y[i]
  void (*mul)(std::size_t n, const double* x, const double* y, double* z);
  /// z[i] += x[i] y[i]
  void (*mul_acc)(std::size_t n, const double* x, const double* y, double* z);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// Table in use. Chosen on first call from EMRELAX_SIMD (scalar|avx2|auto,
/// default auto).
const KernelTable& active();

/// Override the active table. Returns false if the request is unavailable.
bool select(std::string_view name);

}  // namespace emrelax::kernels
