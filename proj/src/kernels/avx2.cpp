#include <immintrin.h>

#include "emrelax/kernels/kernels.hpp"

namespace emrelax::kernels {

namespace {

// Two interleaved complex numbers per register: [re0, im0, re1, im1].
inline __m256d cmul2(__m256d a, __m256d x) {
  const __m256d a_re = _mm256_movedup_pd(a);
  const __m256d a_im = _mm256_permute_pd(a, 0xF);
  const __m256d x_sw = _mm256_permute_pd(x, 0x5);
  return _mm256_fmaddsub_pd(a_re, x, _mm256_mul_pd(a_im, x_sw));
}

void cmatvec10_avx2(std::size_t modes, const cplx* a, const cplx* x, cplx* y, bool accumulate) {
  for (std::size_t m = 0; m < modes; ++m) {
    const double* am = reinterpret_cast<const double*>(a + m * kBlock * kBlock);
    const double* xm = reinterpret_cast<const double*>(x + m * kBlock);
    double* ym = reinterpret_cast<double*>(y + m * kBlock);
    const __m256d x0 = _mm256_loadu_pd(xm);
    const __m256d x1 = _mm256_loadu_pd(xm + 4);
    const __m256d x2 = _mm256_loadu_pd(xm + 8);
    const __m256d x3 = _mm256_loadu_pd(xm + 12);
    const __m256d x4 = _mm256_loadu_pd(xm + 16);
    for (std::size_t r = 0; r < kBlock; ++r) {
      const double* row = am + 2 * kBlock * r;
      __m256d acc = cmul2(_mm256_loadu_pd(row), x0);
      acc = _mm256_add_pd(acc, cmul2(_mm256_loadu_pd(row + 4), x1));
      acc = _mm256_add_pd(acc, cmul2(_mm256_loadu_pd(row + 8), x2));
      acc = _mm256_add_pd(acc, cmul2(_mm256_loadu_pd(row + 12), x3));
      acc = _mm256_add_pd(acc, cmul2(_mm256_loadu_pd(row + 16), x4));
      __m128d s = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
      if (accumulate) s = _mm_add_pd(s, _mm_loadu_pd(ym + 2 * r));
      _mm_storeu_pd(ym + 2 * r, s);
    }
  }
}

void band_abs2_avx2(std::size_t n, const cplx* c, const double* w, const int* band, double* out) {
  const double* cd = reinterpret_cast<const double*>(c);
  alignas(32) double e[4];
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // |c|^2 for four coefficients: square, then add adjacent re/im pairs.
    const __m256d p0 = _mm256_loadu_pd(cd + 2 * i);
    const __m256d p1 = _mm256_loadu_pd(cd + 2 * i + 4);
    const __m256d s = _mm256_hadd_pd(_mm256_mul_pd(p0, p0), _mm256_mul_pd(p1, p1));
    // hadd leaves [c0, c2, c1, c3]; restore order.
    const __m256d ordered = _mm256_permute4x64_pd(s, 0xD8);
    _mm256_store_pd(e, _mm256_mul_pd(ordered, _mm256_loadu_pd(w + i)));
    out[band[i]] += e[0];
    out[band[i + 1]] += e[1];
    out[band[i + 2]] += e[2];
    out[band[i + 3]] += e[3];
  }
  for (; i < n; ++i) {
    const double re = cd[2 * i];
    const double im = cd[2 * i + 1];
    out[band[i]] += w[i] * (re * re + im * im);
  }
}

void mul_avx2(std::size_t n, const double* x, const double* y, double* z) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) z[i] = x[i] * y[i];
}

void mul_acc_avx2(std::size_t n, const double* x, const double* y, double* z) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                                      _mm256_loadu_pd(z + i));
    _mm256_storeu_pd(z + i, r);
  }
  for (; i < n; ++i) z[i] += x[i] * y[i];
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{"avx2", cmatvec10_avx2, band_abs2_avx2, mul_avx2, mul_acc_avx2};
  return table;
}

}  // namespace emrelax::kernels
