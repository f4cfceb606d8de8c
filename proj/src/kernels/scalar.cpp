#include "emrelax/kernels/kernels.hpp"

namespace emrelax::kernels {

namespace {

void cmatvec10_scalar(std::size_t modes, const cplx* a, const cplx* x, cplx* y, bool accumulate) {
  for (std::size_t m = 0; m < modes; ++m) {
    const double* am = reinterpret_cast<const double*>(a + m * kBlock * kBlock);
    const double* xm = reinterpret_cast<const double*>(x + m * kBlock);
    double* ym = reinterpret_cast<double*>(y + m * kBlock);
    for (std::size_t r = 0; r < kBlock; ++r) {
      const double* row = am + 2 * kBlock * r;
      double re = 0.0;
      double im = 0.0;
      for (std::size_t c = 0; c < kBlock; ++c) {
        const double ar = row[2 * c];
        const double ai = row[2 * c + 1];
        const double xr = xm[2 * c];
        const double xi = xm[2 * c + 1];
        re += ar * xr - ai * xi;
        im += ar * xi + ai * xr;
      }
      if (accumulate) {
        ym[2 * r] += re;
        ym[2 * r + 1] += im;
      } else {
        ym[2 * r] = re;
        ym[2 * r + 1] = im;
      }
    }
  }
}

void band_abs2_scalar(std::size_t n, const cplx* c, const double* w, const int* band, double* out) {
  const double* cd = reinterpret_cast<const double*>(c);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = cd[2 * i];
    const double im = cd[2 * i + 1];
    out[band[i]] += w[i] * (re * re + im * im);
  }
}

void mul_scalar(std::size_t n, const double* x, const double* y, double* z) {
  for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void mul_acc_scalar(std::size_t n, const double* x, const double* y, double* z) {
  for (std::size_t i = 0; i < n; ++i) z[i] += x[i] * y[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", cmatvec10_scalar, band_abs2_scalar, mul_scalar,
                                 mul_acc_scalar};
  return table;
}

}  // namespace emrelax::kernels
