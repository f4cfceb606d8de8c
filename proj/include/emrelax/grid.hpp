#pragma once

// Periodic grids on [0, 2 pi L)^dim, real-to-complex transforms and the
// spectral field containers shared by the solver and the band diagnostics.

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "emrelax/common.hpp"

namespace emrelax {

class PeriodicGrid {
 public:
  /// n_points entries beyond dim are ignored; every used entry must be a power of two >= 2.
  PeriodicGrid(int dim, std::array<int, 3> n_points, double length);

  int dim() const { return dim_; }
  const std::array<int, 3>& n_points() const { return n_; }
  double length() const { return length_; }
  double dx(int axis) const;
  /// (2 pi L)^dim
  double volume() const { return volume_; }

  std::size_t real_size() const { return real_size_; }
  /// Half-spectrum size of the real-to-complex layout (last used axis halved).
  std::size_t spec_size() const { return wavevectors_.size(); }

  const std::array<int, 3>& lattice(std::size_t m) const { return lattice_[m]; }
  /// Physical wavevector lattice / L.
  const Vec3& wavevector(std::size_t m) const { return wavevectors_[m]; }
  double knorm(std::size_t m) const { return knorm_[m]; }
  /// Multiplicity of a stored mode in the full spectrum (1 or 2).
  const std::vector<double>& weights() const { return weights_; }
  /// True for modes with any lattice component at the Nyquist index.
  bool nyquist(std::size_t m) const { return nyquist_[m] != 0; }
  /// 2/3-rule: every |lattice component| <= n/3.
  bool dealias_keep(std::size_t m) const { return keep_[m] != 0; }

  /// Index of the stored mode with this lattice vector, or npos if it is not stored.
  std::size_t find_mode(const std::array<int, 3>& lat) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Physical coordinate of real-space point p along axis.
  double coordinate(std::size_t p, int axis) const;

  bool operator==(const PeriodicGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && length_ == o.length_;
  }
  bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }

 private:
  int dim_;
  std::array<int, 3> n_;
  double length_;
  double volume_;
  std::size_t real_size_;
  std::vector<std::array<int, 3>> lattice_;
  std::vector<Vec3> wavevectors_;
  std::vector<double> knorm_;
  std::vector<double> weights_;
  std::vector<char> nyquist_;
  std::vector<char> keep_;
};

using GridPtr = std::shared_ptr<const PeriodicGrid>;

GridPtr make_grid(int dim, int n, double length);

/// Real-space samples, component-major.
struct RealField {
  GridPtr grid;
  int ncomp = 1;
  std::vector<double> data;

  static RealField zeros(GridPtr g, int ncomp);
  double* comp(int c) { return data.data() + static_cast<std::size_t>(c) * grid->real_size(); }
  const double* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * grid->real_size(); }
};

/// Half-spectrum coefficients, component-major. Stored modes implicitly carry
/// their conjugate partners, so the data always represents a real field.
struct SpectralField {
  GridPtr grid;
  int ncomp = 1;
  std::vector<cplx> data;

  static SpectralField zeros(GridPtr g, int ncomp);
  cplx* comp(int c) { return data.data() + static_cast<std::size_t>(c) * grid->spec_size(); }
  const cplx* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * grid->spec_size(); }
  SpectralField component(int c) const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// FFTW plans for one grid. Forward is scaled by 1/N so a constant field c
/// maps to the zero-mode coefficient c; backward is its exact inverse.
/// Not thread-safe: each run owns its own instance.
class Fft {
 public:
  explicit Fft(GridPtr grid);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  const GridPtr& grid() const { return grid_; }
  void forward(const double* in, cplx* out);
  void backward(const cplx* in, double* out);

  SpectralField forward(const RealField& f);
  RealField backward(const SpectralField& f);

 private:
  GridPtr grid_;
  void* plan_r2c_;
  void* plan_c2r_;
  double* real_buf_;
  cplx* spec_buf_;
};

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what);

/// Copies the non-Nyquist modes of f that the target grid stores (same length required).
SpectralField transfer(const SpectralField& f, const GridPtr& target);

// Spectral calculus on the stored half spectrum.
SpectralField gradient(const SpectralField& scalar);
SpectralField divergence(const SpectralField& vec);
SpectralField curl(const SpectralField& vec);
/// Solves -Delta u = f with zero mean (the zero mode of f is ignored).
SpectralField inverse_neg_laplacian(const SpectralField& f);
/// Longitudinal (curl-free) and transverse parts of a vector field.
SpectralField leray_project(const SpectralField& vec);
/// a x b for a field a and constant vector b.
SpectralField cross_const(const SpectralField& vec, const Vec3& b);
/// Zeroes modes outside the 2/3 rule and Nyquist modes.
void dealias(SpectralField& f);
void zero_nyquist(SpectralField& f);

/// sqrt(volume * sum_m w_m |c_m|^2) over all components.
double l2_norm(const SpectralField& f);
/// Max |value| over real samples of all components.
double max_abs(const RealField& f);

}  // namespace emrelax
