#include "emrelax/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <sstream>

namespace emrelax {

namespace {

bool power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr cplx kI{0.0, 1.0};

}  // namespace

PeriodicGrid::PeriodicGrid(int dim, std::array<int, 3> n_points, double length)
    : dim_(dim), n_{1, 1, 1}, length_(length) {
  if (dim < 1 || dim > 3) throw ArgumentError("grid dimension must be 1, 2 or 3");
  if (!(length > 0.0) || !std::isfinite(length)) throw ArgumentError("grid length must be positive");
  for (int a = 0; a < dim; ++a) {
    if (!power_of_two(n_points[a])) {
      std::ostringstream os;
      os << "grid size along axis " << a << " must be a power of two >= 2, got " << n_points[a];
      throw ArgumentError(os.str());
    }
    n_[a] = n_points[a];
  }
  volume_ = std::pow(2.0 * std::numbers::pi * length, dim);
  real_size_ = 1;
  for (int a = 0; a < dim; ++a) real_size_ *= static_cast<std::size_t>(n_[a]);

  const int last = dim - 1;
  std::array<int, 3> sn = n_;
  sn[last] = n_[last] / 2 + 1;
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(sn[a]);
  lattice_.resize(total);
  wavevectors_.resize(total);
  knorm_.resize(total);
  weights_.resize(total);
  nyquist_.resize(total);
  keep_.resize(total);
  for (std::size_t m = 0; m < total; ++m) {
    std::size_t rem = m;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = last; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % static_cast<std::size_t>(sn[a]));
      rem /= static_cast<std::size_t>(sn[a]);
    }
    std::array<int, 3> lat{0, 0, 0};
    bool nyq = false;
    bool keep = true;
    for (int a = 0; a < dim; ++a) {
      const int i = idx[a];
      lat[a] = (a == last || i <= n_[a] / 2) ? i : i - n_[a];
      nyq = nyq || i == n_[a] / 2;
      keep = keep && std::abs(lat[a]) <= n_[a] / 3;
    }
    lattice_[m] = lat;
    wavevectors_[m] = {lat[0] / length, lat[1] / length, lat[2] / length};
    knorm_[m] = std::sqrt(norm2(wavevectors_[m]));
    weights_[m] = (idx[last] == 0 || idx[last] == n_[last] / 2) ? 1.0 : 2.0;
    nyquist_[m] = nyq;
    keep_[m] = keep && !nyq;
  }
}

double PeriodicGrid::dx(int axis) const {
  if (axis < 0 || axis >= dim_) throw ArgumentError("dx: axis out of range");
  return 2.0 * std::numbers::pi * length_ / n_[axis];
}

double PeriodicGrid::coordinate(std::size_t p, int axis) const {
  if (axis >= dim_) return 0.0;
  std::size_t stride = 1;
  for (int a = dim_ - 1; a > axis; --a) stride *= static_cast<std::size_t>(n_[a]);
  const std::size_t i = (p / stride) % static_cast<std::size_t>(n_[axis]);
  return static_cast<double>(i) * dx(axis);
}

std::size_t PeriodicGrid::find_mode(const std::array<int, 3>& lat) const {
  const int last = dim_ - 1;
  std::size_t m = 0;
  for (int a = 0; a < dim_; ++a) {
    const int n = n_[a];
    int i = lat[a];
    if (a == last) {
      if (i < 0 || i > n / 2) return npos;
      m = m * static_cast<std::size_t>(n / 2 + 1) + static_cast<std::size_t>(i);
    } else {
      if (i <= -n / 2 || i > n / 2) return npos;
      if (i < 0) i += n;
      m = m * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
    }
  }
  for (int a = dim_; a < 3; ++a) {
    if (lat[a] != 0) return npos;
  }
  return m;
}

GridPtr make_grid(int dim, int n, double length) {
  return std::make_shared<const PeriodicGrid>(dim, std::array<int, 3>{n, n, n}, length);
}

RealField RealField::zeros(GridPtr g, int ncomp) {
  RealField f;
  f.data.assign(static_cast<std::size_t>(ncomp) * g->real_size(), 0.0);
  f.grid = std::move(g);
  f.ncomp = ncomp;
  return f;
}

SpectralField SpectralField::zeros(GridPtr g, int ncomp) {
  SpectralField f;
  f.data.assign(static_cast<std::size_t>(ncomp) * g->spec_size(), cplx{});
  f.grid = std::move(g);
  f.ncomp = ncomp;
  return f;
}

SpectralField SpectralField::component(int c) const {
  if (c < 0 || c >= ncomp) throw ArgumentError("component index out of range");
  SpectralField f;
  f.grid = grid;
  f.ncomp = 1;
  f.data.assign(comp(c), comp(c) + grid->spec_size());
  return f;
}

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what) {
  if (!a || !b || (a != b && *a != *b)) {
    throw ArgumentError(std::string(what) + ": grid mismatch");
  }
}

namespace {

void require_shape(const SpectralField& a, const SpectralField& b, const char* what) {
  require_same_grid(a.grid, b.grid, what);
  if (a.ncomp != b.ncomp) throw ArgumentError(std::string(what) + ": component count mismatch");
}

}  // namespace

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_shape(*this, o, "spectral add");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_shape(*this, o, "spectral subtract");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : data) v *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

Fft::Fft(GridPtr grid) : grid_(std::move(grid)) {
  const int d = grid_->dim();
  int dims[3];
  for (int a = 0; a < d; ++a) dims[a] = grid_->n_points()[a];
  real_buf_ = static_cast<double*>(fftw_malloc(sizeof(double) * grid_->real_size()));
  spec_buf_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * grid_->spec_size()));
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_r2c_ = fftw_plan_dft_r2c(d, dims, real_buf_, reinterpret_cast<fftw_complex*>(spec_buf_), FFTW_ESTIMATE);
  plan_c2r_ = fftw_plan_dft_c2r(d, dims, reinterpret_cast<fftw_complex*>(spec_buf_), real_buf_, FFTW_ESTIMATE);
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_r2c_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_c2r_));
  fftw_free(real_buf_);
  fftw_free(spec_buf_);
}

void Fft::forward(const double* in, cplx* out) {
  std::memcpy(real_buf_, in, sizeof(double) * grid_->real_size());
  fftw_execute(static_cast<fftw_plan>(plan_r2c_));
  const double scale = 1.0 / static_cast<double>(grid_->real_size());
  for (std::size_t m = 0; m < grid_->spec_size(); ++m) out[m] = spec_buf_[m] * scale;
}

void Fft::backward(const cplx* in, double* out) {
  std::memcpy(static_cast<void*>(spec_buf_), in, sizeof(cplx) * grid_->spec_size());
  fftw_execute(static_cast<fftw_plan>(plan_c2r_));
  std::memcpy(out, real_buf_, sizeof(double) * grid_->real_size());
}

SpectralField Fft::forward(const RealField& f) {
  require_same_grid(f.grid, grid_, "transform_forward");
  if (f.data.size() != static_cast<std::size_t>(f.ncomp) * grid_->real_size()) {
    throw ArgumentError("transform_forward: data size does not match the grid");
  }
  SpectralField out = SpectralField::zeros(grid_, f.ncomp);
  for (int c = 0; c < f.ncomp; ++c) forward(f.comp(c), out.comp(c));
  return out;
}

RealField Fft::backward(const SpectralField& f) {
  require_same_grid(f.grid, grid_, "transform_backward");
  if (f.data.size() != static_cast<std::size_t>(f.ncomp) * grid_->spec_size()) {
    throw ArgumentError("transform_backward: data size does not match the grid");
  }
  RealField out = RealField::zeros(grid_, f.ncomp);
  for (int c = 0; c < f.ncomp; ++c) backward(f.comp(c), out.comp(c));
  return out;
}

SpectralField transfer(const SpectralField& f, const GridPtr& target) {
  const PeriodicGrid& src = *f.grid;
  if (src.dim() != target->dim() || src.length() != target->length()) {
    throw ArgumentError("transfer: grids differ in dimension or length");
  }
  SpectralField out = SpectralField::zeros(target, f.ncomp);
  for (std::size_t m = 0; m < src.spec_size(); ++m) {
    if (src.nyquist(m)) continue;
    const std::size_t t = target->find_mode(src.lattice(m));
    if (t == PeriodicGrid::npos || target->nyquist(t)) continue;
    for (int c = 0; c < f.ncomp; ++c) out.comp(c)[t] = f.comp(c)[m];
  }
  return out;
}

SpectralField gradient(const SpectralField& s) {
  if (s.ncomp != 1) throw ArgumentError("gradient: expected a scalar field");
  const PeriodicGrid& g = *s.grid;
  SpectralField out = SpectralField::zeros(s.grid, 3);
  for (int a = 0; a < 3; ++a) {
    cplx* o = out.comp(a);
    for (std::size_t m = 0; m < g.spec_size(); ++m) {
      o[m] = g.nyquist(m) ? cplx{} : kI * g.wavevector(m)[a] * s.data[m];
    }
  }
  return out;
}

SpectralField divergence(const SpectralField& v) {
  if (v.ncomp != 3) throw ArgumentError("divergence: expected a vector field");
  const PeriodicGrid& g = *v.grid;
  SpectralField out = SpectralField::zeros(v.grid, 1);
  for (std::size_t m = 0; m < g.spec_size(); ++m) {
    if (g.nyquist(m)) continue;
    const Vec3& k = g.wavevector(m);
    out.data[m] = kI * (k[0] * v.comp(0)[m] + k[1] * v.comp(1)[m] + k[2] * v.comp(2)[m]);
  }
  return out;
}

SpectralField curl(const SpectralField& v) {
  if (v.ncomp != 3) throw ArgumentError("curl: expected a vector field");
  const PeriodicGrid& g = *v.grid;
  SpectralField out = SpectralField::zeros(v.grid, 3);
  for (std::size_t m = 0; m < g.spec_size(); ++m) {
    if (g.nyquist(m)) continue;
    const Vec3& k = g.wavevector(m);
    const CVec3 c = cross(k, CVec3{v.comp(0)[m], v.comp(1)[m], v.comp(2)[m]});
    for (int a = 0; a < 3; ++a) out.comp(a)[m] = kI * c[a];
  }
  return out;
}

SpectralField inverse_neg_laplacian(const SpectralField& f) {
  const PeriodicGrid& g = *f.grid;
  SpectralField out = SpectralField::zeros(f.grid, f.ncomp);
  for (int c = 0; c < f.ncomp; ++c) {
    for (std::size_t m = 0; m < g.spec_size(); ++m) {
      const double k2 = g.knorm(m) * g.knorm(m);
      out.comp(c)[m] = k2 > 0.0 ? f.comp(c)[m] / k2 : cplx{};
    }
  }
  return out;
}

SpectralField leray_project(const SpectralField& v) {
  if (v.ncomp != 3) throw ArgumentError("leray_project: expected a vector field");
  const PeriodicGrid& g = *v.grid;
  SpectralField out = v;
  for (std::size_t m = 0; m < g.spec_size(); ++m) {
    const Vec3& k = g.wavevector(m);
    const double k2 = norm2(k);
    if (k2 == 0.0) continue;
    const cplx kv = k[0] * v.comp(0)[m] + k[1] * v.comp(1)[m] + k[2] * v.comp(2)[m];
    for (int a = 0; a < 3; ++a) out.comp(a)[m] -= k[a] * kv / k2;
  }
  return out;
}

SpectralField cross_const(const SpectralField& v, const Vec3& b) {
  if (v.ncomp != 3) throw ArgumentError("cross_const: expected a vector field");
  SpectralField out = SpectralField::zeros(v.grid, 3);
  for (std::size_t m = 0; m < v.grid->spec_size(); ++m) {
    const CVec3 c = cross(CVec3{v.comp(0)[m], v.comp(1)[m], v.comp(2)[m]}, b);
    for (int a = 0; a < 3; ++a) out.comp(a)[m] = c[a];
  }
  return out;
}

void dealias(SpectralField& f) {
  const PeriodicGrid& g = *f.grid;
  for (int c = 0; c < f.ncomp; ++c) {
    cplx* d = f.comp(c);
    for (std::size_t m = 0; m < g.spec_size(); ++m) {
      if (!g.dealias_keep(m)) d[m] = cplx{};
    }
  }
}

void zero_nyquist(SpectralField& f) {
  const PeriodicGrid& g = *f.grid;
  for (int c = 0; c < f.ncomp; ++c) {
    cplx* d = f.comp(c);
    for (std::size_t m = 0; m < g.spec_size(); ++m) {
      if (g.nyquist(m)) d[m] = cplx{};
    }
  }
}

double l2_norm(const SpectralField& f) {
  const auto& w = f.grid->weights();
  double s = 0.0;
  for (int c = 0; c < f.ncomp; ++c) {
    const cplx* d = f.comp(c);
    for (std::size_t m = 0; m < f.grid->spec_size(); ++m) s += w[m] * std::norm(d[m]);
  }
  return std::sqrt(f.grid->volume() * s);
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f.data) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace emrelax
