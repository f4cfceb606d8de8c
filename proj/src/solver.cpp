#include "emrelax/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "emrelax/bands.hpp"
#include "emrelax/kernels/kernels.hpp"
#include "emrelax/parallel.hpp"
#include "emrelax/symbol.hpp"

namespace emrelax {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr std::size_t kB = kernels::kBlock;

void check_dt(const StepperConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ArgumentError("stepper dt must be positive");
}

// Energy-symmetrizing scaling for primitive variables [rho', u, e, b'].
Eigen::Matrix<double, 10, 1> primitive_scaling(const ModelParams& p) {
  Eigen::Matrix<double, 10, 1> w;
  w(0) = 1.0 / p.kay();
  for (int a = 0; a < 3; ++a) {
    w(1 + a) = std::sqrt(p.pprime_bar()) * p.epsilon();
    w(4 + a) = 1.0 / std::sqrt(p.kay());
    w(7 + a) = 1.0 / std::sqrt(p.kay());
  }
  return w;
}

void store_row_major(const Mat10c& m, cplx* out) {
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 10; ++c) out[r * 10 + c] = m(r, c);
  }
}

void pack(const SimState& s, std::vector<cplx>& x) {
  const std::size_t ns = s.grid->spec_size();
  x.resize(ns * kB);
  for (std::size_t m = 0; m < ns; ++m) {
    cplx* v = x.data() + m * kB;
    v[0] = s.rho.data[m];
    for (int a = 0; a < 3; ++a) {
      v[1 + a] = s.u.comp(a)[m];
      v[4 + a] = s.e.comp(a)[m];
      v[7 + a] = s.b.comp(a)[m];
    }
  }
  x[0] -= s.params.rho_bar();
  for (int a = 0; a < 3; ++a) x[7 + a] -= s.params.b_bar()[a];
}

void unpack(const std::vector<cplx>& x, SimState& s) {
  const PeriodicGrid& g = *s.grid;
  for (std::size_t m = 0; m < g.spec_size(); ++m) {
    const cplx* v = x.data() + m * kB;
    const bool nyq = g.nyquist(m);
    s.rho.data[m] = nyq ? cplx{} : v[0];
    for (int a = 0; a < 3; ++a) {
      s.u.comp(a)[m] = nyq ? cplx{} : v[1 + a];
      s.e.comp(a)[m] = nyq ? cplx{} : v[4 + a];
      s.b.comp(a)[m] = nyq ? cplx{} : v[7 + a];
    }
  }
  s.rho.data[0] += s.params.rho_bar();
  for (int a = 0; a < 3; ++a) s.b.comp(a)[0] += s.params.b_bar()[a];
}

// Removes the longitudinal part of b' so that div b = 0 exactly.
void project_divergence_free(SpectralField& b) {
  const PeriodicGrid& g = *b.grid;
  for (std::size_t m = 1; m < g.spec_size(); ++m) {
    const Vec3& k = g.wavevector(m);
    const double k2 = norm2(k);
    if (k2 == 0.0) continue;
    const cplx kb = k[0] * b.comp(0)[m] + k[1] * b.comp(1)[m] + k[2] * b.comp(2)[m];
    for (int a = 0; a < 3; ++a) b.comp(a)[m] -= k[a] * kb / k2;
  }
}

// phi_1(z) and phi_2(z) of exponential integrators, series near z = 0.
void phi_functions(double z, double& p1, double& p2) {
  if (std::abs(z) < 1e-3) {
    p1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    p2 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
  } else {
    const double em1 = std::expm1(z);
    p1 = em1 / z;
    p2 = (em1 - z) / (z * z);
  }
}

std::string describe_vacuum(double min_rho, double t) {
  std::ostringstream os;
  os << "vacuum reached: min rho = " << min_rho << " near t = " << t;
  return os.str();
}

}  // namespace

Mat10c linear_generator(const ModelParams& params, const Vec3& k) {
  const Mat10c m = assemble_symbol(params, k).m;
  Eigen::Matrix<double, 10, 1> d = Eigen::Matrix<double, 10, 1>::Ones();
  d(0) = params.kay();
  return d.asDiagonal() * m * d.cwiseInverse().asDiagonal();
}

struct EmStepper::Impl {
  GridPtr grid;
  ModelParams params;
  StepperConfig cfg;
  Fft fft;
  std::vector<cplx> expo, phi1, phi2;  // row-major blocks, phi tables scaled by dt
  std::size_t ns;
  std::size_t nr;
  // Work buffers.
  std::vector<cplx> hat;
  std::vector<double> r, q, tmp;
  std::vector<double> uu, bb, du;  // 3 comps, 3 comps, dim x 3 comps
  double cfl_limit = 0.0;

  Impl(GridPtr g, const ModelParams& p, const StepperConfig& c)
      : grid(std::move(g)), params(p), cfg(c), fft(grid), ns(grid->spec_size()), nr(grid->real_size()) {
    check_dt(cfg);
    expo.resize(ns * 100);
    phi1.resize(ns * 100);
    phi2.resize(ns * 100);
    const auto w = primitive_scaling(params);
    const double h = cfg.dt;
    parallel_for(ns, [&](std::size_t m) {
      const Mat10c l = linear_generator(params, grid->wavevector(m));
      const Mat10c s = w.asDiagonal() * l * w.cwiseInverse().asDiagonal();
      Eigen::Matrix<cplx, 30, 30> aug = Eigen::Matrix<cplx, 30, 30>::Zero();
      aug.block<10, 10>(0, 0) = h * s;
      aug.block<10, 10>(0, 10).setIdentity();
      aug.block<10, 10>(10, 20).setIdentity();
      const MatXc ex = expm(MatXc(aug));
      auto back = [&](const MatXc& blk) -> Mat10c {
        return w.cwiseInverse().asDiagonal() * Mat10c(blk) * w.asDiagonal();
      };
      store_row_major(back(ex.block(0, 0, 10, 10)), expo.data() + m * 100);
      store_row_major(back(h * ex.block(0, 10, 10, 10)), phi1.data() + m * 100);
      store_row_major(back(h * ex.block(0, 20, 10, 10)), phi2.data() + m * 100);
    });
    hat.resize(ns);
    r.resize(nr);
    q.resize(nr);
    tmp.resize(nr);
    uu.resize(3 * nr);
    bb.resize(3 * nr);
    du.resize(static_cast<std::size_t>(grid->dim()) * 3 * nr);
    double dxmin = grid->dx(0);
    for (int a = 1; a < grid->dim(); ++a) dxmin = std::min(dxmin, grid->dx(a));
    cfl_limit = 0.5 * dxmin;
  }

  void to_real(const std::vector<cplx>& x, int comp, double* out) {
    for (std::size_t m = 0; m < ns; ++m) hat[m] = x[m * kB + comp];
    fft.backward(hat.data(), out);
  }

  // Forward transform of a real buffer, returned into hat (dealiased).
  void to_spec(double* in) {
    fft.forward(in, hat.data());
    const PeriodicGrid& g = *grid;
    for (std::size_t m = 0; m < ns; ++m) {
      if (g.nyquist(m) || (cfg.dealias && !g.dealias_keep(m))) hat[m] = cplx{};
    }
  }

  // Explicit terms at x; checks vacuum, and CFL when check_cfl is set.
  void nonlinear(const std::vector<cplx>& x, std::vector<cplx>& out, double t, bool check_cfl) {
    const PeriodicGrid& g = *grid;
    const auto& kt = kernels::active();
    const int dim = g.dim();
    const double eps = params.epsilon();
    const double rb = params.rho_bar();
    out.assign(ns * kB, cplx{});

    to_real(x, 0, r.data());
    for (int a = 0; a < 3; ++a) {
      to_real(x, 1 + a, uu.data() + a * nr);
      to_real(x, 7 + a, bb.data() + a * nr);
    }
    for (int ax = 0; ax < dim; ++ax) {
      for (int c = 0; c < 3; ++c) {
        for (std::size_t m = 0; m < ns; ++m) {
          hat[m] = g.nyquist(m) ? cplx{} : kI * g.wavevector(m)[ax] * x[m * kB + 1 + c];
        }
        fft.backward(hat.data(), du.data() + (static_cast<std::size_t>(ax) * 3 + c) * nr);
      }
    }

    double rho_min = std::numeric_limits<double>::infinity();
    double rho_max = -rho_min;
    for (double v : r) {
      rho_min = std::min(rho_min, rb + v);
      rho_max = std::max(rho_max, rb + v);
    }
    if (!(rho_min > 0.0)) throw NumericalAbort("vacuum", describe_vacuum(rho_min, t));
    if (check_cfl) {
      double umax = 0.0;
      for (std::size_t i = 0; i < nr; ++i) {
        const double s = uu[i] * uu[i] + uu[nr + i] * uu[nr + i] + uu[2 * nr + i] * uu[2 * nr + i];
        umax = std::max(umax, std::sqrt(s));
      }
      const double limit = cfl_limit / (umax + std::sqrt(params.law().dpressure(rho_max)));
      if (cfg.dt > limit) {
        std::ostringstream os;
        os << "CFL violated at t = " << t << ": dt = " << cfg.dt << " exceeds " << limit;
        throw NumericalAbort("cfl", os.str());
      }
    }

    // Pressure correction h(rho) - rho'/K.
    const double inv_k = 1.0 / params.kay();
    for (std::size_t i = 0; i < nr; ++i) q[i] = enthalpy(params, rb + r[i]) - r[i] * inv_k;
    to_spec(q.data());
    const double e2inv = 1.0 / (eps * eps);
    for (std::size_t m = 0; m < ns; ++m) {
      const Vec3& k = g.wavevector(m);
      for (int a = 0; a < 3; ++a) out[m * kB + 1 + a] -= e2inv * kI * k[a] * hat[m];
    }

    // Current rho' u: feeds the continuity and Ampere equations.
    for (int a = 0; a < 3; ++a) {
      kt.mul(nr, r.data(), uu.data() + a * nr, tmp.data());
      to_spec(tmp.data());
      for (std::size_t m = 0; m < ns; ++m) {
        out[m * kB + 4 + a] += hat[m];
        out[m * kB] -= kI * g.wavevector(m)[a] * hat[m];
      }
    }

    // Convection u . grad u.
    for (int c = 0; c < 3; ++c) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      for (int ax = 0; ax < dim; ++ax) {
        kt.mul_acc(nr, uu.data() + ax * nr, du.data() + (static_cast<std::size_t>(ax) * 3 + c) * nr, tmp.data());
      }
      to_spec(tmp.data());
      for (std::size_t m = 0; m < ns; ++m) out[m * kB + 1 + c] -= hat[m];
    }

    // Lorentz force of the perturbed field, u x b' / eps.
    const double einv = 1.0 / eps;
    for (int c = 0; c < 3; ++c) {
      const int a = (c + 1) % 3;
      const int b = (c + 2) % 3;
      kt.mul(nr, uu.data() + a * nr, bb.data() + b * nr, tmp.data());
      for (std::size_t i = 0; i < nr; ++i) tmp[i] -= uu[b * nr + i] * bb[a * nr + i];
      to_spec(tmp.data());
      for (std::size_t m = 0; m < ns; ++m) out[m * kB + 1 + c] -= einv * hat[m];
    }
  }

  void step(SimState& s) {
    std::vector<cplx> x, n0, n1, a(ns * kB), y(ns * kB);
    pack(s, x);
    nonlinear(x, n0, s.time, true);
    const auto& kt = kernels::active();
    kt.cmatvec10(ns, expo.data(), x.data(), a.data(), false);
    kt.cmatvec10(ns, phi1.data(), n0.data(), a.data(), true);
    nonlinear(a, n1, s.time + cfg.dt, false);
    for (std::size_t i = 0; i < n1.size(); ++i) n1[i] -= n0[i];
    y = a;
    kt.cmatvec10(ns, phi2.data(), n1.data(), y.data(), true);
    unpack(y, s);
    project_divergence_free(s.b);
    s.time += cfg.dt;
  }
};

EmStepper::EmStepper(GridPtr grid, const ModelParams& params, const StepperConfig& cfg)
    : impl_(std::make_unique<Impl>(std::move(grid), params, cfg)) {}
EmStepper::~EmStepper() = default;

void EmStepper::step(SimState& state) {
  require_same_grid(state.grid, impl_->grid, "EmStepper::step");
  impl_->step(state);
}

std::vector<cplx> EmStepper::nonlinear_terms(const SimState& state) {
  require_same_grid(state.grid, impl_->grid, "EmStepper::nonlinear_terms");
  std::vector<cplx> x, out;
  pack(state, x);
  impl_->nonlinear(x, out, state.time, false);
  return out;
}

double EmStepper::dt() const { return impl_->cfg.dt; }

struct DdStepper::Impl {
  GridPtr grid;
  ModelParams params;
  StepperConfig cfg;
  Fft fft;
  std::size_t ns, nr;
  std::vector<double> expo, phi1, phi2;
  std::vector<cplx> hat;
  std::vector<double> r, gphys, flux;

  Impl(GridPtr g, const ModelParams& p, const StepperConfig& c)
      : grid(std::move(g)), params(p), cfg(c), fft(grid), ns(grid->spec_size()), nr(grid->real_size()) {
    check_dt(cfg);
    expo.resize(ns);
    phi1.resize(ns);
    phi2.resize(ns);
    const double h = cfg.dt;
    for (std::size_t m = 0; m < ns; ++m) {
      const double k2 = grid->knorm(m) * grid->knorm(m);
      const double z = -h * (params.pprime_bar() * k2 + params.rho_bar());
      double p1, p2;
      phi_functions(z, p1, p2);
      expo[m] = std::exp(z);
      phi1[m] = h * p1;
      phi2[m] = h * p2;
    }
    hat.resize(ns);
    r.resize(nr);
    gphys.resize(nr);
    flux.resize(nr);
  }

  // div((P'(rho) - P'(rho_bar)) grad rho) + div((rho - rho_bar) grad phi).
  void nonlinear(const std::vector<cplx>& rp, std::vector<cplx>& out, double t) {
    const PeriodicGrid& g = *grid;
    const double rb = params.rho_bar();
    const double pb = params.pprime_bar();
    fft.backward(rp.data(), r.data());
    double rho_min = std::numeric_limits<double>::infinity();
    for (double v : r) rho_min = std::min(rho_min, rb + v);
    if (!(rho_min > 0.0)) throw NumericalAbort("vacuum", describe_vacuum(rho_min, t));
    std::vector<double> gcoef(nr);
    for (std::size_t i = 0; i < nr; ++i) gcoef[i] = params.law().dpressure(rb + r[i]) - pb;
    out.assign(ns, cplx{});
    for (int ax = 0; ax < g.dim(); ++ax) {
      for (std::size_t m = 0; m < ns; ++m) {
        hat[m] = g.nyquist(m) ? cplx{} : kI * g.wavevector(m)[ax] * rp[m];
      }
      fft.backward(hat.data(), gphys.data());
      for (std::size_t i = 0; i < nr; ++i) flux[i] = gcoef[i] * gphys[i];
      for (std::size_t m = 0; m < ns; ++m) {
        const double k2 = g.knorm(m) * g.knorm(m);
        hat[m] = (g.nyquist(m) || k2 == 0.0) ? cplx{} : kI * g.wavevector(m)[ax] * rp[m] / k2;
      }
      fft.backward(hat.data(), gphys.data());
      kernels::active().mul_acc(nr, r.data(), gphys.data(), flux.data());
      fft.forward(flux.data(), hat.data());
      for (std::size_t m = 0; m < ns; ++m) {
        if (g.nyquist(m) || (cfg.dealias && !g.dealias_keep(m))) continue;
        out[m] += kI * g.wavevector(m)[ax] * hat[m];
      }
    }
  }

  void step(DDState& s) {
    std::vector<cplx> x(s.rho.data), n0, n1, a(ns);
    x[0] -= params.rho_bar();
    nonlinear(x, n0, s.time);
    for (std::size_t m = 0; m < ns; ++m) a[m] = expo[m] * x[m] + phi1[m] * n0[m];
    nonlinear(a, n1, s.time + cfg.dt);
    for (std::size_t m = 0; m < ns; ++m) {
      const cplx v = a[m] + phi2[m] * (n1[m] - n0[m]);
      s.rho.data[m] = grid->nyquist(m) ? cplx{} : v;
    }
    s.rho.data[0] += params.rho_bar();
    s.time += cfg.dt;
    update_potential(s);
  }
};

DdStepper::DdStepper(GridPtr grid, const ModelParams& params, const StepperConfig& cfg)
    : impl_(std::make_unique<Impl>(std::move(grid), params, cfg)) {}
DdStepper::~DdStepper() = default;

void DdStepper::step(DDState& state) {
  require_same_grid(state.grid, impl_->grid, "DdStepper::step");
  impl_->step(state);
}

double DdStepper::dt() const { return impl_->cfg.dt; }

SimState step_em(const SimState& state, const StepperConfig& cfg) {
  EmStepper stepper(state.grid, state.params, cfg);
  SimState out = state;
  stepper.step(out);
  return out;
}

DDState step_dd(const DDState& state, const StepperConfig& cfg) {
  DdStepper stepper(state.grid, state.params, cfg);
  DDState out = state;
  stepper.step(out);
  return out;
}

SimState linear_evolution(const SimState& s, double t) {
  std::vector<cplx> x;
  pack(s, x);
  const double kay = s.params.kay();
  const std::size_t ns = s.grid->spec_size();
  std::vector<cplx> y(x.size());
  parallel_for(ns, [&](std::size_t m) {
    Vec10c v;
    for (int c = 0; c < 10; ++c) v(c) = x[m * kB + c];
    v(kN) /= kay;
    const Vec10c w = propagator(assemble_symbol(s.params, s.grid->wavevector(m)), t) * v;
    for (int c = 0; c < 10; ++c) y[m * kB + c] = w(c);
    y[m * kB] *= kay;
  });
  SimState out = s;
  unpack(y, out);
  out.time = s.time + t;
  return out;
}

double max_mode_difference(const SimState& a, const SimState& b) {
  require_same_grid(a.grid, b.grid, "max_mode_difference");
  std::vector<cplx> x, y;
  pack(a, x);
  pack(b, y);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

namespace {

SpectralField density_perturbation(const SimState& s) {
  SpectralField d = s.rho;
  d.data[0] -= s.params.rho_bar();
  return d;
}

SpectralField field_perturbation(const SimState& s) {
  SpectralField d = s.b;
  for (int a = 0; a < 3; ++a) d.comp(a)[0] -= s.params.b_bar()[a];
  return d;
}

double relative(double num, double den) {
  if (num == 0.0) return 0.0;
  return den > 0.0 ? num / den : num;
}

}  // namespace

double gauss_residual(const SimState& s) {
  const SpectralField d = density_perturbation(s);
  return relative(l2_norm(divergence(s.e) + d), l2_norm(d));
}

double div_b_residual(const SimState& s) {
  return relative(l2_norm(divergence(s.b)), l2_norm(field_perturbation(s)));
}

double physical_energy(const SimState& s, Fft& fft) {
  const RealField rho = fft.backward(s.rho);
  const RealField u = fft.backward(s.u);
  const RealField e = fft.backward(s.e);
  const RealField b = fft.backward(field_perturbation(s));
  const std::size_t nr = s.grid->real_size();
  const double e2 = s.params.epsilon() * s.params.epsilon();
  double sum = 0.0;
  for (std::size_t i = 0; i < nr; ++i) {
    double u2 = 0.0, ee = 0.0, bb = 0.0;
    for (int a = 0; a < 3; ++a) {
      u2 += u.comp(a)[i] * u.comp(a)[i];
      ee += e.comp(a)[i] * e.comp(a)[i];
      bb += b.comp(a)[i] * b.comp(a)[i];
    }
    sum += 0.5 * e2 * rho.data[i] * u2 + internal_energy(s.params, rho.data[i]) + 0.5 * ee + 0.5 * bb;
  }
  return sum * s.grid->volume() / static_cast<double>(nr);
}

double dissipation_rate(const SimState& s, Fft& fft) {
  const RealField rho = fft.backward(s.rho);
  const RealField u = fft.backward(s.u);
  const std::size_t nr = s.grid->real_size();
  double sum = 0.0;
  for (std::size_t i = 0; i < nr; ++i) {
    double u2 = 0.0;
    for (int a = 0; a < 3; ++a) u2 += u.comp(a)[i] * u.comp(a)[i];
    sum += rho.data[i] * u2;
  }
  return sum * s.grid->volume() / static_cast<double>(nr);
}

double min_density(const SimState& s, Fft& fft) {
  const RealField rho = fft.backward(s.rho);
  return *std::min_element(rho.data.begin(), rho.data.end());
}

double reality_defect(const SimState& s) {
  const PeriodicGrid& g = *s.grid;
  double defect = 0.0;
  double scale = 0.0;
  for (const SpectralField* f : {&s.rho, &s.u, &s.e, &s.b}) {
    for (int c = 0; c < f->ncomp; ++c) {
      const cplx* d = f->comp(c);
      for (std::size_t m = 0; m < g.spec_size(); ++m) {
        scale = std::max(scale, std::abs(d[m]));
        std::array<int, 3> lat = g.lattice(m);
        if (lat[g.dim() - 1] != 0) continue;
        for (int a = 0; a < 3; ++a) lat[a] = -lat[a];
        const std::size_t p = g.find_mode(lat);
        if (p == PeriodicGrid::npos) continue;
        defect = std::max(defect, std::abs(d[p] - std::conj(d[m])));
      }
    }
  }
  return relative(defect, scale);
}

SimState equilibrium_state(GridPtr grid, const ModelParams& params) {
  SimState s;
  s.grid = grid;
  s.params = params;
  s.rho = SpectralField::zeros(grid, 1);
  s.u = SpectralField::zeros(grid, 3);
  s.e = SpectralField::zeros(grid, 3);
  s.b = SpectralField::zeros(grid, 3);
  s.rho.data[0] = params.rho_bar();
  for (int a = 0; a < 3; ++a) s.b.comp(a)[0] = params.b_bar()[a];
  return s;
}

DDState equilibrium_dd(GridPtr grid, const ModelParams& params) {
  DDState s;
  s.grid = grid;
  s.params = params;
  s.rho = SpectralField::zeros(grid, 1);
  s.rho.data[0] = params.rho_bar();
  s.phi = SpectralField::zeros(grid, 1);
  return s;
}

void update_potential(DDState& s) {
  SpectralField d = s.rho;
  d.data[0] = 0.0;
  s.phi = inverse_neg_laplacian(d);
}

namespace {

// Random real field on the dyadic bands [lo, hi], zero mean, inside the
// dealiasing set. Unnormalized.
SpectralField random_band_field(const GridPtr& grid, Fft& fft, int ncomp, int lo, int hi, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const PeriodicGrid& g = *grid;
  std::vector<char> support(g.spec_size(), 0);
  for (std::size_t m = 0; m < g.spec_size(); ++m) {
    const double k = g.knorm(m);
    if (k == 0.0 || !g.dealias_keep(m)) continue;
    const int j = band_of(k);
    support[m] = j >= lo && j <= hi;
  }
  SpectralField f = SpectralField::zeros(grid, ncomp);
  for (int c = 0; c < ncomp; ++c) {
    for (std::size_t m = 0; m < g.spec_size(); ++m) {
      const double re = normal(rng);
      const double im = normal(rng);
      if (support[m]) f.comp(c)[m] = cplx(re, im);
    }
  }
  // A round trip enforces the conjugate symmetry of self-paired modes.
  f = fft.forward(fft.backward(f));
  for (int c = 0; c < ncomp; ++c) {
    for (std::size_t m = 0; m < g.spec_size(); ++m) {
      if (!support[m]) f.comp(c)[m] = 0.0;
    }
  }
  return f;
}

void scale_to_max(SpectralField& f, Fft& fft, double amp) {
  const double mx = max_abs(fft.backward(f));
  if (mx > 0.0) f *= amp / mx;
}

}  // namespace

InitialData make_initial(GridPtr grid, const ModelParams& params, const InitialSpec& setup) {
  if (!(setup.amplitude >= 0.0) || !std::isfinite(setup.amplitude)) {
    throw ArgumentError("initial amplitude must be finite and nonnegative");
  }
  if (setup.band_lo > setup.band_hi) throw ArgumentError("initial band range is empty");
  if (setup.transverse < 0.0 || setup.density_mismatch < 0.0 || !(setup.velocity >= 0.0)) {
    throw ArgumentError("transverse, density_mismatch and velocity factors must be nonnegative");
  }
  Fft fft(grid);
  std::mt19937_64 rng(setup.seed);
  const double eps = params.epsilon();
  const double rb = params.rho_bar();

  SpectralField drho = random_band_field(grid, fft, 1, setup.band_lo, setup.band_hi, rng);
  scale_to_max(drho, fft, setup.amplitude);
  if (rb - setup.amplitude <= 0.0) {
    std::ostringstream os;
    os << "initial amplitude " << setup.amplitude << " reaches vacuum for rho_bar = " << rb;
    throw DomainError(os.str());
  }
  SpectralField ill = random_band_field(grid, fft, 3, setup.band_lo, setup.band_hi, rng);
  scale_to_max(ill, fft, setup.velocity * setup.amplitude);
  SpectralField et = leray_project(random_band_field(grid, fft, 3, setup.band_lo, setup.band_hi, rng));
  scale_to_max(et, fft, setup.transverse * eps * setup.amplitude);
  SpectralField bt = leray_project(random_band_field(grid, fft, 3, setup.band_lo, setup.band_hi, rng));
  scale_to_max(bt, fft, setup.transverse * eps * setup.amplitude);
  SpectralField mismatch = random_band_field(grid, fft, 1, setup.band_lo, setup.band_hi, rng);
  scale_to_max(mismatch, fft, setup.density_mismatch * eps * setup.amplitude);

  InitialData out;
  out.em = equilibrium_state(grid, params);
  out.em.rho += drho;
  const SpectralField phi0 = inverse_neg_laplacian(drho);
  out.em.e = gradient(phi0) + et;
  out.em.b += bt;

  if (setup.prepared == Prepared::ill) {
    out.u0 = ill;
  } else {
    RealField rho = fft.backward(out.em.rho);
    for (double& v : rho.data) v = enthalpy(params, v);
    SpectralField hh = fft.forward(rho);
    hh.data[0] = 0.0;
    dealias(hh);
    out.u0 = gradient(hh + phi0);
    out.u0 *= -eps;
  }
  out.em.u = out.u0;
  out.em.u *= 1.0 / eps;

  out.dd = equilibrium_dd(grid, params);
  out.dd.rho = out.em.rho + mismatch;
  update_potential(out.dd);
  if (min_density(out.em, fft) <= 0.0 || max_abs(fft.backward(mismatch)) + setup.amplitude >= rb) {
    throw DomainError("initial density reaches vacuum");
  }
  return out;
}

std::size_t step_count(const StepperConfig& cfg, double t0) {
  check_dt(cfg);
  const double span = cfg.t_end - t0;
  if (span < -1e-12) throw ArgumentError("t_end lies before the current time");
  const double n = std::round(span / cfg.dt);
  if (std::abs(n * cfg.dt - span) > 1e-9 * std::max(1.0, std::abs(cfg.t_end))) {
    std::ostringstream os;
    os << "t_end - t0 = " << span << " is not a multiple of dt = " << cfg.dt;
    throw ArgumentError(os.str());
  }
  return static_cast<std::size_t>(std::max(0.0, n));
}

RunRecord run(SimState& state, const StepperConfig& cfg, const RunSchedule& schedule, const EmObserver& observer) {
  if (schedule.every == 0) throw ArgumentError("run schedule interval must be positive");
  const std::size_t steps = step_count(cfg, state.time);
  const double t0 = state.time;
  Fft fft(state.grid);
  RunRecord rec;
  auto sample = [&](double dissipated) {
    EnergySample s;
    s.t = state.time;
    s.energy = physical_energy(state, fft);
    s.dissipated = dissipated;
    s.gauss = gauss_residual(state);
    s.div_b = div_b_residual(state);
    s.min_rho = min_density(state, fft);
    rec.samples.push_back(s);
    rec.max_gauss = std::max(rec.max_gauss, s.gauss);
    rec.max_div_b = std::max(rec.max_div_b, s.div_b);
    if (rec.samples.size() == 1) rec.energy0 = s.energy;
    const double defect = std::abs(s.energy + s.dissipated - rec.energy0);
    rec.energy_defect = std::max(rec.energy_defect, relative(defect, rec.energy0));
    if (observer) observer(state, s);
  };
  sample(0.0);
  if (steps == 0) return rec;
  EmStepper stepper(state.grid, state.params, cfg);
  double prev = dissipation_rate(state, fft);
  double dissipated = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    stepper.step(state);
    state.time = t0 + static_cast<double>(i) * cfg.dt;
    const double rate = dissipation_rate(state, fft);
    dissipated += 0.5 * cfg.dt * (prev + rate);
    prev = rate;
    rec.max_gauss = std::max(rec.max_gauss, gauss_residual(state));
    rec.max_div_b = std::max(rec.max_div_b, div_b_residual(state));
    ++rec.steps;
    if (i % schedule.every == 0 || i == steps) sample(dissipated);
  }
  return rec;
}

void run_dd(DDState& state, const StepperConfig& cfg, const RunSchedule& schedule, const DdObserver& observer) {
  if (schedule.every == 0) throw ArgumentError("run schedule interval must be positive");
  const std::size_t steps = step_count(cfg, state.time);
  const double t0 = state.time;
  if (observer) observer(state);
  if (steps == 0) return;
  DdStepper stepper(state.grid, state.params, cfg);
  for (std::size_t i = 1; i <= steps; ++i) {
    stepper.step(state);
    state.time = t0 + static_cast<double>(i) * cfg.dt;
    if (observer && (i % schedule.every == 0 || i == steps)) observer(state);
  }
}

}  // namespace emrelax
