#include "emrelax/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "emrelax/parallel.hpp"

namespace emrelax {

namespace {

SpectralField to_spectral(Fft& fft, const RealField& f) {
  SpectralField s = fft.forward(f);
  dealias(s);
  return s;
}

// Pointwise map of a scalar real field.
template <class F>
RealField map_real(RealField f, F fn) {
  for (double& v : f.data) v = fn(v);
  return f;
}

// Product of a scalar and each component of a vector field, pointwise.
RealField scale_vector(const RealField& s, const RealField& v) {
  RealField out = v;
  const std::size_t nr = s.grid->real_size();
  for (int c = 0; c < v.ncomp; ++c) {
    for (std::size_t i = 0; i < nr; ++i) out.comp(c)[i] *= s.data[i];
  }
  return out;
}

RealField cross_real(const RealField& a, const RealField& b) {
  RealField out = RealField::zeros(a.grid, 3);
  const std::size_t nr = a.grid->real_size();
  for (int c = 0; c < 3; ++c) {
    const int p = (c + 1) % 3;
    const int q = (c + 2) % 3;
    for (std::size_t i = 0; i < nr; ++i) out.comp(c)[i] = a.comp(p)[i] * b.comp(q)[i] - a.comp(q)[i] * b.comp(p)[i];
  }
  return out;
}

// (u . grad) v for vector fields with spectral v.
RealField convection(const RealField& u, const SpectralField& v, Fft& fft) {
  const PeriodicGrid& g = *u.grid;
  RealField out = RealField::zeros(u.grid, 3);
  for (int c = 0; c < 3; ++c) {
    const RealField grad = fft.backward(gradient(v.component(c)));
    for (int a = 0; a < g.dim(); ++a) {
      for (std::size_t i = 0; i < g.real_size(); ++i) out.comp(c)[i] += u.comp(a)[i] * grad.comp(a)[i];
    }
  }
  return out;
}

SpectralField perturbed_b(const SimState& s) {
  SpectralField h = s.b;
  for (int a = 0; a < 3; ++a) h.comp(a)[0] -= s.params.b_bar()[a];
  return h;
}

SpectralField enthalpy_field(const SimState& s, Fft& fft) {
  const ModelParams& p = s.params;
  SpectralField n = to_spectral(fft, map_real(fft.backward(s.rho), [&](double r) { return enthalpy(p, r); }));
  n.data[0] = 0.0;
  return n;
}

SpectralField zero_mean(SpectralField f) {
  for (int c = 0; c < f.ncomp; ++c) f.comp(c)[0] = 0.0;
  return f;
}

}  // namespace

SpectralField effective_velocity(const SimState& s) {
  Fft fft(s.grid);
  SpectralField z = s.u + gradient(enthalpy_field(s, fft)) + s.e;
  SpectralField ub = cross_const(s.u, s.params.b_bar());
  ub *= s.params.epsilon();
  z += ub;
  return z;
}

RealField effective_velocity_physical(const SimState& s, Fft& fft) {
  const ModelParams& p = s.params;
  const RealField rho = fft.backward(s.rho);
  const RealField grad_rho = fft.backward(gradient(s.rho));
  RealField z = fft.backward(s.u);
  const RealField e = fft.backward(s.e);
  const Vec3& bb = p.b_bar();
  const double eps = p.epsilon();
  const std::size_t nr = s.grid->real_size();
  RealField out = RealField::zeros(s.grid, 3);
  for (std::size_t i = 0; i < nr; ++i) {
    const double hp = p.law().dpressure(rho.data[i]) / rho.data[i];
    const Vec3 u{z.comp(0)[i], z.comp(1)[i], z.comp(2)[i]};
    const Vec3 ub = cross(u, bb);
    for (int a = 0; a < 3; ++a) out.comp(a)[i] = u[a] + hp * grad_rho.comp(a)[i] + e.comp(a)[i] + eps * ub[a];
  }
  return out;
}

double InitialLayer::decay(double t) const { return std::exp(-t / (epsilon * epsilon)); }

InitialLayer layers(const SimState& initial) {
  InitialLayer l;
  l.epsilon = initial.params.epsilon();
  l.z0 = effective_velocity(initial);
  l.u0_over_eps = initial.u;
  return l;
}

LayerFields evaluate_layer(const InitialLayer& layer, double t) {
  const double d = layer.decay(t);
  return LayerFields{d * layer.z0, d * layer.u0_over_eps};
}

InitialLayer zero_layer(const GridPtr& grid, double epsilon) {
  return InitialLayer{epsilon, SpectralField::zeros(grid, 3), SpectralField::zeros(grid, 3)};
}

LimitFields limit_fields(const DDState& dd) {
  const ModelParams& p = dd.params;
  const double mean = dd.rho.data[0].real();
  if (std::abs(mean - p.rho_bar()) > 1e-12 * p.rho_bar() || std::abs(dd.rho.data[0].imag()) > 1e-12) {
    std::ostringstream os;
    os << "limit_fields: mean density " << mean << " differs from rho_bar = " << p.rho_bar();
    throw ArgumentError(os.str());
  }
  Fft fft(dd.grid);
  LimitFields f;
  f.rho_star = dd.rho;
  SpectralField drho = dd.rho;
  drho.data[0] = 0.0;
  f.phi_star = inverse_neg_laplacian(drho);
  f.e_star = gradient(f.phi_star);
  const RealField rho = fft.backward(dd.rho);
  SpectralField h = to_spectral(fft, map_real(rho, [&](double r) { return enthalpy(p, r); }));
  h.data[0] = 0.0;
  f.u_star = gradient(h + f.phi_star);
  f.u_star *= -1.0;
  f.b_star = SpectralField::zeros(dd.grid, 3);
  for (int a = 0; a < 3; ++a) f.b_star.comp(a)[0] = p.b_bar()[a];
  const SpectralField flux = to_spectral(fft, scale_vector(rho, fft.backward(f.u_star)));
  f.b_one_star = inverse_neg_laplacian(curl(flux));
  f.b_one_star *= -1.0;
  return f;
}

const std::vector<std::string>& ErrorNorms::names() {
  static const std::vector<std::string> n{"rho_sup", "rho_l2",   "u_l2",     "e_sup",   "e_l2",
                                          "b_sup",   "b_l2",     "bmod_sup", "bmod_l2", "z_l2"};
  return n;
}

std::vector<double> ErrorNorms::values() const {
  return {rho_sup, rho_l2, u_l2, e_sup, e_l2, b_sup, b_l2, bmod_sup, bmod_l2, z_l2};
}

ErrorAccumulator::ErrorAccumulator(const BandPartition& part, InitialLayer layer)
    : part_(part), layer_(std::move(layer)) {}

void ErrorAccumulator::push(const SimState& em, const DDState& dd) {
  require_same_grid(em.grid, part_.grid(), "ErrorAccumulator::push");
  require_same_grid(dd.grid, part_.grid(), "ErrorAccumulator::push");
  if (std::abs(em.time - dd.time) > 1e-9 * std::max(1.0, std::abs(em.time))) {
    throw ArgumentError("ErrorAccumulator::push: EM and DD samples at different times");
  }
  const LimitFields lim = limit_fields(dd);
  const LayerFields lay = evaluate_layer(layer_, em.time);
  const SpectralField d_rho = em.rho - lim.rho_star;
  const SpectralField d_u = em.u - lim.u_star - lay.u;
  const SpectralField d_e = em.e - lim.e_star;
  const SpectralField d_b = em.b - lim.b_star;
  const SpectralField d_bmod = d_b + em.params.epsilon() * lim.b_one_star;
  const SpectralField d_z = effective_velocity(em) - lay.z;
  const SpectralField* f[6] = {&d_rho, &d_u, &d_e, &d_b, &d_bmod, &d_z};
  double inst[6];
  for (int i = 0; i < 6; ++i) {
    const BandNorms b = band_norms(*f[i], part_);
    acc_[i].push(em.time, b);
    inst[i] = besov_norm(b, 0.5);
  }
  series_.push_back(ErrorSample{em.time, inst[0], inst[1], inst[2], inst[3], inst[4], inst[5]});
}

ErrorNorms ErrorAccumulator::result() const {
  ErrorNorms n;
  n.horizon = acc_[0].horizon();
  if (acc_[0].count() == 0) return n;
  n.rho_sup = besov_norm(acc_[0].sup(), 0.5);
  n.rho_l2 = hybrid_norm(acc_[0].l2(), 0.5, 1.5);
  n.u_l2 = besov_norm(acc_[1].l2(), 0.5);
  n.e_sup = besov_norm(acc_[2].sup(), 0.5);
  n.e_l2 = besov_norm(acc_[2].l2(), 0.5);
  n.b_sup = besov_norm(acc_[3].sup(), 0.5);
  n.b_l2 = hybrid_norm(acc_[3].l2(), 1.5, 0.5);
  n.bmod_sup = besov_norm(acc_[4].sup(), 0.5);
  n.bmod_l2 = hybrid_norm(acc_[4].l2(), 1.5, 0.5);
  n.z_l2 = besov_norm(acc_[5].l2(), 0.5);
  return n;
}

ErrorNorms error_norms(const std::vector<SimState>& em, const std::vector<DDState>& dd, const BandPartition& part,
                       const InitialLayer& layer) {
  if (em.size() != dd.size()) throw ArgumentError("error_norms: trajectories differ in length");
  ErrorAccumulator acc(part, layer);
  for (std::size_t i = 0; i < em.size(); ++i) acc.push(em[i], dd[i]);
  return acc.result();
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("fit_loglog: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  SlopeFit f;
  f.points = lx.size();
  if (lx.size() < 2) {
    f.slope = f.intercept = f.stderr_slope = f.residual = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ArgumentError("fit_loglog: abscissae are all equal");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ssr += r * r;
  }
  f.residual = std::sqrt(ssr / n);
  f.stderr_slope = lx.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : std::numeric_limits<double>::quiet_NaN();
  return f;
}

std::vector<SlopeFit> fit_rows(const std::vector<double>& eps, const std::vector<ErrorNorms>& rows) {
  if (eps.size() != rows.size()) throw ArgumentError("fit_rows: size mismatch");
  const std::size_t k = ErrorNorms::names().size();
  std::vector<SlopeFit> out;
  for (std::size_t q = 0; q < k; ++q) {
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(r.values()[q]);
    out.push_back(fit_loglog(eps, y));
  }
  return out;
}

namespace {

double run_step(double eps, const StudyConfig& cfg) {
  const double target = std::min(cfg.dt, eps * eps / cfg.layer_steps);
  const double steps = std::ceil(cfg.horizon / target - 1e-9);
  return cfg.horizon / steps;
}

RelaxRow study_one(double eps, const StudyConfig& cfg) {
  RelaxRow row;
  row.epsilon = eps;
  try {
    const GridPtr grid = make_grid(cfg.dim, cfg.n, cfg.length);
    const ModelParams p = cfg.base.with_epsilon(eps);
    InitialData init = make_initial(grid, p, cfg.initial);
    const BandPartition part(grid, eps);
    row.dt = run_step(eps, cfg);
    const double t_end = cfg.double_horizon ? 2.0 * cfg.horizon : cfg.horizon;
    const StepperConfig sc{row.dt, t_end, true};
    const std::size_t total = step_count(sc);
    const std::size_t half = step_count(StepperConfig{row.dt, cfg.horizon, true});
    if (half % cfg.sample_every != 0) {
      throw ArgumentError("convergence_study: sample_every must divide the step count to the horizon");
    }
    EmStepper em_step(grid, p, sc);
    DdStepper dd_step(grid, p, sc);
    ErrorAccumulator acc(part, layers(init.em));
    SimState& em = init.em;
    DDState& dd = init.dd;
    acc.push(em, dd);
    for (std::size_t i = 1; i <= total; ++i) {
      em_step.step(em);
      dd_step.step(dd);
      em.time = dd.time = static_cast<double>(i) * row.dt;
      ++row.steps;
      if (i % cfg.sample_every == 0) acc.push(em, dd);
      if (i == half) {
        row.at_t = acc.result();
        row.series = acc.series();
      }
    }
    row.at_2t = cfg.double_horizon ? acc.result() : row.at_t;
  } catch (const NumericalAbort& e) {
    row.ok = false;
    row.failure = e.kind() + ": " + e.what();
  } catch (const DomainError& e) {
    row.ok = false;
    row.failure = std::string("domain: ") + e.what();
  }
  return row;
}

}  // namespace

RelaxReport convergence_study(const std::vector<double>& eps_list, const StudyConfig& cfg) {
  if (eps_list.size() < 3) throw ArgumentError("convergence_study: need at least three epsilon values");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0)) throw ArgumentError("convergence_study: epsilon must lie in (0, 1]");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw ArgumentError("convergence_study: epsilon list must be strictly descending");
    }
  }
  if (cfg.sample_every == 0) throw ArgumentError("convergence_study: sample_every must be positive");
  if (!(cfg.horizon > 0.0)) throw ArgumentError("convergence_study: horizon must be positive");
  RelaxReport rep;
  rep.rows.resize(eps_list.size());
  parallel_for(eps_list.size(), [&](std::size_t i) { rep.rows[i] = study_one(eps_list[i], cfg); });
  std::vector<double> eps;
  std::vector<ErrorNorms> at_t, at_2t;
  for (const auto& r : rep.rows) {
    if (!r.ok) continue;
    eps.push_back(r.epsilon);
    at_t.push_back(r.at_t);
    at_2t.push_back(r.at_2t);
  }
  rep.slopes = fit_rows(eps, at_t);
  rep.slopes_2t = fit_rows(eps, at_2t);
  return rep;
}

ResidualReport zeq_residual(const SimState& prev, const SimState& cur, const SimState& next) {
  require_same_grid(prev.grid, cur.grid, "zeq_residual");
  require_same_grid(next.grid, cur.grid, "zeq_residual");
  const double span = next.time - prev.time;
  if (!(span > 0.0)) throw ArgumentError("zeq_residual: samples must be increasing in time");
  const ModelParams& p = cur.params;
  const double eps = p.epsilon();
  const Vec3& bb = p.b_bar();
  Fft fft(cur.grid);

  const SpectralField z = effective_velocity(cur);
  SpectralField dz = effective_velocity(next) - effective_velocity(prev);
  dz *= 1.0 / span;
  SpectralField dn = enthalpy_field(next, fft) - enthalpy_field(prev, fft);
  dn *= 1.0 / span;
  const SpectralField grad_dn = gradient(dn);
  SpectralField de = next.e - prev.e;
  de *= 1.0 / span;

  const RealField u = fft.backward(cur.u);
  const RealField hr = fft.backward(perturbed_b(cur));
  const SpectralField conv = to_spectral(fft, convection(u, cur.u, fft));
  const SpectralField uxh = to_spectral(fft, cross_real(u, hr));
  SpectralField f = -1.0 * conv;
  f -= (1.0 / eps) * uxh;
  f -= eps * cross_const(conv, bb);
  f -= cross_const(uxh, bb);

  const SpectralField damp = (1.0 / (eps * eps)) * z;
  const SpectralField rot = (1.0 / eps) * cross_const(z, bb);
  const SpectralField res = dz + damp + rot - grad_dn - de - f;

  ResidualReport r;
  r.residual = l2_norm(res);
  r.terms = {{"d_t z", l2_norm(dz)},           {"z / eps^2", l2_norm(damp)}, {"z x B / eps", l2_norm(rot)},
             {"grad d_t n", l2_norm(grad_dn)}, {"d_t E", l2_norm(de)},       {"F", l2_norm(f)}};
  for (const auto& t : r.terms) r.scale = std::max(r.scale, t.second);
  return r;
}

ResidualReport delta_rho_residual(const SimState& em_prev, const SimState& em_cur, const SimState& em_next,
                                  const DDState& dd_prev, const DDState& dd_cur, const DDState& dd_next,
                                  const InitialLayer& layer) {
  const double span = em_next.time - em_prev.time;
  if (!(span > 0.0)) throw ArgumentError("delta_rho_residual: samples must be increasing in time");
  if (std::abs((dd_next.time - dd_prev.time) - span) > 1e-9 * span ||
      std::abs(em_cur.time - dd_cur.time) > 1e-9 * std::max(1.0, em_cur.time)) {
    throw ArgumentError("delta_rho_residual: EM and DD samples at different times");
  }
  require_same_grid(em_cur.grid, dd_cur.grid, "delta_rho_residual");
  const ModelParams& p = em_cur.params;
  const double eps = p.epsilon();
  const double rb = p.rho_bar();
  const double pb = p.pprime_bar();
  const PeriodicGrid& g = *em_cur.grid;
  Fft fft(em_cur.grid);

  SpectralField drho = em_cur.rho - dd_cur.rho;
  SpectralField dt_drho = (em_next.rho - dd_next.rho) - (em_prev.rho - dd_prev.rho);
  dt_drho *= 1.0 / span;
  SpectralField lap = SpectralField::zeros(em_cur.grid, 1);
  for (std::size_t m = 0; m < g.spec_size(); ++m) lap.data[m] = pb * g.knorm(m) * g.knorm(m) * drho.data[m];
  const SpectralField damp = rb * drho;

  const LimitFields lim = limit_fields(dd_cur);
  const LayerFields lay = evaluate_layer(layer, em_cur.time);
  const SpectralField z = effective_velocity(em_cur);
  const SpectralField z_tilde = z - lay.z;

  const RealField rho = fft.backward(em_cur.rho);
  const RealField rho_s = fft.backward(dd_cur.rho);
  const RealField u = fft.backward(em_cur.u);
  const RealField e = fft.backward(em_cur.e);
  const RealField de = fft.backward(em_cur.e - lim.e_star);
  const RealField grad_rho = fft.backward(gradient(em_cur.rho));
  const RealField grad_drho = fft.backward(gradient(drho));
  const std::size_t nr = g.real_size();

  RealField delta_f = RealField::zeros(em_cur.grid, 3);
  for (int a = 0; a < 3; ++a) {
    for (std::size_t i = 0; i < nr; ++i) {
      const double pe = p.law().dpressure(rho.data[i]);
      const double ps = p.law().dpressure(rho_s.data[i]);
      delta_f.comp(a)[i] = (pe - ps) * grad_rho.comp(a)[i] + (ps - pb) * grad_drho.comp(a)[i] +
                           (rho.data[i] - rho_s.data[i]) * e.comp(a)[i] + (rho_s.data[i] - rb) * de.comp(a)[i];
    }
  }
  const SpectralField rho_zl = to_spectral(fft, scale_vector(rho, fft.backward(lay.z)));
  const SpectralField rho_zt = to_spectral(fft, scale_vector(rho, fft.backward(z_tilde)));
  SpectralField rho_uxb = to_spectral(fft, scale_vector(rho, fft.backward(cross_const(em_cur.u, p.b_bar()))));
  rho_uxb *= eps;
  const SpectralField f1 = -1.0 * divergence(rho_zl);
  const SpectralField f2 = divergence(rho_uxb - rho_zt + to_spectral(fft, delta_f));

  const SpectralField res = zero_mean(dt_drho + lap + damp - f1 - f2);
  ResidualReport r;
  r.residual = l2_norm(res);
  r.terms = {{"d_t delta rho", l2_norm(dt_drho)}, {"P' Laplacian", l2_norm(lap)}, {"rho_bar delta rho", l2_norm(damp)},
             {"F1", l2_norm(f1)},                 {"F2", l2_norm(f2)}};
  for (const auto& t : r.terms) r.scale = std::max(r.scale, t.second);
  return r;
}

}  // namespace emrelax
