#include "emrelax/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "emrelax/parallel.hpp"

namespace emrelax {

namespace {

constexpr cplx kI{0.0, 1.0};

// Levi-Civita symbol on {0, 1, 2}.
int levi(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

// Square root of diag(1, P' eps^2, 1/K, 1/K), the conserved-energy weights.
Eigen::Matrix<double, 10, 1> energy_scaling(const ModelParams& p) {
  Eigen::Matrix<double, 10, 1> w;
  w(kN) = 1.0;
  for (int k = 0; k < 3; ++k) {
    w(kU + k) = std::sqrt(p.pprime_bar()) * p.epsilon();
    w(kE + k) = 1.0 / std::sqrt(p.kay());
    w(kH + k) = 1.0 / std::sqrt(p.kay());
  }
  return w;
}

}  // namespace

Vec10c FourierState::to_vector() const {
  Vec10c v;
  v(kN) = n;
  for (int k = 0; k < 3; ++k) {
    v(kU + k) = u[k];
    v(kE + k) = e[k];
    v(kH + k) = h[k];
  }
  return v;
}

FourierState FourierState::from_vector(const Vec10c& v) {
  FourierState s;
  s.n = v(kN);
  for (int k = 0; k < 3; ++k) {
    s.u[k] = v(kU + k);
    s.e[k] = v(kE + k);
    s.h[k] = v(kH + k);
  }
  return s;
}

SymbolMatrix assemble_symbol(const ModelParams& params, const Vec3& xi) {
  const double eps = params.epsilon();
  const double inv_eps = 1.0 / eps;
  const double inv_eps2 = inv_eps * inv_eps;
  const Vec3& b = params.b_bar();
  Mat10c m = Mat10c::Zero();
  for (int a = 0; a < 3; ++a) {
    m(kN, kU + a) = -params.pprime_bar() * kI * xi[a];
    m(kU + a, kN) = -kI * xi[a] * inv_eps2;
    m(kU + a, kU + a) = -inv_eps2;
    m(kU + a, kE + a) = -inv_eps2;
    m(kE + a, kU + a) = params.rho_bar();
    for (int bb = 0; bb < 3; ++bb) {
      for (int c = 0; c < 3; ++c) {
        const int s = levi(a, bb, c);
        if (s == 0) continue;
        // -(u x b_bar)_a / eps
        m(kU + a, kU + bb) -= s * b[c] * inv_eps;
        // (i xi x h)_a / eps and -(i xi x e)_a / eps
        m(kE + a, kH + c) += kI * (s * xi[bb] * inv_eps);
        m(kH + a, kE + c) -= kI * (s * xi[bb] * inv_eps);
      }
    }
  }
  return {m, xi, params};
}

Mat10c propagator(const SymbolMatrix& sym, double t) {
  if (!std::isfinite(t)) throw ArgumentError("propagate: time must be finite");
  if (t == 0.0) return Mat10c::Identity();
  // In energy-symmetrized coordinates the generator is skew-Hermitian plus a
  // negative semidefinite damping, which keeps scaling and squaring accurate
  // even when the damping is stiff.
  const auto w = energy_scaling(sym.params);
  const Mat10c ms = w.asDiagonal() * sym.m * w.cwiseInverse().asDiagonal();
  const Mat10c es = expm(Mat10c(t * ms));
  return w.cwiseInverse().asDiagonal() * es * w.asDiagonal();
}

FourierState propagate(const SymbolMatrix& sym, const FourierState& u0, double t) {
  return FourierState::from_vector(propagator(sym, t) * u0.to_vector());
}

Eigen::Matrix<double, 10, 1> weight_diagonal(const ModelParams& params) {
  Eigen::Matrix<double, 10, 1> w = Eigen::Matrix<double, 10, 1>::Ones();
  const double e2 = params.epsilon() * params.epsilon();
  for (int k = 0; k < 3; ++k) w(kU + k) = e2;
  return w;
}

double weighted_norm(const ModelParams& params, const Vec10c& u) {
  return (weight_diagonal(params).array() * u.array().abs2()).sum();
}

double weighted_norm(const ModelParams& params, const FourierState& u) {
  return weighted_norm(params, u.to_vector());
}

double gauss_residual(const ModelParams& params, const Vec3& xi, const FourierState& u) {
  cplx div_e = 0.0;
  cplx div_h = 0.0;
  for (int k = 0; k < 3; ++k) {
    div_e += kI * xi[k] * u.e[k];
    div_h += xi[k] * u.h[k];
  }
  return std::abs(div_e + params.kay() * u.n) + std::abs(div_h);
}

MatXc gauss_basis(const ModelParams& params, const Vec3& xi) {
  Eigen::Matrix<cplx, 2, 10> c = Eigen::Matrix<cplx, 2, 10>::Zero();
  c(0, kN) = params.kay();
  for (int k = 0; k < 3; ++k) {
    c(0, kE + k) = kI * xi[k];
    c(1, kH + k) = xi[k];
  }
  const int rank = norm2(xi) > 0.0 ? 2 : 1;
  Eigen::JacobiSVD<MatXc> svd(MatXc(c), Eigen::ComputeFullV);
  return svd.matrixV().rightCols(10 - rank);
}

double decay_weight(double epsilon, double xi_norm) {
  const double x2 = xi_norm * xi_norm;
  return x2 / ((1.0 + epsilon * epsilon * x2) * (1.0 + x2));
}

namespace {

MatXc restricted(const SymbolMatrix& sym, const MatXc& basis) {
  return basis.adjoint() * sym.m * basis;
}

}  // namespace

double slowest_rate(const SymbolMatrix& sym) {
  const MatXc basis = gauss_basis(sym.params, sym.xi);
  Eigen::ComplexEigenSolver<MatXc> es(restricted(sym, basis), false);
  double abscissa = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    abscissa = std::max(abscissa, es.eigenvalues()(i).real());
  }
  return -abscissa;
}

double fit_decay_constant(const std::vector<PointwiseSample>& samples, double c_cap) {
  if (samples.empty()) return 0.0;
  const double log_cap = std::log(c_cap);
  auto log_c = [&](double c0) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) best = std::max(best, std::log(s.ratio) + c0 * s.weight * s.t);
    return best;
  };
  if (log_c(0.0) > log_cap) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  constexpr double kCeiling = 1e6;
  while (log_c(hi) <= log_cap) {
    lo = hi;
    hi *= 2.0;
    if (hi > kCeiling) return lo;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_c(mid) <= log_cap ? lo : hi) = mid;
  }
  return lo;
}

PointwiseReport verify_pointwise(const std::vector<ModelParams>& params_list,
                                 const std::vector<Vec3>& xi_grid, const std::vector<double>& t_grid,
                                 const PointwiseOptions& opts) {
  if (params_list.empty() || xi_grid.empty() || t_grid.empty()) {
    throw ArgumentError("verify_pointwise: empty epsilon, xi or t grid");
  }
  if (opts.trials == 0) throw ArgumentError("verify_pointwise: trials must be >= 1");
  for (double t : t_grid) {
    if (!std::isfinite(t) || t < 0.0) throw ArgumentError("verify_pointwise: times must be finite and >= 0");
  }
  const std::size_t nx = xi_grid.size();
  const std::size_t nt = t_grid.size();
  std::vector<PointwiseSample> samples(params_list.size() * nx * nt);

  parallel_for(params_list.size() * nx, [&](std::size_t idx) {
    const std::size_t ie = idx / nx;
    const std::size_t ix = idx % nx;
    const ModelParams& p = params_list[ie];
    const SymbolMatrix sym = assemble_symbol(p, xi_grid[ix]);
    const MatXc basis = gauss_basis(p, sym.xi);
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(ie), static_cast<std::uint32_t>(ix)};
    std::mt19937_64 rng(seq);
    std::vector<Mat10c> props(nt);
    for (std::size_t it = 0; it < nt; ++it) props[it] = propagator(sym, t_grid[it]);
    std::vector<double> worst(nt, 0.0);
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
      const Vec10c u0 = random_compatible_state(p, basis, rng);
      const double w0 = weighted_norm(p, u0);
      for (std::size_t it = 0; it < nt; ++it) {
        worst[it] = std::max(worst[it], weighted_norm(p, Vec10c(props[it] * u0)) / w0);
      }
    }
    const double xn = std::sqrt(norm2(sym.xi));
    for (std::size_t it = 0; it < nt; ++it) {
      samples[idx * nt + it] = {p.epsilon(), sym.xi, t_grid[it], worst[it], decay_weight(p.epsilon(), xn)};
    }
  });

  PointwiseReport rep;
  rep.c_cap = opts.c_cap;
  rep.c0_fit = fit_decay_constant(samples, opts.c_cap);
  double best = -1.0;
  for (const auto& s : samples) {
    const double v = s.ratio * std::exp(rep.c0_fit * s.weight * s.t);
    if (v > best) {
      best = v;
      rep.worst = s;
    }
  }
  rep.c_fit = best;
  rep.satisfied = rep.c0_fit > 0.0 && rep.c_fit <= opts.c_cap;
  rep.samples = std::move(samples);
  return rep;
}

PointwiseReport verify_pointwise(const ModelParams& params, const std::vector<Vec3>& xi_grid,
                                 const std::vector<double>& t_grid, const PointwiseOptions& opts) {
  return verify_pointwise(std::vector<ModelParams>{params}, xi_grid, t_grid, opts);
}

std::vector<Vec3> default_directions() {
  const double s3 = 1.0 / std::sqrt(3.0);
  const double o = 1.0 / std::sqrt(1.0 + 4.0 + 9.0);
  return {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {s3, s3, s3}, {o, 2.0 * o, 3.0 * o}};
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (!(lo > 0.0) || !(hi >= lo)) throw ArgumentError("log_space: need 0 < lo <= hi");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("loglog_slope: need >= 2 paired points");
  double mx = 0.0;
  double my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

namespace {

std::string regime_label(double xi_norm, double eps) {
  if (xi_norm <= 0.1) return "low";
  if (xi_norm >= 10.0 / eps) return "high";
  if (xi_norm >= 10.0 && xi_norm <= 0.1 / eps) return "medium";
  return "buffer";
}

std::string slope_tag(double s) {
  if (!std::isfinite(s)) return "none";
  if (std::abs(s - 2.0) < 0.3) return "heat";
  if (std::abs(s) < 0.3) return "damped";
  if (std::abs(s + 2.0) < 0.3) return "loss";
  return "transition";
}

}  // namespace

std::vector<RegimeRow> regime_rates(const ModelParams& params, const std::vector<double>& xi_norms,
                                    const std::vector<Vec3>& directions) {
  if (directions.empty()) throw ArgumentError("regime_rates: need at least one direction");
  for (double x : xi_norms) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ArgumentError("regime_rates: |xi| must be positive and finite");
  }
  const double eps = params.epsilon();
  const auto wdiag = weight_diagonal(params);
  std::vector<RegimeRow> rows(xi_norms.size());
  parallel_for(xi_norms.size(), [&](std::size_t i) {
    RegimeRow row;
    row.xi_norm = xi_norms[i];
    row.rate = std::numeric_limits<double>::infinity();
    row.regime = regime_label(row.xi_norm, eps);
    std::array<double, 4> comp;
    comp.fill(std::numeric_limits<double>::infinity());
    for (const Vec3& d : directions) {
      const double dn = std::sqrt(norm2(d));
      const Vec3 xi{d[0] / dn * row.xi_norm, d[1] / dn * row.xi_norm, d[2] / dn * row.xi_norm};
      const SymbolMatrix sym = assemble_symbol(params, xi);
      const MatXc basis = gauss_basis(params, xi);
      Eigen::ComplexEigenSolver<MatXc> es(restricted(sym, basis));
      const MatXc modes = basis * es.eigenvectors();
      for (Eigen::Index k = 0; k < modes.cols(); ++k) {
        const double rate = -es.eigenvalues()(k).real();
        row.rate = std::min(row.rate, rate);
        const Eigen::VectorXd mass = wdiag.array() * modes.col(k).array().abs2();
        const double total = mass.sum();
        const std::array<double, 4> part{mass(kN), mass.segment(kU, 3).sum(), mass.segment(kE, 3).sum(),
                                         mass.segment(kH, 3).sum()};
        for (int c = 0; c < 4; ++c) {
          if (part[c] >= 0.01 * total) comp[c] = std::min(comp[c], rate);
        }
      }
    }
    for (int c = 0; c < 4; ++c) row.components[c].rate = comp[c];
    rows[i] = row;
  });
  // Local log-log slopes of each component rate tag its behavior.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 < rows.size() ? i + 1 : i;
    for (int c = 0; c < 4; ++c) {
      double s = std::numeric_limits<double>::quiet_NaN();
      const double ra = rows[a].components[c].rate;
      const double rb = rows[b].components[c].rate;
      if (a != b && std::isfinite(ra) && std::isfinite(rb) && ra > 0.0 && rb > 0.0) {
        s = std::log(rb / ra) / std::log(rows[b].xi_norm / rows[a].xi_norm);
      }
      rows[i].components[c].tag = slope_tag(s);
    }
  }
  return rows;
}

}  // namespace emrelax
