#pragma once

// Effective velocity, initial layers, drift-diffusion limit fields and the
// error norms of the relaxation limit, with the eps-sweep that fits their rates.

#include <string>
#include <vector>

#include "emrelax/bands.hpp"
#include "emrelax/solver.hpp"

namespace emrelax {

/// z = u + grad h(rho) + e + eps u x b_bar, spectrally (h(rho) dealiased).
SpectralField effective_velocity(const SimState& s);
/// Same quantity evaluated pointwise with grad h(rho) = P'(rho)/rho grad rho; returned as real samples.
RealField effective_velocity_physical(const SimState& s, Fft& fft);

struct InitialLayer {
  double epsilon = 1.0;
  /// u0/eps + grad h(rho0) + e0 + u0 x b_bar
  SpectralField z0;
  SpectralField u0_over_eps;

  double decay(double t) const;
};

struct LayerFields {
  SpectralField z;
  SpectralField u;
};

/// Built from the state at t = 0, whose velocity is u0/eps.
InitialLayer layers(const SimState& initial);
/// z_L(t) = e^{-t/eps^2} z0 and u_L(t) = e^{-t/eps^2} u0/eps.
LayerFields evaluate_layer(const InitialLayer& layer, double t);
/// Layer with both corrections zero (for comparisons without a layer).
InitialLayer zero_layer(const GridPtr& grid, double epsilon);

struct LimitFields {
  SpectralField rho_star;
  SpectralField phi_star;
  /// -grad(h(rho*) + phi*)
  SpectralField u_star;
  /// grad(-Delta)^{-1}(rho* - rho_bar)
  SpectralField e_star;
  /// constant b_bar
  SpectralField b_star;
  /// -(-Delta)^{-1} curl(rho* u*)
  SpectralField b_one_star;
};

/// Throws ArgumentError when mean(rho*) differs from rho_bar.
LimitFields limit_fields(const DDState& dd);

/// One row of error norms. sup_* are sup in time, l2_* are L2 in time with
/// per-band time norms (Chemin-Lerner).
struct ErrorNorms {
  double rho_sup = 0.0;   // delta rho, B^{1/2}
  double rho_l2 = 0.0;    // delta rho, B^{1/2,3/2}
  double u_l2 = 0.0;      // delta u - u_L, B^{1/2}
  double e_sup = 0.0;     // delta E, B^{1/2}
  double e_l2 = 0.0;      // delta E, B^{1/2}
  double b_sup = 0.0;     // delta B, B^{1/2}
  double b_l2 = 0.0;      // delta B, B^{3/2,1/2}
  double bmod_sup = 0.0;  // delta B + eps B^{1,*}, B^{1/2}
  double bmod_l2 = 0.0;   // delta B + eps B^{1,*}, B^{3/2,1/2}
  double z_l2 = 0.0;      // z - z_L, B^{1/2}
  double horizon = 0.0;

  static const std::vector<std::string>& names();
  std::vector<double> values() const;
};

/// Instantaneous B^{1/2} norms of the error quantities at one sample.
struct ErrorSample {
  double t;
  double rho, u, e, b, bmod, z;
};

/// Streams paired EM/DD states sampled at a uniform spacing.
class ErrorAccumulator {
 public:
  ErrorAccumulator(const BandPartition& part, InitialLayer layer);

  void push(const SimState& em, const DDState& dd);
  ErrorNorms result() const;
  const std::vector<ErrorSample>& series() const { return series_; }

 private:
  BandPartition part_;
  InitialLayer layer_;
  // rho, u - u_L, E, B, B_mod, z - z_L
  TimeNormAccumulator acc_[6];
  std::vector<ErrorSample> series_;
};

/// Whole-trajectory variant; trajectories must share grid and sample times.
ErrorNorms error_norms(const std::vector<SimState>& em, const std::vector<DDState>& dd, const BandPartition& part,
                       const InitialLayer& layer);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  /// Root-mean-square residual of the log-log fit.
  double residual = 0.0;
  std::size_t points = 0;
};

/// Least squares of log y against log x; NaN slope if fewer than two positive points.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct StudyConfig {
  int dim = 1;
  int n = 256;
  double length = 4.0;
  /// Epsilon is replaced per run.
  ModelParams base;
  InitialSpec initial;
  /// Step bound; each run uses the largest step <= min(dt, eps^2 / layer_steps) dividing the horizon.
  double dt = 1e-3;
  double layer_steps = 10.0;
  double horizon = 2.0;
  /// Also integrate to twice the horizon and report those norms.
  bool double_horizon = true;
  std::size_t sample_every = 1;
};

struct RelaxRow {
  double epsilon = 0.0;
  bool ok = true;
  std::string failure;
  double dt = 0.0;
  std::size_t steps = 0;
  ErrorNorms at_t;
  ErrorNorms at_2t;
  std::vector<ErrorSample> series;
};

struct RelaxReport {
  std::vector<RelaxRow> rows;
  /// One fit per ErrorNorms::names() entry, over successful rows.
  std::vector<SlopeFit> slopes;
  std::vector<SlopeFit> slopes_2t;
};

/// Requires at least three strictly descending epsilons in (0, 1].
RelaxReport convergence_study(const std::vector<double>& eps_list, const StudyConfig& cfg);

/// Slopes of ErrorNorms fields fitted over the given rows.
std::vector<SlopeFit> fit_rows(const std::vector<double>& eps, const std::vector<ErrorNorms>& rows);

struct ResidualReport {
  double residual = 0.0;
  /// Largest L2 norm among the individual terms.
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? residual / scale : residual; }
  std::vector<std::pair<std::string, double>> terms;
};

/// Residual of the damped effective-velocity equation at cur, with central time differences.
ResidualReport zeq_residual(const SimState& prev, const SimState& cur, const SimState& next);

/// Residual of the density-error equation at the middle sample of paired trajectories.
ResidualReport delta_rho_residual(const SimState& em_prev, const SimState& em_cur, const SimState& em_next,
                                  const DDState& dd_prev, const DDState& dd_cur, const DDState& dd_next,
                                  const InitialLayer& layer);

}  // namespace emrelax
