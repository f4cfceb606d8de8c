#pragma once

// Pseudo-spectral time integration of the rescaled Euler-Maxwell system and
// of the drift-diffusion limit on periodic grids.
//
// Linear parts are integrated exactly per Fourier mode; the remaining terms
// use second-order exponential Runge-Kutta (ETDRK2) with 2/3 dealiasing.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "emrelax/grid.hpp"
#include "emrelax/linalg.hpp"
#include "emrelax/model.hpp"

namespace emrelax {

/// Fields in spectral form. rho and b hold the full density and magnetic
/// field (their zero modes carry rho_bar and b_bar); u is the rescaled velocity.
struct SimState {
  GridPtr grid;
  ModelParams params;
  double time = 0.0;
  SpectralField rho;
  SpectralField u;
  SpectralField e;
  SpectralField b;
};

struct DDState {
  GridPtr grid;
  ModelParams params;
  double time = 0.0;
  SpectralField rho;
  /// Zero-mean potential with -Delta phi = rho - rho_bar.
  SpectralField phi;
};

struct StepperConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  bool dealias = true;
};

/// Exact linear propagation plus ETDRK2 for the Euler-Maxwell system. Holds
/// the per-mode exponential tables for one (grid, params, dt).
class EmStepper {
 public:
  EmStepper(GridPtr grid, const ModelParams& params, const StepperConfig& cfg);
  ~EmStepper();
  EmStepper(const EmStepper&) = delete;
  EmStepper& operator=(const EmStepper&) = delete;

  /// Advances by cfg.dt. Throws NumericalAbort on vacuum or CFL violation;
  /// the state is left untouched in that case.
  void step(SimState& state);

  /// Explicit terms at a state, as 10 spectral components [rho, u, e, b].
  std::vector<cplx> nonlinear_terms(const SimState& state);

  double dt() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class DdStepper {
 public:
  DdStepper(GridPtr grid, const ModelParams& params, const StepperConfig& cfg);
  ~DdStepper();
  DdStepper(const DdStepper&) = delete;
  DdStepper& operator=(const DdStepper&) = delete;

  void step(DDState& state);
  double dt() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SimState step_em(const SimState& state, const StepperConfig& cfg);
DDState step_dd(const DDState& state, const StepperConfig& cfg);

/// Linear generator of one mode in primitive variables [rho', u, e, b'].
Mat10c linear_generator(const ModelParams& params, const Vec3& k);

/// Evolves every mode of s by the linearized flow over time t using the
/// Fourier symbol propagator (n = rho'/K at linear order).
SimState linear_evolution(const SimState& s, double t);

/// Max over modes and components of |a - b| in primitive perturbation variables.
double max_mode_difference(const SimState& a, const SimState& b);

// Constraint and energy diagnostics.

/// ||div e - (rho_bar - rho)|| / ||rho - rho_bar|| (absolute when rho = rho_bar).
double gauss_residual(const SimState& s);
/// ||div b|| / ||b - b_bar|| (absolute when b = b_bar).
double div_b_residual(const SimState& s);
/// Integral of eps^2/2 rho|u|^2 + rho int (P-P_bar)/s^2 + |e|^2/2 + |b-b_bar|^2/2.
double physical_energy(const SimState& s, Fft& fft);
/// Integral of rho |u|^2.
double dissipation_rate(const SimState& s, Fft& fft);
double min_density(const SimState& s, Fft& fft);
/// Largest imaginary residue left after inverse transforms of the state, relative to its magnitude.
double reality_defect(const SimState& s);

SimState equilibrium_state(GridPtr grid, const ModelParams& params);
DDState equilibrium_dd(GridPtr grid, const ModelParams& params);
/// Recomputes phi from rho.
void update_potential(DDState& s);

enum class Prepared { well, ill };

struct InitialSpec {
  /// Dyadic band range of the random data.
  int band_lo = -1;
  int band_hi = 2;
  /// max |rho_0 - rho_bar| (and max |u_0| for ill-prepared data).
  double amplitude = 1e-2;
  std::uint64_t seed = 1;
  Prepared prepared = Prepared::ill;
  /// Transverse parts of e_0 and b_0 - b_bar have max amplitude transverse * eps * amplitude.
  double transverse = 1.0;
  /// rho*_0 = rho_0 + density_mismatch * eps * amplitude * (random zero-mean field).
  double density_mismatch = 0.0;
  /// Ill-prepared velocity max as a multiple of amplitude.
  double velocity = 1.0;
};

struct InitialData {
  SimState em;
  DDState dd;
  /// Unscaled initial velocity; em.u = u0 / eps.
  SpectralField u0;
};

/// Random band-limited zero-mean data satisfying both constraints.
/// Throws DomainError when the density would reach vacuum.
InitialData make_initial(GridPtr grid, const ModelParams& params, const InitialSpec& setup);

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
  /// Time integral of dissipation_rate up to t (trapezoid rule over steps).
  double dissipated = 0.0;
  double gauss = 0.0;
  double div_b = 0.0;
  double min_rho = 0.0;
};

struct RunSchedule {
  /// Observer and energy sample every this many steps (the initial state is always included).
  std::size_t every = 1;
};

struct RunRecord {
  std::vector<EnergySample> samples;
  double energy0 = 0.0;
  /// max_t |E(t) + D(t) - E(0)| / E(0)
  double energy_defect = 0.0;
  double max_gauss = 0.0;
  double max_div_b = 0.0;
  std::size_t steps = 0;
};

/// Called at every sample with the state and its energy record.
using EmObserver = std::function<void(const SimState&, const EnergySample&)>;
using DdObserver = std::function<void(const DDState&)>;

/// Integrates from state.time to cfg.t_end. On NumericalAbort the exception
/// propagates and state holds the last accepted step.
RunRecord run(SimState& state, const StepperConfig& cfg, const RunSchedule& schedule,
              const EmObserver& observer = {});
void run_dd(DDState& state, const StepperConfig& cfg, const RunSchedule& schedule,
            const DdObserver& observer = {});

/// Number of steps needed to reach t_end with cfg.dt (t_end must be a multiple of dt to 1e-9).
std::size_t step_count(const StepperConfig& cfg, double t0 = 0.0);

}  // namespace emrelax
