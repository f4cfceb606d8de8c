#pragma once

// Linearized Fourier generator of the rescaled Euler-Maxwell system at a
// continuous wavevector xi, exact mode propagation, and the pointwise decay
// diagnostics built on it.
//
// State ordering in every 10-vector: [n, u1, u2, u3, e1, e2, e3, h1, h2, h3].

#include <cstdint>
#include <string>
#include <vector>

#include "emrelax/linalg.hpp"
#include "emrelax/model.hpp"

namespace emrelax {

inline constexpr int kN = 0;
inline constexpr int kU = 1;
inline constexpr int kE = 4;
inline constexpr int kH = 7;

struct FourierState {
  cplx n{};
  CVec3 u{};
  CVec3 e{};
  CVec3 h{};

  Vec10c to_vector() const;
  static FourierState from_vector(const Vec10c& v);
};

struct SymbolMatrix {
  Mat10c m;
  Vec3 xi;
  ModelParams params;
};

SymbolMatrix assemble_symbol(const ModelParams& params, const Vec3& xi);

/// exp(t M). Throws ArgumentError for non-finite t.
Mat10c propagator(const SymbolMatrix& sym, double t);

FourierState propagate(const SymbolMatrix& sym, const FourierState& u0, double t);

/// |n|^2 + eps^2 |u|^2 + |e|^2 + |h|^2.
double weighted_norm(const ModelParams& params, const FourierState& u);
double weighted_norm(const ModelParams& params, const Vec10c& u);

/// diag(1, eps^2 I, I, I).
Eigen::Matrix<double, 10, 1> weight_diagonal(const ModelParams& params);

/// |i xi.e + K n| + |xi.h|.
double gauss_residual(const ModelParams& params, const Vec3& xi, const FourierState& u);

/// Orthonormal basis (10 x d) of the Gauss-compatible subspace; d = 8 for
/// xi != 0 and 9 for xi = 0.
MatXc gauss_basis(const ModelParams& params, const Vec3& xi);

/// |xi|^2 / ((1 + eps^2 |xi|^2)(1 + |xi|^2)).
double decay_weight(double epsilon, double xi_norm);

struct DecayEnvelope {
  double c0;
  double epsilon;
  double lambda(double xi_norm) const { return -c0 * decay_weight(epsilon, xi_norm); }
};

/// Minus the spectral abscissa of M restricted to the Gauss-compatible subspace.
double slowest_rate(const SymbolMatrix& sym);

/// Random Gauss-compatible state with weighted_norm = 1.
template <class Rng>
Vec10c random_compatible_state(const ModelParams& params, const MatXc& basis, Rng& rng);

struct PointwiseSample {
  double epsilon = 0.0;
  Vec3 xi{};
  double t = 0.0;
  /// max over trials of weighted_norm(U(t)) / weighted_norm(U(0))
  double ratio = 0.0;
  /// decay_weight(epsilon, |xi|)
  double weight = 0.0;
};

struct PointwiseReport {
  double c0_fit = 0.0;
  /// sup of ratio * exp(c0_fit weight t) over the samples.
  double c_fit = 0.0;
  double c_cap = 0.0;
  bool satisfied = false;
  PointwiseSample worst;
  std::vector<PointwiseSample> samples;
};

struct PointwiseOptions {
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  /// Upper bound on C used to pin down c0.
  double c_cap = 100.0;
};

/// Fits the largest c0 such that every sampled ratio stays below
/// c_cap * exp(-c0 * weight * t), with one c0 shared across all epsilons.
PointwiseReport verify_pointwise(const std::vector<ModelParams>& params_list,
                                 const std::vector<Vec3>& xi_grid, const std::vector<double>& t_grid,
                                 const PointwiseOptions& opts);
PointwiseReport verify_pointwise(const ModelParams& params, const std::vector<Vec3>& xi_grid,
                                 const std::vector<double>& t_grid, const PointwiseOptions& opts);

/// Largest c0 with max_s ratio_s exp(c0 weight_s t_s) <= c_cap (0 if none).
double fit_decay_constant(const std::vector<PointwiseSample>& samples, double c_cap);

struct ComponentRate {
  /// Slowest decay among eigenmodes carrying at least 1% of their weighted
  /// mass in this component; infinity if none does.
  double rate = 0.0;
  /// heat | damped | loss | transition | none, from the local log-log slope.
  std::string tag;
};

struct RegimeRow {
  double xi_norm = 0.0;
  double rate = 0.0;
  /// low | medium | high | buffer, by position relative to 1 and 1/eps.
  std::string regime;
  /// n, u, e, h
  std::array<ComponentRate, 4> components;
};

/// Slowest constrained decay rate at each |xi| (minimum over the supplied
/// unit directions), with per-component behavior tags.
std::vector<RegimeRow> regime_rates(const ModelParams& params, const std::vector<double>& xi_norms,
                                    const std::vector<Vec3>& directions);

/// Five fixed unit directions used by the scans: the axes, a diagonal and an
/// oblique direction.
std::vector<Vec3> default_directions();

/// count log-spaced values in [lo, hi].
std::vector<double> log_space(double lo, double hi, std::size_t count);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace emrelax

#include "emrelax/symbol_impl.hpp"
