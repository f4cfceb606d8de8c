#pragma once

// Hypocoercive quadratic form for the Fourier-mode system and the semidefinite
// checks certifying it as a strict Lyapunov functional.

#include <vector>

#include "emrelax/symbol.hpp"

namespace emrelax {

struct LyapunovWeights {
  double eta;

  explicit LyapunovWeights(double eta_value);
};

struct LyapunovForm {
  Mat10c q;
  Vec3 xi;
  LyapunovWeights weights;
  ModelParams params;
};

/// Q with U^H Q U equal to the energy plus the three eta-weighted cross terms
///   eta   eps^2 Re<u, i xi n> / (1 + eps^2|xi|^2)
///   eta   eps^2 Re<u, e>      / (1 + eps^2|xi|^2)
///   eta^{5/4} eps Re<e, -i xi x h> / ((1 + eps^2|xi|^2)(1 + |xi|^2))
LyapunovForm build_form(const ModelParams& params, const Vec3& xi, const LyapunovWeights& weights);

/// Pieces of Q = q0 + eta q1 + eta^{5/4} q2.
struct FormPieces {
  Mat10c q0;
  Mat10c q1;
  Mat10c q2;
};
FormPieces form_pieces(const ModelParams& params, const Vec3& xi);

/// Real value of U^H Q U.
double form_value(const LyapunovForm& form, const Vec10c& u);

struct EquivalenceBounds {
  double c_low;
  double c_high;
  double condition() const { return c_high / c_low; }
};

/// Extreme generalized eigenvalues of (Q, W), W = diag(1, eps^2 I, I, I).
/// c_low <= 0 signals that eta is too large; no exception is thrown.
EquivalenceBounds equivalence_bounds(const LyapunovForm& form);

/// Diagonal R(c0) weighting n, u, e, h by
/// c0 (1+|xi|^2)/(1+eps^2|xi|^2), c0, c0/(1+eps^2|xi|^2), c0 |xi|^2/((1+eps^2|xi|^2)(1+|xi|^2)).
Mat10c dissipation_matrix(const ModelParams& params, const Vec3& xi, double c0);

/// Spectral norm of Q, the scale for gap tolerances.
double form_scale(const LyapunovForm& form);

/// Smallest eigenvalue of -(M^H Q + Q M + R(c0)) on the Gauss-compatible subspace.
double dissipation_gap(const LyapunovForm& form, const SymbolMatrix& sym, double c0);

struct SearchOptions {
  /// gap >= -tol * form_scale counts as admissible.
  double tol = 1e-10;
  /// Log-spaced eta candidates below the admissibility limit.
  std::size_t eta_candidates = 24;
  /// Golden-section refinement steps around the best candidate.
  std::size_t refine_steps = 30;
  /// Relative bisection tolerance for eta_max and c0.
  double bisect_rel = 1e-7;
};

struct CertificateRow {
  double epsilon = 0.0;
  Vec3 xi{};
  double gap = 0.0;
  double tol = 0.0;
  double c_low = 0.0;
  double c_high = 0.0;
};

struct SearchResult {
  bool ok = false;
  std::string message;
  double eta_max = 0.0;
  double eta_star = 0.0;
  double c0_star = 0.0;
  /// Worst c_high / c_low over the grid.
  double cond_number = 0.0;
  /// Largest c_high over the grid; the Lyapunov value then decays at least
  /// like exp(-(c0_star / c_high_max) decay_weight t).
  double c_high_max = 0.0;
  /// Grid point with the smallest gap at (eta_star, c0_star), or the first
  /// failing point when ok is false.
  CertificateRow worst;
  std::vector<CertificateRow> table;

  double certified_rate() const { return c_high_max > 0.0 ? c0_star / c_high_max : 0.0; }
};

/// Largest admissible eta (bisection at c0 = 0 with positive equivalence),
/// then the eta below it maximizing the largest admissible c0.
SearchResult search_eta_c0(const std::vector<ModelParams>& params_list, const std::vector<Vec3>& xi_grid,
                           const SearchOptions& opts = {});
SearchResult search_eta_c0(const ModelParams& params, const std::vector<Vec3>& xi_grid,
                           const SearchOptions& opts = {});

}  // namespace emrelax
