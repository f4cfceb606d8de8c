#pragma once

// Sharp dyadic annuli, the eps-dependent low/medium/high split, discrete
// Besov norms and their time-integrated (Chemin-Lerner) counterparts.

#include <limits>
#include <string>
#include <vector>

#include "emrelax/grid.hpp"

namespace emrelax {

enum class Regime { low, medium, high };

const char* regime_name(Regime r);

/// J_eps = -floor(log2 eps) + 1.
int j_epsilon(double epsilon);

/// j with 2^{j-1} <= |k| < 2^j, for |k| > 0.
int band_of(double knorm);

class BandPartition {
 public:
  BandPartition(GridPtr grid, double epsilon);

  const GridPtr& grid() const { return grid_; }
  double epsilon() const { return epsilon_; }
  int j_eps() const { return j_eps_; }
  /// Lowest band; it also holds the zero mode.
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  int num_bands() const { return j_max_ - j_min_ + 1; }
  /// Band of stored mode m.
  int band(std::size_t m) const { return band_index_[m] + j_min_; }
  const std::vector<int>& band_index() const { return band_index_; }

  Regime regime(int j) const;
  /// Inclusive band range of a regime (may be empty: lo > hi).
  std::pair<int, int> range(Regime r) const;

 private:
  GridPtr grid_;
  double epsilon_;
  int j_eps_;
  int j_min_;
  int j_max_;
  std::vector<int> band_index_;
};

/// L2 norms of the band pieces, indexed from j_min.
struct BandNorms {
  int j_min = 0;
  std::vector<double> values;

  double at(int j) const {
    const int i = j - j_min;
    return (i < 0 || i >= static_cast<int>(values.size())) ? 0.0 : values[static_cast<std::size_t>(i)];
  }
  int j_max() const { return j_min + static_cast<int>(values.size()) - 1; }
};

BandNorms band_norms(const SpectralField& f, const BandPartition& part);

/// Coefficients outside band j set to zero; empty when j is outside the grid's range.
SpectralField band_project(const SpectralField& f, const BandPartition& part, int j);

/// sum_{lo <= j <= hi} 2^{js} b_j.
double band_sum(const BandNorms& b, double s, int lo = std::numeric_limits<int>::min(),
                int hi = std::numeric_limits<int>::max());

double besov_norm(const BandNorms& b, double s);
double besov_norm(const SpectralField& f, const BandPartition& part, double s);
double regime_norm(const BandNorms& b, const BandPartition& part, Regime r, double s);
double regime_norm(const SpectralField& f, const BandPartition& part, Regime r, double s);
/// s1 on j <= 0, s2 on j >= 1.
double hybrid_norm(const BandNorms& b, double s1, double s2);
double hybrid_norm(const SpectralField& f, const BandPartition& part, double s1, double s2);

/// Per-band sup, L2 and L1 in time along a uniformly sampled trajectory.
/// Integrals use the trapezoid rule.
class TimeNormAccumulator {
 public:
  TimeNormAccumulator() = default;

  /// Samples must arrive with a uniform spacing (relative tolerance 1e-9).
  void push(double t, const BandNorms& b);

  std::size_t count() const { return count_; }
  double horizon() const { return count_ ? t_last_ - t_first_ : 0.0; }
  BandNorms sup() const;
  BandNorms l2() const;
  BandNorms l1() const;

 private:
  std::size_t count_ = 0;
  double t_first_ = 0.0;
  double t_last_ = 0.0;
  double dt_ = 0.0;
  int j_min_ = 0;
  std::vector<double> sup_;
  std::vector<double> sq_int_;
  std::vector<double> int_;
  std::vector<double> last_;
};

struct NormTerm {
  std::string name;
  std::string regime;
  double s;
  double value;
};

struct Breakdown {
  double total = 0.0;
  std::vector<NormTerm> terms;
  /// Which density variable was passed as a.
  std::string a_variable;
};

/// Perturbation state in the form (a, u, E, H) used by the functionals.
struct PerturbationState {
  SpectralField a;
  SpectralField u;
  SpectralField e;
  SpectralField h;
};

/// Streams a trajectory and evaluates the energy and dissipation functionals.
class FunctionalAccumulator {
 public:
  FunctionalAccumulator(const BandPartition& part, std::string a_variable = "rho - rho_bar");

  void push(double t, const PerturbationState& s);

  /// low B^{1/2} + medium B^{3/2} + eps * high B^{5/2} sup-in-time of (a, eps u, E, H).
  Breakdown energy() const;
  /// The twelve L2-in-time terms.
  Breakdown dissipation() const;

 private:
  BandPartition part_;
  std::string a_variable_;
  // a, eps u, E, H, u
  TimeNormAccumulator acc_[5];
};

Breakdown energy_functional(const std::vector<double>& times, const std::vector<PerturbationState>& traj,
                            const BandPartition& part, const std::string& a_variable = "rho - rho_bar");
Breakdown dissipation_functional(const std::vector<double>& times, const std::vector<PerturbationState>& traj,
                                 const BandPartition& part, const std::string& a_variable = "rho - rho_bar");

/// Initial energy of (rho0 - rho_bar, u0, E0, B0 - B_bar), u0 unscaled.
Breakdown initial_energy(const PerturbationState& s0, const BandPartition& part,
                         const std::string& a_variable = "rho - rho_bar");

}  // namespace emrelax
