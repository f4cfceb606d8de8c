#pragma once

#include "emrelax/common.hpp"

namespace emrelax {

/// Barotropic gamma-law P(rho) = A rho^gamma.
struct PressureLaw {
  double amplitude = 0.5;
  double gamma = 2.0;

  double pressure(double rho) const;
  double dpressure(double rho) const;
};

/// Physical constants of the rescaled Euler-Maxwell system around the
/// equilibrium (rho_bar, 0, 0, b_bar). Derived quantities are fixed at
/// construction.
class ModelParams {
 public:
  ModelParams() : ModelParams(1.0, {0.0, 0.0, 1.0}, 1.0, PressureLaw{}) {}
  ModelParams(double rho_bar, Vec3 b_bar, double epsilon, PressureLaw law);

  double rho_bar() const { return rho_bar_; }
  const Vec3& b_bar() const { return b_bar_; }
  double epsilon() const { return epsilon_; }
  const PressureLaw& law() const { return law_; }
  double pprime_bar() const { return pprime_bar_; }
  /// K = rho_bar / P'(rho_bar).
  double kay() const { return kay_; }

  ModelParams with_epsilon(double eps) const {
    return ModelParams(rho_bar_, b_bar_, eps, law_);
  }
  ModelParams with_b_bar(Vec3 b) const {
    return ModelParams(rho_bar_, b, epsilon_, law_);
  }

 private:
  double rho_bar_;
  Vec3 b_bar_;
  double epsilon_;
  PressureLaw law_;
  double pprime_bar_;
  double kay_;
};

/// n = h(rho) - h(rho_bar) with h' = P'/rho.
double enthalpy(const ModelParams& params, double rho);

/// Inverse of enthalpy().
double rho_of_n(const ModelParams& params, double n);

/// True when rho_of_n(n) is defined.
bool n_in_range(const ModelParams& params, double n);

struct Closures {
  double g;    // P'(rho(n)) - P'(rho_bar)
  double f;    // rho(n) - rho_bar
  double phi;  // rho(n) - rho_bar - K n
};

Closures closures(const ModelParams& params, double n);

/// Relative internal energy density rho * int_{rho_bar}^{rho} (P(s)-P(rho_bar))/s^2 ds.
/// Second derivative is P'(rho)/rho, so it pairs with the enthalpy flux.
double internal_energy(const ModelParams& params, double rho);

}  // namespace emrelax
