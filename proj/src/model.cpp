#include "emrelax/model.hpp"

#include <cmath>
#include <sstream>

namespace emrelax {

double PressureLaw::pressure(double rho) const {
  return amplitude * std::pow(rho, gamma);
}

double PressureLaw::dpressure(double rho) const {
  return amplitude * gamma * std::pow(rho, gamma - 1.0);
}

ModelParams::ModelParams(double rho_bar, Vec3 b_bar, double epsilon, PressureLaw law)
    : rho_bar_(rho_bar), b_bar_(b_bar), epsilon_(epsilon), law_(law) {
  if (!(rho_bar > 0.0) || !std::isfinite(rho_bar)) {
    throw ArgumentError("rho_bar must be positive and finite");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    std::ostringstream os;
    os << "epsilon must lie in (0, 1], got " << epsilon;
    throw ArgumentError(os.str());
  }
  if (!(law.amplitude > 0.0) || !(law.gamma >= 1.0)) {
    throw ArgumentError("pressure law needs A > 0 and gamma >= 1");
  }
  for (double b : b_bar) {
    if (!std::isfinite(b)) throw ArgumentError("b_bar must be finite");
  }
  pprime_bar_ = law_.dpressure(rho_bar_);
  kay_ = rho_bar_ / pprime_bar_;
}

namespace {

bool isothermal(const PressureLaw& law) { return law.gamma == 1.0; }

// Scale of the enthalpy: A gamma rho_bar^(gamma-1) / (gamma-1).
double enthalpy_scale(const ModelParams& p) {
  const auto& law = p.law();
  return law.amplitude * law.gamma * std::pow(p.rho_bar(), law.gamma - 1.0) / (law.gamma - 1.0);
}

}  // namespace

double enthalpy(const ModelParams& params, double rho) {
  if (!(rho > 0.0)) {
    std::ostringstream os;
    os << "enthalpy: density " << rho << " is not positive (vacuum)";
    throw DomainError(os.str());
  }
  const auto& law = params.law();
  const double log_ratio = std::log(rho / params.rho_bar());
  if (isothermal(law)) return law.amplitude * log_ratio;
  return enthalpy_scale(params) * std::expm1((law.gamma - 1.0) * log_ratio);
}

bool n_in_range(const ModelParams& params, double n) {
  if (!std::isfinite(n)) return false;
  if (isothermal(params.law())) return true;
  return n / enthalpy_scale(params) > -1.0;
}

double rho_of_n(const ModelParams& params, double n) {
  if (!n_in_range(params, n)) {
    std::ostringstream os;
    os << "rho_of_n: enthalpy deviation " << n << " outside invertible range";
    throw DomainError(os.str());
  }
  const auto& law = params.law();
  if (isothermal(law)) return params.rho_bar() * std::exp(n / law.amplitude);
  const double x = std::log1p(n / enthalpy_scale(params)) / (law.gamma - 1.0);
  return params.rho_bar() * std::exp(x);
}

Closures closures(const ModelParams& params, double n) {
  if (!n_in_range(params, n)) {
    std::ostringstream os;
    os << "closures: enthalpy deviation " << n << " outside invertible range";
    throw DomainError(os.str());
  }
  const auto& law = params.law();
  double f;
  if (isothermal(law)) {
    f = params.rho_bar() * std::expm1(n / law.amplitude);
  } else {
    f = params.rho_bar() * std::expm1(std::log1p(n / enthalpy_scale(params)) / (law.gamma - 1.0));
  }
  // For the gamma law, P'(rho) - P'(rho_bar) = (gamma - 1) n identically.
  const double g = (law.gamma - 1.0) * n;
  return {g, f, f - params.kay() * n};
}

double internal_energy(const ModelParams& params, double rho) {
  if (!(rho > 0.0)) throw DomainError("internal_energy: vacuum");
  const auto& law = params.law();
  const double rb = params.rho_bar();
  const double p_bar = law.pressure(rb);
  const double log_ratio = std::log(rho / rb);
  double first;
  if (isothermal(law)) {
    first = law.amplitude * log_ratio;
  } else {
    first = law.amplitude * std::pow(rb, law.gamma - 1.0) * std::expm1((law.gamma - 1.0) * log_ratio) /
            (law.gamma - 1.0);
  }
  // rho * [first + P(rho_bar) (1/rho - 1/rho_bar)]
  return rho * first - p_bar * (rho - rb) / rb;
}

}  // namespace emrelax
