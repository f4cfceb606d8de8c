#include <cmath>
#include <random>

#include "doctest.h"
#include "emrelax/model.hpp"

using namespace emrelax;

namespace {

ModelParams isothermal() { return ModelParams(1.0, {0, 0, 0}, 1.0, PressureLaw{1.0, 1.0}); }
ModelParams quadratic() { return ModelParams(); }
ModelParams cubic() { return ModelParams(1.3, {0, 0, 1}, 0.5, PressureLaw{1.0, 3.0}); }

}  // namespace

TEST_CASE("enthalpy reference values") {
  CHECK(enthalpy(isothermal(), 1.0) == 0.0);
  CHECK(enthalpy(quadratic(), 1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(enthalpy(isothermal(), std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(enthalpy(quadratic(), 0.0), DomainError);
  CHECK_THROWS_AS(enthalpy(quadratic(), -1.0), DomainError);
}

TEST_CASE("enthalpy matches the integral of P'(s)/s") {
  const ModelParams p = cubic();
  const double rho = 2.1;
  // Composite Simpson on [rho_bar, rho].
  const int m = 2000;
  const double a = p.rho_bar();
  const double h = (rho - a) / m;
  auto f = [&](double s) { return p.law().dpressure(s) / s; };
  double sum = f(a) + f(rho);
  for (int i = 1; i < m; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  CHECK(enthalpy(p, rho) == doctest::Approx(sum * h / 3.0).epsilon(1e-12));
}

TEST_CASE("rho_of_n reference values") {
  CHECK(rho_of_n(quadratic(), 0.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(rho_of_n(cubic(), 0.0) == cubic().rho_bar());
  CHECK(rho_of_n(quadratic(), 0.0) == 1.0);
  CHECK(rho_of_n(isothermal(), 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(rho_of_n(quadratic(), -1.0), DomainError);
  CHECK_THROWS_AS(rho_of_n(quadratic(), -2.0), DomainError);
  CHECK(n_in_range(isothermal(), -50.0));
}

TEST_CASE("closures reference values") {
  auto c = closures(quadratic(), 0.3);
  CHECK(c.g == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(c.f == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(std::abs(c.phi) < 1e-15);
  c = closures(isothermal(), 0.1);
  CHECK(c.phi == doctest::Approx(std::exp(0.1) - 1.1).epsilon(1e-12));
  c = closures(cubic(), 0.0);
  CHECK(c.g == 0.0);
  CHECK(c.f == 0.0);
  CHECK(c.phi == 0.0);
}

TEST_CASE("closure G equals P'(rho(n)) - P'(rho_bar)") {
  for (const ModelParams& p : {quadratic(), cubic(), isothermal()}) {
    for (double n : {-0.2, 0.05, 0.7}) {
      const double rho = rho_of_n(p, n);
      CHECK(closures(p, n).g == doctest::Approx(p.law().dpressure(rho) - p.pprime_bar()).epsilon(1e-12));
    }
  }
}

TEST_CASE("round trip on random densities") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.1, 10.0);
  for (const ModelParams& p : {quadratic(), cubic(), isothermal()}) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double rho = dist(rng);
      worst = std::max(worst, std::abs(rho_of_n(p, enthalpy(p, rho)) - rho) / rho);
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("Phi vanishes quadratically") {
  for (const ModelParams& p : {cubic(), isothermal()}) {
    // sup |rho''(n)| on [-0.1, 0.1] by central differences
    double sup2 = 0.0;
    const double d = 1e-4;
    for (int i = 0; i <= 200; ++i) {
      const double n = -0.1 + 0.001 * i;
      const double r2 = (rho_of_n(p, n + d) - 2 * rho_of_n(p, n) + rho_of_n(p, n - d)) / (d * d);
      sup2 = std::max(sup2, std::abs(r2));
    }
    for (int i = -100; i <= 100; ++i) {
      if (i == 0) continue;
      const double n = 0.001 * i;
      CHECK(std::abs(closures(p, n).phi) / (n * n) <= 2.0 * sup2);
    }
  }
}

TEST_CASE("K consistency") {
  for (double rb : {0.3, 1.0, 2.5, 7.0}) {
    const ModelParams p(rb, {0, 0, 1}, 0.1, PressureLaw{0.7, 1.6});
    CHECK(p.kay() * p.pprime_bar() == doctest::Approx(rb).epsilon(1e-15));
    CHECK(p.kay() == rb / p.pprime_bar());
  }
  CHECK(quadratic().kay() == 1.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ModelParams(1.0, {0, 0, 1}, 1.5, PressureLaw{}), ArgumentError);
  CHECK_THROWS_AS(ModelParams(1.0, {0, 0, 1}, 0.0, PressureLaw{}), ArgumentError);
  CHECK_THROWS_AS(ModelParams(-1.0, {0, 0, 1}, 0.5, PressureLaw{}), ArgumentError);
  CHECK_THROWS_AS(ModelParams(1.0, {0, 0, 1}, 0.5, PressureLaw{1.0, 0.5}), ArgumentError);
  CHECK_NOTHROW(ModelParams(1.0, {0, 0, 1}, 1.0, PressureLaw{}));
  try {
    ModelParams(1.0, {0, 0, 1}, 1.5, PressureLaw{});
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("(0, 1]") != std::string::npos);
  }
}

TEST_CASE("internal energy has second derivative P'/rho") {
  for (const ModelParams& p : {quadratic(), cubic(), isothermal()}) {
    CHECK(internal_energy(p, p.rho_bar()) == doctest::Approx(0.0));
    for (double rho : {0.5, 1.2, 3.0}) {
      const double d = 1e-4;
      const double e2 = (internal_energy(p, rho + d) - 2 * internal_energy(p, rho) + internal_energy(p, rho - d)) /
                        (d * d);
      CHECK(e2 == doctest::Approx(p.law().dpressure(rho) / rho).epsilon(1e-5));
      CHECK(internal_energy(p, rho) >= 0.0);
    }
  }
  CHECK(internal_energy(quadratic(), 1.4) == doctest::Approx(0.5 * 0.4 * 0.4).epsilon(1e-14));
}
