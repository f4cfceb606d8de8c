#include <cmath>
#include <random>

#include "doctest.h"
#include "emrelax/symbol.hpp"
#include "oracles/dopri.hpp"

using namespace emrelax;

namespace {

const cplx I{0.0, 1.0};

ModelParams params(double eps, Vec3 b = {0, 0, 1}) { return ModelParams(1.0, b, eps, PressureLaw{}); }

double rel_diff(const Vec10c& a, const Vec10c& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

std::vector<Vec3> sample_xis() {
  std::vector<Vec3> out;
  for (double r : {0.0, 1e-3, 0.3, 1.0, 10.0, 150.0, 1e3}) {
    for (const Vec3& d : default_directions()) out.push_back({r * d[0], r * d[1], r * d[2]});
  }
  return out;
}

}  // namespace

TEST_CASE("symbol at xi = 0 without background field") {
  const double eps = 0.3;
  const SymbolMatrix s = assemble_symbol(params(eps, {0, 0, 0}), {0, 0, 0});
  CHECK(s.m.row(kN).norm() == 0.0);
  CHECK(s.m.block(kH, 0, 3, 10).norm() == 0.0);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double diag = a == b ? 1.0 : 0.0;
      CHECK(std::abs(s.m(kU + a, kU + b) - (-diag / (eps * eps))) < 1e-14);
      CHECK(std::abs(s.m(kU + a, kE + b) - (-diag / (eps * eps))) < 1e-14);
      CHECK(std::abs(s.m(kE + a, kU + b) - diag) < 1e-14);
      CHECK(std::abs(s.m(kE + a, kE + b)) == 0.0);
    }
  }
}

TEST_CASE("symbol entries at xi = e1") {
  const SymbolMatrix s = assemble_symbol(params(1.0, {0, 0, 0}), {1, 0, 0});
  CHECK(std::abs(s.m(kN, kU + 0) - (-I)) < 1e-15);
  CHECK(std::abs(s.m(kU + 0, kN) - (-I)) < 1e-15);
  CHECK(std::abs(s.m(kE + 1, kH + 2) - (-I)) < 1e-15);
  CHECK(std::abs(s.m(kE + 2, kH + 1) - I) < 1e-15);
  CHECK(std::abs(s.m(kH + 1, kE + 2) - I) < 1e-15);
  CHECK(std::abs(s.m(kH + 2, kE + 1) - (-I)) < 1e-15);
}

TEST_CASE("symbol reproduces the component equations") {
  const ModelParams p(1.7, {0.3, -0.5, 0.8}, 0.2, PressureLaw{0.9, 1.4});
  const Vec3 xi{0.7, -1.1, 2.3};
  const SymbolMatrix s = assemble_symbol(p, xi);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Vec10c v;
  for (int i = 0; i < 10; ++i) v(i) = cplx(nd(rng), nd(rng));
  const FourierState st = FourierState::from_vector(v);
  const FourierState d = FourierState::from_vector(s.m * v);
  const double eps = p.epsilon();
  CVec3 ixi{I * xi[0], I * xi[1], I * xi[2]};
  cplx div_u = 0.0;
  for (int k = 0; k < 3; ++k) div_u += ixi[k] * st.u[k];
  CHECK(std::abs(d.n - (-p.pprime_bar() * div_u)) < 1e-12);
  const auto uxb = cross(st.u, p.b_bar());
  const auto curl_h = cross(ixi, st.h);
  const auto curl_e = cross(ixi, st.e);
  for (int k = 0; k < 3; ++k) {
    const cplx du = -(ixi[k] * st.n + st.e[k] + st.u[k] + eps * uxb[k]) / (eps * eps);
    CHECK(std::abs(d.u[k] - du) < 1e-10);
    CHECK(std::abs(d.e[k] - (curl_h[k] / eps + p.rho_bar() * st.u[k])) < 1e-12);
    CHECK(std::abs(d.h[k] - (-curl_e[k] / eps)) < 1e-12);
  }
}

TEST_CASE("xi = 0 (u_k, e_k) block eigenvalues") {
  const SymbolMatrix s = assemble_symbol(params(1.0, {0, 0, 0}), {0, 0, 0});
  Eigen::Matrix2cd blk;
  blk << s.m(kU, kU), s.m(kU, kE), s.m(kE, kU), s.m(kE, kE);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(blk);
  // mu^2 + mu + 1 = 0
  const cplx r1 = (-1.0 + I * std::sqrt(3.0)) / 2.0;
  const cplx r2 = std::conj(r1);
  const cplx m0 = es.eigenvalues()(0);
  const cplx m1 = es.eigenvalues()(1);
  CHECK(std::min(std::abs(m0 - r1), std::abs(m0 - r2)) < 1e-14);
  CHECK(std::min(std::abs(m1 - r1), std::abs(m1 - r2)) < 1e-14);
  CHECK(std::abs(m0 - m1) > 1.0);
}

TEST_CASE("propagate: identity, doubling and semigroup") {
  std::mt19937_64 rng(11);
  for (double eps : {1.0, 0.1, 0.01}) {
    const ModelParams p = params(eps);
    for (const Vec3& xi : sample_xis()) {
      const SymbolMatrix s = assemble_symbol(p, xi);
      const Vec10c u0 = random_compatible_state(p, gauss_basis(p, xi), rng);
      const FourierState st0 = FourierState::from_vector(u0);
      CHECK(propagate(s, st0, 0.0).to_vector() == u0);
      for (double t : {0.1, 1.0, 10.0}) {
        const Vec10c once = propagator(s, t) * u0;
        const Vec10c twice = propagator(s, 2 * t) * u0;
        CHECK(rel_diff(propagator(s, t) * once, twice) < 1e-10);
        const Vec10c split = propagator(s, 0.3 * t) * (propagator(s, 0.7 * t) * u0);
        CHECK(rel_diff(split, once) < 1e-10);
      }
    }
  }
  CHECK_THROWS_AS(propagator(assemble_symbol(params(1.0), {1, 0, 0}), std::nan("")), ArgumentError);
  CHECK_THROWS_AS(propagator(assemble_symbol(params(1.0), {1, 0, 0}), INFINITY), ArgumentError);
}

TEST_CASE("propagate matches adaptive ODE integration on acoustic data") {
  const ModelParams p = params(1.0, {0, 0, 0});
  const SymbolMatrix s = assemble_symbol(p, {1, 0, 0});
  FourierState st;
  st.n = 1.0;
  st.u[0] = cplx(0.5, -0.25);
  const Vec10c y0 = st.to_vector();
  const Mat10c m = s.m;
  for (double t : {0.5, 2.0, 5.0}) {
    const Vec10c ref = oracle::dopri54<Vec10c>([&](double, const Vec10c& y) -> Vec10c { return m * y; }, y0, 0.0,
                                               t, 1e-12, 1e-14);
    CHECK(rel_diff(propagate(s, st, t).to_vector(), ref) < 1e-8);
  }
}

TEST_CASE("Gauss-compatible subspace is invariant") {
  std::mt19937_64 rng(5);
  for (double eps : {1.0, 0.1, 0.01}) {
    const ModelParams p = params(eps);
    for (const Vec3& xi : sample_xis()) {
      const MatXc n = gauss_basis(p, xi);
      CHECK(n.cols() == (norm2(xi) > 0 ? 8 : 9));
      CHECK((n.adjoint() * n - MatXc::Identity(n.cols(), n.cols())).norm() < 1e-13);
      const SymbolMatrix s = assemble_symbol(p, xi);
      const Vec10c u0 = random_compatible_state(p, n, rng);
      CHECK(gauss_residual(p, xi, FourierState::from_vector(u0)) < 1e-12 * (1 + std::sqrt(norm2(xi))));
      // M maps the subspace into itself.
      const MatXc mn = s.m * n;
      CHECK((mn - n * (n.adjoint() * mn)).norm() <= 1e-12 * mn.norm() + 1e-300);
      for (double t : {0.1, 1.0, 10.0}) {
        const Vec10c u = propagator(s, t) * u0;
        CHECK(gauss_residual(p, xi, FourierState::from_vector(u)) <= 1e-10 * std::max(1.0, u.norm()));
      }
    }
  }
}

TEST_CASE("weighted norm") {
  FourierState z;
  CHECK(weighted_norm(params(0.5), z) == 0.0);
  FourierState u;
  u.u[0] = 1.0;
  CHECK(weighted_norm(params(0.5), u) == doctest::Approx(0.25).epsilon(1e-15));
  FourierState ne;
  ne.n = 1.0;
  ne.e[1] = 1.0;
  CHECK(weighted_norm(params(0.5), ne) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("exact energy law along propagation") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (double eps : {1.0, 0.3, 0.1}) {
    const ModelParams p(1.2, {0.2, 0.1, 0.8}, eps, PressureLaw{0.7, 1.5});
    for (const Vec3& xi : std::vector<Vec3>{{0.4, 0, 0}, {1.0, -2.0, 0.5}, {0, 3.0, 7.0}}) {
      const SymbolMatrix s = assemble_symbol(p, xi);
      Vec10c u0;
      for (int i = 0; i < 10; ++i) u0(i) = cplx(nd(rng), nd(rng));
      auto energy = [&](const Vec10c& v) {
        const FourierState st = FourierState::from_vector(v);
        double e = std::norm(st.n);
        for (int k = 0; k < 3; ++k) {
          e += p.pprime_bar() * eps * eps * std::norm(st.u[k]) + (std::norm(st.e[k]) + std::norm(st.h[k])) / p.kay();
        }
        return e;
      };
      const double t = 0.05;
      const double dt = 1e-6;
      const Vec10c ut = propagator(s, t) * u0;
      const double dedt = (energy(propagator(s, t + dt) * u0) - energy(propagator(s, t - dt) * u0)) / (2 * dt);
      const double expected = -2.0 * p.pprime_bar() * ut.segment(kU, 3).squaredNorm();
      CHECK(std::abs(dedt - expected) <= 1e-6 * std::abs(expected));
    }
  }
}

TEST_CASE("no unstable constrained eigenvalues") {
  for (double eps : {1.0, 0.1, 0.01}) {
    for (const Vec3& xi : sample_xis()) {
      CHECK(slowest_rate(assemble_symbol(params(eps), xi)) >= -1e-10);
    }
  }
}

TEST_CASE("pointwise verification at xi = 0") {
  const ModelParams p = params(0.5);
  // Pure magnetic data at xi = 0 is conserved exactly.
  FourierState st;
  st.h = {0.3, -0.2, 0.5};
  const SymbolMatrix s = assemble_symbol(p, {0, 0, 0});
  for (double t : {0.1, 1.0, 10.0}) {
    CHECK(weighted_norm(p, propagate(s, st, t)) == doctest::Approx(weighted_norm(p, st)).epsilon(1e-13));
  }
  const PointwiseReport rep = verify_pointwise(p, {{0, 0, 0}}, {0.1, 1.0, 10.0}, PointwiseOptions{20, 4, 100.0});
  for (const auto& smp : rep.samples) {
    CHECK(smp.weight == 0.0);
    CHECK(smp.ratio <= 1.0 + 1e-12);
  }
  CHECK(rep.satisfied);
  CHECK_THROWS_AS(verify_pointwise(p, {}, {1.0}, {}), ArgumentError);
  CHECK_THROWS_AS(verify_pointwise(p, {{1, 0, 0}}, {}, {}), ArgumentError);
}

TEST_CASE("pointwise verification is deterministic in the seed") {
  const ModelParams p = params(0.1);
  std::vector<Vec3> xis;
  for (double r : log_space(1e-2, 1e2, 7)) xis.push_back({r, 0, 0});
  const auto a = verify_pointwise(p, xis, {0.1, 1.0}, PointwiseOptions{5, 42, 100.0});
  const auto b = verify_pointwise(p, xis, {0.1, 1.0}, PointwiseOptions{5, 42, 100.0});
  const auto c = verify_pointwise(p, xis, {0.1, 1.0}, PointwiseOptions{5, 43, 100.0});
  REQUIRE(a.samples.size() == b.samples.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].ratio == b.samples[i].ratio);
    any_diff = any_diff || a.samples[i].ratio != c.samples[i].ratio;
  }
  CHECK(any_diff);
  CHECK(a.c0_fit == b.c0_fit);
}

TEST_CASE("fit_decay_constant on synthetic samples") {
  // ratio = exp(-2 w t) exactly: c0 can reach 2 + ln(cap)/(w t) for the extreme sample.
  std::vector<PointwiseSample> s;
  for (double t : {1.0, 2.0, 4.0}) s.push_back({1.0, {1, 0, 0}, t, std::exp(-2.0 * 0.5 * t), 0.5});
  const double c0 = fit_decay_constant(s, 1.0);
  CHECK(c0 == doctest::Approx(2.0).epsilon(1e-10));
  const double c0b = fit_decay_constant(s, std::exp(1.0));
  CHECK(c0b == doctest::Approx(2.0 + 1.0 / (0.5 * 4.0)).epsilon(1e-10));
  s.push_back({1.0, {1, 0, 0}, 0.0, 5.0, 0.5});
  CHECK(fit_decay_constant(s, 1.0) == 0.0);
}

TEST_CASE("high-frequency regularity loss at eps = 1") {
  const ModelParams p = params(1.0);
  std::vector<double> xs = log_space(1e3, 1e4, 5);
  std::vector<double> rates;
  for (double x : xs) rates.push_back(slowest_rate(assemble_symbol(p, {x, 0, 0})));
  CHECK(loglog_slope(xs, rates) == doctest::Approx(-2.0).epsilon(0.02));

  // Independent rate: growth of the propagator norm on the subspace over a long window.
  const Vec3 xi{1e3, 0, 0};
  const SymbolMatrix s = assemble_symbol(p, xi);
  const MatXc n = gauss_basis(p, xi);
  const double rate = slowest_rate(s);
  const double t1 = 0.5 / rate;
  const double t2 = 2.5 / rate;
  auto opnorm = [&](double t) {
    const MatXc pn = propagator(s, t) * n;
    return Eigen::JacobiSVD<MatXc>(pn).singularValues()(0);
  };
  const double measured = -std::log(opnorm(t2) / opnorm(t1)) / (t2 - t1);
  CHECK(measured == doctest::Approx(rate).epsilon(0.02));
}

TEST_CASE("rate at eps = 0.1, |xi| = 100 is of order decay_weight") {
  const ModelParams p = params(0.1);
  const Vec3 xi{100, 0, 0};
  const double w = decay_weight(0.1, 100.0);
  CHECK(w == doctest::Approx(1e4 / (101.0 * 10001.0)).epsilon(1e-14));
  const SymbolMatrix s = assemble_symbol(p, xi);
  const double rate = slowest_rate(s);
  const double ratio = rate / w;
  CHECK(ratio > 0.05);
  CHECK(ratio < 20.0);
  const MatXc n = gauss_basis(p, xi);
  auto opnorm = [&](double t) { return Eigen::JacobiSVD<MatXc>(MatXc(propagator(s, t) * n)).singularValues()(0); };
  const double t1 = 0.5 / rate;
  const double t2 = 3.0 / rate;
  CHECK(-std::log(opnorm(t2) / opnorm(t1)) / (t2 - t1) == doctest::Approx(rate).epsilon(0.02));
}

TEST_CASE("regime_rates table") {
  const ModelParams p = params(0.01);
  CHECK_THROWS_AS(regime_rates(p, {0.0, 1.0}, default_directions()), ArgumentError);
  const auto xs = log_space(1e-3, 1e5, 33);
  const auto rows = regime_rates(p, xs, default_directions());
  REQUIRE(rows.size() == xs.size());
  for (const auto& r : rows) {
    CHECK(r.rate > 0.0);
    for (const auto& c : r.components) CHECK(c.rate >= r.rate);
  }
  CHECK(rows.front().regime == "low");
  CHECK(rows.back().regime == "high");
  // Far above 1/eps every component that decays loses regularity.
  bool any_loss = false;
  for (const auto& c : rows.back().components) any_loss = any_loss || c.tag == "loss";
  CHECK(any_loss);
  // The slowest rate is the minimum over directions.
  for (std::size_t i = 0; i < xs.size(); i += 8) {
    double mn = INFINITY;
    for (const Vec3& d : default_directions()) {
      mn = std::min(mn, slowest_rate(assemble_symbol(p, {xs[i] * d[0], xs[i] * d[1], xs[i] * d[2]})));
    }
    CHECK(rows[i].rate == doctest::Approx(mn).epsilon(1e-12));
  }
}

TEST_CASE("log helpers") {
  const auto xs = log_space(1e-2, 1e2, 5);
  CHECK(xs[2] == doctest::Approx(1.0).epsilon(1e-14));
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * x * x);
  CHECK(loglog_slope(xs, ys) == doctest::Approx(2.0).epsilon(1e-12));
}
