#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "emrelax/bands.hpp"

using namespace emrelax;

namespace {

const cplx I{0.0, 1.0};

RealField random_real(const GridPtr& g, int ncomp, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  RealField f = RealField::zeros(g, ncomp);
  for (auto& v : f.data) v = d(rng);
  return f;
}

// Random field with all stored modes populated and zero mean (via a round trip).
SpectralField random_spectral(const GridPtr& g, int ncomp, unsigned seed) {
  Fft fft(g);
  SpectralField f = fft.forward(random_real(g, ncomp, seed));
  for (int c = 0; c < ncomp; ++c) f.comp(c)[0] = 0.0;
  return f;
}

// Field with coefficient value on every stored mode of band j (1D grid).
SpectralField single_band(const GridPtr& g, const BandPartition& p, int j, double norm) {
  SpectralField f = SpectralField::zeros(g, 1);
  for (std::size_t m = 0; m < g->spec_size(); ++m) {
    if (p.band(m) == j && g->knorm(m) > 0.0 && !g->nyquist(m)) f.data[m] = 1.0;
  }
  f *= norm / l2_norm(f);
  return f;
}

}  // namespace

TEST_CASE("transforms") {
  for (int dim : {1, 2, 3}) {
    const GridPtr g = make_grid(dim, dim == 3 ? 16 : 32, 1.5);
    Fft fft(g);
    RealField c = RealField::zeros(g, 1);
    for (auto& v : c.data) v = 2.75;
    const SpectralField cs = fft.forward(c);
    CHECK(std::abs(cs.data[0] - 2.75) < 1e-14);
    for (std::size_t m = 1; m < g->spec_size(); ++m) CHECK(std::abs(cs.data[m]) < 1e-14);

    const RealField r = random_real(g, 3, 4, 3.0);
    const RealField back = fft.backward(fft.forward(r));
    double err = 0.0;
    for (std::size_t i = 0; i < r.data.size(); ++i) err = std::max(err, std::abs(r.data[i] - back.data[i]));
    CHECK(err <= 1e-13 * 3.0);

    // Parseval: physical L2 against the spectral sum.
    double phys = 0.0;
    double cell = 1.0;
    for (int a = 0; a < dim; ++a) cell *= g->dx(a);
    for (double v : r.data) phys += v * v * cell;
    CHECK(l2_norm(fft.forward(r)) == doctest::Approx(std::sqrt(phys)).epsilon(1e-12));
  }
  const GridPtr g = make_grid(1, 64, 2.0);
  Fft fft(g);
  const RealField r = random_real(g, 1, 8);
  RealField shifted = RealField::zeros(g, 1);
  for (std::size_t i = 0; i < g->real_size(); ++i) shifted.data[(i + 1) % g->real_size()] = r.data[i];
  const SpectralField a = fft.forward(r);
  const SpectralField b = fft.forward(shifted);
  for (std::size_t m = 0; m < g->spec_size(); ++m) {
    const cplx phase = std::exp(-I * g->wavevector(m)[0] * g->dx(0));
    CHECK(std::abs(b.data[m] - phase * a.data[m]) < 1e-13);
  }
  Fft other(make_grid(1, 32, 2.0));
  CHECK_THROWS_AS(other.forward(r), ArgumentError);
  RealField bad = r;
  bad.data.pop_back();
  CHECK_THROWS_AS(fft.forward(bad), ArgumentError);
}

TEST_CASE("grid validation and layout") {
  CHECK_THROWS_AS(make_grid(1, 48, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_grid(4, 16, 1.0), ArgumentError);
  CHECK_THROWS_AS(make_grid(2, 16, -1.0), ArgumentError);
  const GridPtr g = make_grid(2, 8, 1.0);
  CHECK(g->spec_size() == 8 * 5);
  CHECK(g->volume() == doctest::Approx(4 * std::numbers::pi * std::numbers::pi));
  double wsum = 0.0;
  for (double w : g->weights()) wsum += w;
  CHECK(wsum == 64.0);
}

TEST_CASE("J_eps") {
  CHECK(j_epsilon(1.0) == 1);
  CHECK(j_epsilon(0.3) == 3);
  CHECK(j_epsilon(0.25) == 3);
  int prev = 0;
  for (double eps : {1.0, 0.7, 0.5, 0.3, 0.25, 0.1, 0.05, 0.01, 1e-3}) {
    const int j = j_epsilon(eps);
    CHECK(j >= prev);
    prev = j;
    CHECK(std::exp2(j) > 1.0 / eps);
    CHECK(std::exp2(j) <= 4.0 / eps);
  }
}

TEST_CASE("band partition") {
  const GridPtr g = make_grid(1, 64, 1.0);
  const BandPartition p(g, 0.25);
  CHECK(p.j_min() == 1);
  CHECK(band_of(3.0) == 2);
  CHECK(band_of(4.0) == 3);
  CHECK(band_of(0.25) == -1);
  CHECK(p.regime(0) == Regime::low);
  CHECK(p.regime(1) == Regime::medium);
  CHECK(p.regime(2) == Regime::medium);
  CHECK(p.regime(3) == Regime::high);
  // Every mode lies in exactly one band: projections sum back to f.
  const SpectralField f = random_spectral(g, 3, 2);
  SpectralField sum = SpectralField::zeros(g, 3);
  for (int j = p.j_min() - 2; j <= p.j_max() + 2; ++j) sum += band_project(f, p, j);
  CHECK(sum.data == f.data);

  SpectralField three = SpectralField::zeros(g, 1);
  three.data[3] = cplx(0.5, -0.2);
  CHECK(band_project(three, p, 2).data == three.data);
  const SpectralField z = band_project(three, p, 5);
  for (const auto& v : z.data) CHECK(v == cplx{});
  const SpectralField once = band_project(f, p, 3);
  CHECK(band_project(once, p, 3).data == once.data);
  CHECK(l2_norm(band_project(f, p, 40)) == 0.0);
}

TEST_CASE("Parseval over bands") {
  for (int dim : {1, 2, 3}) {
    const GridPtr g = make_grid(dim, dim == 3 ? 16 : 64, 4.0);
    const BandPartition p(g, 0.1);
    const SpectralField f = random_spectral(g, 3, 12);
    const BandNorms b = band_norms(f, p);
    double s = 0.0;
    for (double v : b.values) s += v * v;
    const double total = l2_norm(f);
    CHECK(std::abs(s - total * total) <= 1e-12 * total * total);
  }
}

TEST_CASE("single-band norm algebra") {
  const GridPtr g = make_grid(1, 64, 1.0);
  const BandPartition p(g, 0.1);
  const SpectralField f = single_band(g, p, 2, 1.0);
  CHECK(besov_norm(f, p, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(hybrid_norm(f, p, -0.5, 1.5) == doctest::Approx(8.0).epsilon(1e-14));
  const SpectralField low = single_band(g, p, 1, 1.0);
  CHECK(regime_norm(low, p, Regime::medium, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(regime_norm(low, p, Regime::low, 1.0) == 0.0);
  CHECK(regime_norm(f, p, Regime::high, 1.0) == 0.0);
  const BandPartition q(g, 1.0);  // J = 1: band 2 is high
  CHECK(regime_norm(f, q, Regime::high, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(regime_norm(f, q, Regime::medium, 1.0) == 0.0);

  const GridPtr g4 = make_grid(1, 64, 4.0);
  const BandPartition p4(g4, 0.1);
  const SpectralField fl = single_band(g4, p4, -1, 3.0);
  CHECK(hybrid_norm(fl, p4, -0.5, 1.5) == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Bernstein ratios for single-band fields") {
  const GridPtr g = make_grid(1, 128, 1.0);
  const BandPartition p(g, 0.05);
  for (int j = 1; j <= 5; ++j) {
    const SpectralField f = single_band(g, p, j, 1.0);
    const SpectralField dx = gradient(f).component(0);
    for (double s : {-0.5, 0.5, 1.5}) {
      const double r = besov_norm(dx, p, s) / besov_norm(f, p, s);
      CHECK(r >= std::exp2(j - 1) - 1e-12);
      CHECK(r <= std::exp2(j) + 1e-12);
    }
  }
}

TEST_CASE("regime norms partition the Besov norm") {
  const GridPtr g = make_grid(1, 256, 4.0);
  for (double eps : {1.0, 0.2, 0.05}) {
    const BandPartition p(g, eps);
    const SpectralField f = random_spectral(g, 3, 5);
    for (double s : {0.5, 1.5, 2.5}) {
      const double parts = regime_norm(f, p, Regime::low, s) + regime_norm(f, p, Regime::medium, s) +
                           regime_norm(f, p, Regime::high, s);
      CHECK(parts == doctest::Approx(besov_norm(f, p, s)).epsilon(1e-14));
    }
  }
}

TEST_CASE("discrete Bernstein inequalities across regimes") {
  const GridPtr g = make_grid(1, 512, 4.0);
  for (double eps : {0.2, 0.1, 0.05}) {
    const BandPartition p(g, eps);
    for (unsigned seed = 1; seed <= 5; ++seed) {
      const SpectralField f = random_spectral(g, 1, seed);
      for (double sp : {0.5, 1.0}) {
        for (double s : {0.5, 1.5, 2.5}) {
          CHECK(regime_norm(f, p, Regime::medium, s) <=
                4.0 * std::pow(eps, -sp) * regime_norm(f, p, Regime::medium, s - sp) + 1e-300);
          CHECK(regime_norm(f, p, Regime::high, s) <=
                4.0 * std::pow(eps, sp) * regime_norm(f, p, Regime::high, s + sp) + 1e-300);
          CHECK(regime_norm(f, p, Regime::low, s) <= regime_norm(f, p, Regime::low, s - sp) * 1.0 + 1e-300);
        }
      }
    }
  }
}

TEST_CASE("time accumulator") {
  TimeNormAccumulator acc;
  const BandNorms b{-1, {1.0, 2.0, 0.5}};
  for (int i = 0; i <= 40; ++i) acc.push(0.05 * i, b);
  CHECK(acc.horizon() == doctest::Approx(2.0));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(acc.sup().values[i] == b.values[i]);
    CHECK(acc.l2().values[i] == doctest::Approx(std::sqrt(2.0) * b.values[i]).epsilon(1e-13));
    CHECK(acc.l1().values[i] == doctest::Approx(2.0 * b.values[i]).epsilon(1e-13));
  }
  TimeNormAccumulator bad;
  bad.push(0.0, b);
  bad.push(0.1, b);
  CHECK_THROWS_AS(bad.push(0.25, b), ArgumentError);

  // Monotone in the horizon.
  TimeNormAccumulator mono;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  BandNorms prev_sup{0, {0, 0}}, prev_l2{0, {0, 0}}, prev_l1{0, {0, 0}};
  for (int i = 0; i < 50; ++i) {
    mono.push(0.1 * i, BandNorms{0, {d(rng), d(rng)}});
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(mono.sup().values[k] >= prev_sup.values[k]);
      CHECK(mono.l2().values[k] >= prev_l2.values[k]);
      CHECK(mono.l1().values[k] >= prev_l1.values[k]);
    }
    prev_sup = mono.sup();
    prev_l2 = mono.l2();
    prev_l1 = mono.l1();
  }
}

TEST_CASE("energy and dissipation functionals") {
  const GridPtr g = make_grid(1, 64, 4.0);
  const BandPartition p(g, 0.2);
  const PerturbationState zero{SpectralField::zeros(g, 1), SpectralField::zeros(g, 3), SpectralField::zeros(g, 3),
                               SpectralField::zeros(g, 3)};
  std::vector<double> times;
  std::vector<PerturbationState> traj;
  for (int i = 0; i <= 10; ++i) {
    times.push_back(0.1 * i);
    traj.push_back(zero);
  }
  CHECK(energy_functional(times, traj, p).total == 0.0);
  const Breakdown d0 = dissipation_functional(times, traj, p);
  CHECK(d0.total == 0.0);
  CHECK(d0.terms.size() == 12);

  // Time-constant state in the low band j = -1.
  PerturbationState s = zero;
  s.a = single_band(g, p, -1, 0.7);
  s.u = SpectralField::zeros(g, 3);
  const SpectralField b1 = single_band(g, p, -1, 0.2);
  std::copy(b1.data.begin(), b1.data.end(), s.u.comp(1));
  std::vector<PerturbationState> constant(times.size(), s);
  const Breakdown d = dissipation_functional(times, constant, p);
  const double T = 1.0;
  for (const auto& t : d.terms) {
    if (t.name.rfind("L2_t a_low", 0) == 0) CHECK(t.value == doctest::Approx(std::sqrt(T) * regime_norm(s.a, p, Regime::low, 0.5)).epsilon(1e-13));
    if (t.name.rfind("L2_t u_low", 0) == 0) CHECK(t.value == doctest::Approx(std::sqrt(T) * regime_norm(s.u, p, Regime::low, 0.5)).epsilon(1e-13));
    if (t.regime != "low") CHECK(t.value == 0.0);
  }
  const Breakdown e = energy_functional(times, constant, p);
  CHECK(e.total == doctest::Approx(regime_norm(s.a, p, Regime::low, 0.5) + 0.2 * regime_norm(s.u, p, Regime::low, 0.5)).epsilon(1e-13));
  CHECK(e.a_variable == "rho - rho_bar");
  CHECK_THROWS_AS(energy_functional({0.0, 0.1, 0.3}, {zero, zero, zero}, p), ArgumentError);
}

TEST_CASE("initial energy of high-frequency data is linear in eps") {
  const GridPtr g = make_grid(1, 256, 1.0);
  PerturbationState s{SpectralField::zeros(g, 1), SpectralField::zeros(g, 3), SpectralField::zeros(g, 3),
                      SpectralField::zeros(g, 3)};
  const BandPartition probe(g, 0.25);
  s.a = single_band(g, probe, 6, 1.0);  // 2^5 <= |k| < 2^6: high for eps >= 1/16
  double ratio = -1.0;
  for (double eps : {0.25, 0.125, 0.0625}) {
    const BandPartition p(g, eps);
    REQUIRE(p.regime(6) == Regime::high);
    const double e0 = initial_energy(s, p).total;
    if (ratio < 0) {
      ratio = e0 / eps;
    } else {
      CHECK(e0 / eps == doctest::Approx(ratio).epsilon(1e-14));
    }
  }
}
