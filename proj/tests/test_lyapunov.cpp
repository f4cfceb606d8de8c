#include <cmath>
#include <random>

#include "doctest.h"
#include "emrelax/lyapunov.hpp"

using namespace emrelax;

namespace {

const cplx I{0.0, 1.0};

ModelParams params(double eps, Vec3 b = {0, 0, 1}) { return ModelParams(1.0, b, eps, PressureLaw{}); }

std::vector<Vec3> radial_grid(double lo, double hi, std::size_t n, Vec3 dir = {1, 0, 0}) {
  std::vector<Vec3> out;
  for (double r : log_space(lo, hi, n)) out.push_back({r * dir[0], r * dir[1], r * dir[2]});
  return out;
}

// The functional written out term by term.
double lyapunov_terms(const ModelParams& p, const Vec3& xi, double eta, const FourierState& s) {
  const double eps = p.epsilon();
  const double x2 = norm2(xi);
  const double d1 = 1.0 + eps * eps * x2;
  const double d2 = d1 * (1.0 + x2);
  double diag = std::norm(s.n);
  for (int k = 0; k < 3; ++k) {
    diag += p.pprime_bar() * eps * eps * std::norm(s.u[k]) + (std::norm(s.e[k]) + std::norm(s.h[k])) / p.kay();
  }
  cplx un = 0.0, ue = 0.0;
  for (int k = 0; k < 3; ++k) {
    un += std::conj(s.u[k]) * I * xi[k] * s.n;
    ue += std::conj(s.u[k]) * s.e[k];
  }
  const CVec3 ixi{I * xi[0], I * xi[1], I * xi[2]};
  const CVec3 c = cross(ixi, s.h);
  cplx eh = 0.0;
  for (int k = 0; k < 3; ++k) eh += std::conj(s.e[k]) * (-c[k]);
  return 0.5 * diag + eta * eps * eps * un.real() / d1 + eta * eps * eps * ue.real() / d1 +
         std::pow(eta, 1.25) * eps * eh.real() / d2;
}

// Gap of one (u_k, e_k) pair at xi = 0, written with plain 2x2 algebra.
double pair_gap(const ModelParams& p, double eta, double c0) {
  const double eps = p.epsilon();
  const double q11 = 0.5 * p.pprime_bar() * eps * eps, q12 = 0.5 * eta * eps * eps, q22 = 0.5 / p.kay();
  const double m11 = -1.0 / (eps * eps), m12 = -1.0 / (eps * eps), m21 = p.rho_bar(), m22 = 0.0;
  // QM
  const double a11 = q11 * m11 + q12 * m21, a12 = q11 * m12 + q12 * m22;
  const double a21 = q12 * m11 + q22 * m21, a22 = q12 * m12 + q22 * m22;
  const double g11 = -2.0 * a11 - c0, g22 = -2.0 * a22 - c0, g12 = -(a12 + a21);
  const double tr = g11 + g22, det = g11 * g22 - g12 * g12;
  return 0.5 * tr - std::sqrt(0.25 * tr * tr - det);
}

}  // namespace

TEST_CASE("weights validation") {
  CHECK_THROWS_AS(LyapunovWeights(0.0), ArgumentError);
  CHECK_THROWS_AS(LyapunovWeights(1.0), ArgumentError);
  CHECK_NOTHROW(LyapunovWeights(0.5));
}

TEST_CASE("form reduces to the energy weight for vanishing eta") {
  const ModelParams p(1.3, {0, 0, 1}, 0.4, PressureLaw{0.8, 1.7});
  const LyapunovForm f = build_form(p, {0.3, 1.0, -2.0}, LyapunovWeights(1e-14));
  Mat10c expect = Mat10c::Zero();
  expect(kN, kN) = 0.5;
  for (int k = 0; k < 3; ++k) {
    expect(kU + k, kU + k) = 0.5 * p.pprime_bar() * 0.16;
    expect(kE + k, kE + k) = 0.5 / p.kay();
    expect(kH + k, kH + k) = 0.5 / p.kay();
  }
  CHECK((f.q - expect).norm() < 1e-12);
  const auto b = equivalence_bounds(f);
  const double vals[] = {1.0, p.pprime_bar(), 1.0 / p.kay()};
  CHECK(b.c_low == doctest::Approx(0.5 * *std::min_element(vals, vals + 3)).epsilon(1e-10));
  CHECK(b.c_high == doctest::Approx(0.5 * *std::max_element(vals, vals + 3)).epsilon(1e-10));
  const auto b1 = equivalence_bounds(build_form(params(0.3), {1, 0, 0}, LyapunovWeights(1e-14)));
  CHECK(b1.c_low == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b1.c_high == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("form structure") {
  const LyapunovForm f0 = build_form(params(0.5), {0, 0, 0}, LyapunovWeights(0.3));
  CHECK(f0.q.block(kU, kN, 3, 1).norm() == 0.0);
  CHECK(f0.q.block(kE, kH, 3, 3).norm() == 0.0);
  CHECK(f0.q.block(kU, kE, 3, 3).norm() > 0.0);
  const LyapunovForm f = build_form(params(0.5), {0.2, -1, 3}, LyapunovWeights(0.3));
  CHECK((f.q - f.q.adjoint()).norm() == 0.0);
  FourierState s;
  s.u[0] = 1.0;
  CHECK(form_value(build_form(params(1.0), {1, 0, 0}, LyapunovWeights(0.1)), s.to_vector()) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("matrix form matches the term-by-term functional") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  for (double eps : {1.0, 0.1, 0.01}) {
    const ModelParams p(1.4, {0.1, 0.2, 0.9}, eps, PressureLaw{0.6, 1.3});
    for (const Vec3& xi : std::vector<Vec3>{{0, 0, 0}, {0.5, 0, 0}, {1, -2, 3}, {40, 10, -5}}) {
      const LyapunovForm f = build_form(p, xi, LyapunovWeights(0.37));
      double worst = 0.0;
      for (int t = 0; t < 1000; ++t) {
        Vec10c u;
        for (int i = 0; i < 10; ++i) u(i) = cplx(nd(rng), nd(rng));
        const double ref = lyapunov_terms(p, xi, 0.37, FourierState::from_vector(u));
        worst = std::max(worst, std::abs(form_value(f, u) - ref) / std::abs(ref));
        CHECK(std::abs((u.adjoint() * f.q * u)(0, 0).imag()) < 1e-12 * u.squaredNorm());
      }
      CHECK(worst <= 1e-14);
    }
  }
}

TEST_CASE("gap is nonnegative at c0 = 0 for a small eta") {
  for (double eps : {1.0, 0.1, 0.01}) {
    const ModelParams p = params(eps);
    for (const Vec3& xi : radial_grid(1e-2, 1e3, 20, {0.6, 0.0, 0.8})) {
      const LyapunovForm f = build_form(p, xi, LyapunovWeights(0.01));
      CHECK(dissipation_gap(f, assemble_symbol(p, xi), 0.0) >= -1e-12);
    }
  }
}

TEST_CASE("xi = 0 gap agrees with the pair oracle") {
  for (double eps : {1.0, 0.2}) {
    const ModelParams p = params(eps, {0, 0, 0});
    const SymbolMatrix s = assemble_symbol(p, {0, 0, 0});
    for (double eta : {0.01, 0.1, 0.4}) {
      const LyapunovForm f = build_form(p, {0, 0, 0}, LyapunovWeights(eta));
      for (double c0 : {0.0, 0.01, 0.1}) {
        // The conserved h directions contribute an exact zero.
        CHECK(dissipation_gap(f, s, c0) == doctest::Approx(std::min(0.0, pair_gap(p, eta, c0))).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("xi = 0 search is limited by the (u, e) block") {
  const ModelParams p = params(1.0, {0, 0, 0});
  const SearchResult r = search_eta_c0(p, {{0, 0, 0}});
  REQUIRE(r.ok);
  // Brute-force the best pair rate over eta.
  double best = 0.0;
  for (int i = 1; i < 4000; ++i) {
    const double eta = i / 4000.0;
    double lo = 0.0, hi = 10.0;
    if (pair_gap(p, eta, 0.0) < 0.0) continue;
    // equivalence: pair form positive
    const double q11 = 0.5, q12 = 0.5 * eta, q22 = 0.5;
    if (q11 * q22 - q12 * q12 <= 0.0) continue;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (pair_gap(p, eta, mid) >= 0.0 ? lo : hi) = mid;
    }
    best = std::max(best, lo);
  }
  CHECK(r.c0_star == doctest::Approx(best).epsilon(0.01));
  CHECK(r.eta_star > 0.0);
  CHECK(r.eta_star < 1.0);
}

TEST_CASE("large eta violates the dissipation inequality") {
  const ModelParams p = params(1.0);
  const Vec3 xi{1, 0, 0};
  const LyapunovForm f = build_form(p, xi, LyapunovWeights(0.99));
  const double gap = dissipation_gap(f, assemble_symbol(p, xi), 0.0);
  CHECK(gap < 0.0);
  MESSAGE("gap at eta = 0.99: " << gap);
}

TEST_CASE("mismatched form and symbol") {
  const ModelParams p = params(1.0);
  const LyapunovForm f = build_form(p, {1, 0, 0}, LyapunovWeights(0.1));
  CHECK_THROWS_AS(dissipation_gap(f, assemble_symbol(p, {2, 0, 0}), 0.0), ArgumentError);
  CHECK_THROWS_AS(dissipation_gap(f, assemble_symbol(params(0.5), {1, 0, 0}), 0.0), ArgumentError);
}

TEST_CASE("restricted gap equals the constrained minimum") {
  std::mt19937_64 rng(8);
  for (double eps : {1.0, 0.05}) {
    const ModelParams p = params(eps);
    for (const Vec3& xi : std::vector<Vec3>{{0.3, 0, 0}, {2, 1, -1}, {30, 0, 4}}) {
      const SymbolMatrix s = assemble_symbol(p, xi);
      const LyapunovForm f = build_form(p, xi, LyapunovWeights(0.2));
      const double c0 = 0.01;
      const double gap = dissipation_gap(f, s, c0);
      const Mat10c g = -(s.m.adjoint() * f.q + f.q * s.m + dissipation_matrix(p, xi, c0));
      // Orthogonal projector onto the constraint null space, via the constraint rows.
      Eigen::Matrix<cplx, 2, 10> c = Eigen::Matrix<cplx, 2, 10>::Zero();
      c(0, kN) = p.kay();
      for (int k = 0; k < 3; ++k) {
        c(0, kE + k) = I * xi[k];
        c(1, kH + k) = xi[k];
      }
      const Eigen::Matrix<cplx, 10, 2> ch = c.adjoint();
      const Mat10c proj = Mat10c::Identity() - ch * (c * ch).inverse() * c;
      // Push the complement of the constraint space far up the spectrum.
      const double sigma = 10.0 * (g.norm() + 1.0);
      const Mat10c lifted = proj * (0.5 * (g + g.adjoint())) * proj + sigma * (Mat10c::Identity() - proj);
      Eigen::SelfAdjointEigenSolver<Mat10c> es(0.5 * (lifted + lifted.adjoint()), Eigen::EigenvaluesOnly);
      const double rq = es.eigenvalues()(0);
      CHECK(std::abs(rq - gap) <= 1e-8 * std::max(1.0, std::abs(gap)));
      // Random compatible vectors never go below the gap.
      for (int t = 0; t < 500; ++t) {
        Vec10c r;
        for (int i = 0; i < 10; ++i) r(i) = cplx(std::normal_distribution<double>()(rng), std::normal_distribution<double>()(rng));
        r = proj * r;
        r.normalize();
        CHECK((r.adjoint() * g * r)(0, 0).real() >= gap - 1e-12);
      }
    }
  }
}

TEST_CASE("search on the eps = 1 grid") {
  const ModelParams p = params(1.0);
  const auto grid = radial_grid(1e-2, 1e2, 100);
  const SearchResult r = search_eta_c0(p, grid);
  REQUIRE(r.ok);
  CHECK(r.eta_star > 0.0);
  CHECK(r.eta_star < 1.0);
  CHECK(r.c0_star > 0.0);
  CHECK(r.cond_number <= 1e3);
  CHECK(r.table.size() == grid.size());
  for (const auto& row : r.table) CHECK(row.gap >= -row.tol);
  MESSAGE("eta* = " << r.eta_star << ", c0* = " << r.c0_star << ", cond = " << r.cond_number);

  SearchOptions half;
  half.tol = 0.5e-10;
  const SearchResult r2 = search_eta_c0(p, grid, half);
  CHECK(std::abs(r2.eta_star - r.eta_star) < 0.01 * r.eta_star);
  CHECK(std::abs(r2.c0_star - r.c0_star) < 0.01 * r.c0_star);

  // Monotone admissibility below eta_max.
  for (double eta : log_space(1e-4, r.eta_max * 0.999, 25)) {
    for (const Vec3& xi : grid) {
      const LyapunovForm f = build_form(p, xi, LyapunovWeights(eta));
      CHECK(dissipation_gap(f, assemble_symbol(p, xi), 0.0) >= -1e-10 * form_scale(f));
      CHECK(equivalence_bounds(f).c_low > 0.0);
    }
  }
}

TEST_CASE("Groenwall bound along propagated trajectories") {
  const std::vector<ModelParams> ps{params(1.0), params(0.1)};
  const auto grid = radial_grid(1e-2, 1e3, 30, {0.0, 0.6, 0.8});
  const SearchResult r = search_eta_c0(ps, grid);
  REQUIRE(r.ok);
  std::mt19937_64 rng(17);
  for (const ModelParams& p : ps) {
    for (std::size_t i = 0; i < grid.size(); i += 3) {
      const Vec3& xi = grid[i];
      const SymbolMatrix s = assemble_symbol(p, xi);
      const LyapunovForm f = build_form(p, xi, LyapunovWeights(r.eta_star));
      const Vec10c u0 = random_compatible_state(p, gauss_basis(p, xi), rng);
      const double l0 = form_value(f, u0);
      const double w = decay_weight(p.epsilon(), std::sqrt(norm2(xi)));
      for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double lt = form_value(f, propagator(s, t) * u0);
        CHECK(lt <= l0 * std::exp(-r.certified_rate() * w * t) * (1 + 1e-6));
      }
    }
  }
}
