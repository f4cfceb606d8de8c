#pragma once

// Galerkin-truncated Fourier right-hand sides for 1D3V runs with the
// quadratic pressure law P = rho^2 / 2 (h(rho) = rho - rho_bar, P' = rho).
// Products are direct convolution sums over modes |l| <= M, independent of
// the FFT machinery. Mode l sits at index l + M; fields are ordered
// [rho', u1..3, e1..3, b'1..3] for the Euler-Maxwell system.

#include <Eigen/Dense>
#include <array>
#include <complex>

namespace oracle {

using cd = std::complex<double>;

struct Galerkin1D {
  int M;
  double L;
  double eps;
  double rho_bar = 1.0;
  std::array<double, 3> bb{0.0, 0.0, 1.0};

  int modes() const { return 2 * M + 1; }
  double k(int l) const { return l / L; }
  Eigen::Index at(int field, int l) const { return field * modes() + (l + M); }

  // (f g)_l truncated to |l| <= M.
  Eigen::VectorXcd product(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(modes());
    for (int l1 = -M; l1 <= M; ++l1) {
      for (int l2 = -M; l2 <= M; ++l2) {
        const int l = l1 + l2;
        if (l < -M || l > M) continue;
        out(l + M) += f(l1 + M) * g(l2 + M);
      }
    }
    return out;
  }

  Eigen::VectorXcd field(const Eigen::VectorXcd& y, int f) const { return y.segment(f * modes(), modes()); }

  Eigen::VectorXcd dx(const Eigen::VectorXcd& f) const {
    Eigen::VectorXcd out(modes());
    for (int l = -M; l <= M; ++l) out(l + M) = cd(0.0, k(l)) * f(l + M);
    return out;
  }

  Eigen::VectorXcd em_rhs(const Eigen::VectorXcd& y) const {
    const cd I(0.0, 1.0);
    const double pp = rho_bar;  // P'(rho_bar)
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(y.size());
    const Eigen::VectorXcd r = field(y, 0);
    std::array<Eigen::VectorXcd, 3> u, e, b, ru, dudx;
    for (int a = 0; a < 3; ++a) {
      u[a] = field(y, 1 + a);
      e[a] = field(y, 4 + a);
      b[a] = field(y, 7 + a);
    }
    for (int a = 0; a < 3; ++a) {
      ru[a] = product(r, u[a]);
      dudx[a] = dx(u[a]);
    }
    for (int l = -M; l <= M; ++l) {
      const int i = l + M;
      const double kx = k(l);
      out(at(0, l)) = -rho_bar * I * kx * u[0](i) - I * kx * ru[0](i);
      // k = (kx, 0, 0): (i k x v) = i kx (0, -v3, v2)
      const std::array<cd, 3> curl_b{0.0, -I * kx * b[2](i), I * kx * b[1](i)};
      const std::array<cd, 3> curl_e{0.0, -I * kx * e[2](i), I * kx * e[1](i)};
      const std::array<cd, 3> uxb{u[1](i) * bb[2] - u[2](i) * bb[1], u[2](i) * bb[0] - u[0](i) * bb[2],
                                  u[0](i) * bb[1] - u[1](i) * bb[0]};
      for (int a = 0; a < 3; ++a) {
        const cd grad_p = a == 0 ? I * kx * pp / rho_bar * r(i) : cd(0.0);
        out(at(1 + a, l)) = -grad_p / (eps * eps) - (e[a](i) + u[a](i)) / (eps * eps) - uxb[a] / eps;
        out(at(4 + a, l)) = curl_b[a] / eps + rho_bar * u[a](i) + ru[a](i);
        out(at(7 + a, l)) = -curl_e[a] / eps;
      }
    }
    // Convection u1 d_x u and Lorentz term (u x b')/eps.
    for (int a = 0; a < 3; ++a) {
      const Eigen::VectorXcd conv = product(u[0], dudx[a]);
      const int p = (a + 1) % 3;
      const int q = (a + 2) % 3;
      const Eigen::VectorXcd lor = product(u[p], b[q]) - product(u[q], b[p]);
      out.segment(at(1 + a, -M), modes()) -= conv + lor / eps;
    }
    return out;
  }

  // Drift-diffusion: d_t r = P' r_xx - rho_bar r + d_x(r r_x) + d_x(r phi_x), -phi_xx = r.
  Eigen::VectorXcd dd_rhs(const Eigen::VectorXcd& r) const {
    Eigen::VectorXcd phi_x(modes());
    for (int l = -M; l <= M; ++l) {
      const double kk = k(l);
      phi_x(l + M) = l == 0 ? cd(0.0) : cd(0.0, kk) * r(l + M) / (kk * kk);
    }
    const Eigen::VectorXcd flux = product(r, dx(r)) + product(r, phi_x);
    Eigen::VectorXcd out(modes());
    for (int l = -M; l <= M; ++l) {
      const double kk = k(l);
      out(l + M) = -(rho_bar * kk * kk + rho_bar) * r(l + M) + cd(0.0, kk) * flux(l + M);
    }
    return out;
  }
};

}  // namespace oracle
