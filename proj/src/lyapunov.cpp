#include "emrelax/lyapunov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include "emrelax/parallel.hpp"

namespace emrelax {

namespace {

constexpr cplx kI{0.0, 1.0};

int levi(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

// Adds c Re(x^H T y) with x at row offset xo, y at column offset yo.
template <class T>
void add_cross(Mat10c& q, int xo, int yo, const T& t, double c) {
  q.block(xo, yo, t.rows(), t.cols()) += 0.5 * c * t;
  q.block(yo, xo, t.cols(), t.rows()) += 0.5 * c * t.adjoint();
}

double eta_power(double eta) { return std::pow(eta, 1.25); }

Mat10c hermitian(const Mat10c& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace

LyapunovWeights::LyapunovWeights(double eta_value) : eta(eta_value) {
  if (!(eta_value > 0.0 && eta_value < 1.0)) {
    std::ostringstream os;
    os << "eta must lie in (0, 1), got " << eta_value;
    throw ArgumentError(os.str());
  }
}

FormPieces form_pieces(const ModelParams& params, const Vec3& xi) {
  const double eps = params.epsilon();
  const double x2 = norm2(xi);
  const double d1 = 1.0 + eps * eps * x2;
  const double d2 = d1 * (1.0 + x2);
  FormPieces p{Mat10c::Zero(), Mat10c::Zero(), Mat10c::Zero()};
  p.q0(kN, kN) = 0.5;
  for (int k = 0; k < 3; ++k) {
    p.q0(kU + k, kU + k) = 0.5 * params.pprime_bar() * eps * eps;
    p.q0(kE + k, kE + k) = 0.5 / params.kay();
    p.q0(kH + k, kH + k) = 0.5 / params.kay();
  }
  Eigen::Matrix<cplx, 3, 1> ixi;
  for (int k = 0; k < 3; ++k) ixi(k) = kI * xi[k];
  add_cross(p.q1, kU, kN, ixi, eps * eps / d1);
  add_cross(p.q1, kU, kE, Eigen::Matrix<cplx, 3, 3>::Identity(), eps * eps / d1);
  // (-i xi x h)_a = sum -i levi(a,b,c) xi_b h_c
  Eigen::Matrix<cplx, 3, 3> curl = Eigen::Matrix<cplx, 3, 3>::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) curl(a, c) += -kI * static_cast<double>(levi(a, b, c)) * xi[b];
  add_cross(p.q2, kE, kH, curl, eps / d2);
  return p;
}

LyapunovForm build_form(const ModelParams& params, const Vec3& xi, const LyapunovWeights& weights) {
  const FormPieces p = form_pieces(params, xi);
  Mat10c q = p.q0 + weights.eta * p.q1 + eta_power(weights.eta) * p.q2;
  return {hermitian(q), xi, weights, params};
}

double form_value(const LyapunovForm& form, const Vec10c& u) {
  return (u.adjoint() * form.q * u)(0, 0).real();
}

namespace {

Eigen::Matrix<double, 10, 1> inv_sqrt_weight(const ModelParams& params) {
  return weight_diagonal(params).array().rsqrt();
}

Eigen::VectorXd hermitian_eigs(const MatXc& a) {
  Eigen::SelfAdjointEigenSolver<MatXc> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

EquivalenceBounds equivalence_bounds(const LyapunovForm& form) {
  const auto s = inv_sqrt_weight(form.params).asDiagonal();
  const Eigen::VectorXd ev = hermitian_eigs(MatXc(s * form.q * s));
  return {ev(0), ev(ev.size() - 1)};
}

Mat10c dissipation_matrix(const ModelParams& params, const Vec3& xi, double c0) {
  const double eps = params.epsilon();
  const double x2 = norm2(xi);
  const double d1 = 1.0 + eps * eps * x2;
  Mat10c r = Mat10c::Zero();
  r(kN, kN) = c0 * (1.0 + x2) / d1;
  for (int k = 0; k < 3; ++k) {
    r(kU + k, kU + k) = c0;
    r(kE + k, kE + k) = c0 / d1;
    r(kH + k, kH + k) = c0 * x2 / (d1 * (1.0 + x2));
  }
  return r;
}

double form_scale(const LyapunovForm& form) {
  return hermitian_eigs(MatXc(form.q)).cwiseAbs().maxCoeff();
}

namespace {

bool same_params(const ModelParams& a, const ModelParams& b) {
  return a.epsilon() == b.epsilon() && a.rho_bar() == b.rho_bar() && a.b_bar() == b.b_bar() &&
         a.law().amplitude == b.law().amplitude && a.law().gamma == b.law().gamma;
}

MatXc restricted_gap_matrix(const Mat10c& q, const Mat10c& m, const MatXc& basis) {
  const Mat10c g = -(m.adjoint() * q + q * m);
  return basis.adjoint() * g * basis;
}

}  // namespace

double dissipation_gap(const LyapunovForm& form, const SymbolMatrix& sym, double c0) {
  if (form.xi != sym.xi || !same_params(form.params, sym.params)) {
    throw ArgumentError("dissipation_gap: form and symbol disagree on (params, xi)");
  }
  const MatXc basis = gauss_basis(sym.params, sym.xi);
  const MatXc g = restricted_gap_matrix(form.q, sym.m, basis) -
                  basis.adjoint() * dissipation_matrix(sym.params, sym.xi, c0) * basis;
  return hermitian_eigs(g)(0);
}

namespace {

// Per grid point, every eta-dependent matrix is a combination of three fixed pieces.
struct GridPoint {
  ModelParams params;
  Vec3 xi;
  FormPieces q;
  MatXc g0, g1, g2, rt;
  Mat10c s0, s1, s2;  // W^{-1/2} q_k W^{-1/2}
};

GridPoint prepare(const ModelParams& params, const Vec3& xi) {
  GridPoint p{params, xi, form_pieces(params, xi), {}, {}, {}, {}, {}, {}, {}};
  const SymbolMatrix sym = assemble_symbol(params, xi);
  const MatXc basis = gauss_basis(params, xi);
  p.g0 = restricted_gap_matrix(p.q.q0, sym.m, basis);
  p.g1 = restricted_gap_matrix(p.q.q1, sym.m, basis);
  p.g2 = restricted_gap_matrix(p.q.q2, sym.m, basis);
  p.rt = basis.adjoint() * dissipation_matrix(params, xi, 1.0) * basis;
  const auto s = inv_sqrt_weight(params).asDiagonal();
  p.s0 = s * p.q.q0 * s;
  p.s1 = s * p.q.q1 * s;
  p.s2 = s * p.q.q2 * s;
  return p;
}

struct EtaState {
  std::vector<MatXc> g;    // gap matrix at c0 = 0
  std::vector<double> tol;
  std::vector<double> c_low;
  std::vector<double> c_high;
};

EtaState eta_state(const std::vector<GridPoint>& pts, double eta, double tol_rel) {
  EtaState st;
  st.g.resize(pts.size());
  st.tol.resize(pts.size());
  st.c_low.resize(pts.size());
  st.c_high.resize(pts.size());
  const double e54 = eta_power(eta);
  parallel_for(pts.size(), [&](std::size_t i) {
    const GridPoint& p = pts[i];
    st.g[i] = p.g0 + eta * p.g1 + e54 * p.g2;
    const Mat10c q = p.q.q0 + eta * p.q.q1 + e54 * p.q.q2;
    st.tol[i] = tol_rel * hermitian_eigs(MatXc(q)).cwiseAbs().maxCoeff();
    const Eigen::VectorXd ev = hermitian_eigs(MatXc(p.s0 + eta * p.s1 + e54 * p.s2));
    st.c_low[i] = ev(0);
    st.c_high[i] = ev(ev.size() - 1);
  });
  return st;
}

double gap_at(const GridPoint& p, const EtaState& st, std::size_t i, double c0) {
  return hermitian_eigs(st.g[i] - c0 * p.rt)(0);
}

// Index of the first failing point, or npos.
std::size_t first_failure(const std::vector<GridPoint>& pts, const EtaState& st, double c0, bool need_equiv) {
  std::atomic<std::size_t> first{std::numeric_limits<std::size_t>::max()};
  parallel_for(pts.size(), [&](std::size_t i) {
    if (i > first.load()) return;
    const bool bad = (need_equiv && !(st.c_low[i] > 0.0)) || gap_at(pts[i], st, i, c0) < -st.tol[i];
    if (!bad) return;
    std::size_t cur = first.load();
    while (i < cur && !first.compare_exchange_weak(cur, i)) {
    }
  });
  return first.load();
}

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

double max_c0(const std::vector<GridPoint>& pts, const EtaState& st, double rel) {
  if (first_failure(pts, st, 0.0, true) != kNone) return 0.0;
  double lo = 0.0;
  double hi = 1e-3;
  while (first_failure(pts, st, hi, false) == kNone) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) return lo;
  }
  while (hi - lo > rel * hi) {
    const double mid = 0.5 * (lo + hi);
    (first_failure(pts, st, mid, false) == kNone ? lo : hi) = mid;
  }
  return lo;
}

CertificateRow row_for(const GridPoint& p, const EtaState& st, std::size_t i, double c0) {
  return {p.params.epsilon(), p.xi, gap_at(p, st, i, c0), st.tol[i], st.c_low[i], st.c_high[i]};
}

}  // namespace

SearchResult search_eta_c0(const std::vector<ModelParams>& params_list, const std::vector<Vec3>& xi_grid,
                           const SearchOptions& opts) {
  if (params_list.empty() || xi_grid.empty()) throw ArgumentError("search_eta_c0: empty grid");
  std::vector<GridPoint> pts;
  pts.reserve(params_list.size() * xi_grid.size());
  for (const auto& p : params_list)
    for (const auto& xi : xi_grid) pts.push_back(prepare(p, xi));

  SearchResult res;
  constexpr double kEtaFloor = 1e-4;
  {
    const EtaState st = eta_state(pts, kEtaFloor, opts.tol);
    const std::size_t bad = first_failure(pts, st, 0.0, true);
    if (bad != kNone) {
      res.worst = row_for(pts[bad], st, bad, 0.0);
      std::ostringstream os;
      os << "no admissible eta: eta = " << kEtaFloor << " already fails at epsilon = " << res.worst.epsilon
         << ", xi = (" << res.worst.xi[0] << ", " << res.worst.xi[1] << ", " << res.worst.xi[2] << ")";
      res.message = os.str();
      return res;
    }
  }
  double lo = kEtaFloor;
  double hi = 1.0;
  while (hi - lo > opts.bisect_rel * hi) {
    const double mid = 0.5 * (lo + hi);
    const EtaState st = eta_state(pts, mid, opts.tol);
    (first_failure(pts, st, 0.0, true) == kNone ? lo : hi) = mid;
  }
  res.eta_max = lo;

  double best_eta = 0.0;
  double best_c0 = -1.0;
  auto consider = [&](double eta) {
    const double c0 = max_c0(pts, eta_state(pts, eta, opts.tol), opts.bisect_rel);
    if (c0 > best_c0) {
      best_c0 = c0;
      best_eta = eta;
    }
    return c0;
  };
  const std::vector<double> cands = log_space(std::max(kEtaFloor, 1e-3 * res.eta_max), res.eta_max,
                                              std::max<std::size_t>(opts.eta_candidates, 2));
  std::size_t best_idx = 0;
  {
    double top = -1.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const double c0 = consider(cands[i]);
      if (c0 > top) {
        top = c0;
        best_idx = i;
      }
    }
  }
  // Golden-section search in log(eta) on the bracket around the best candidate.
  double a = std::log(cands[best_idx == 0 ? 0 : best_idx - 1]);
  double b = std::log(cands[std::min(best_idx + 1, cands.size() - 1)]);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = consider(std::exp(x1));
  double f2 = consider(std::exp(x2));
  for (std::size_t it = 0; it < opts.refine_steps; ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = consider(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = consider(std::exp(x2));
    }
  }
  res.eta_star = best_eta;
  res.c0_star = best_c0;

  const EtaState st = eta_state(pts, res.eta_star, opts.tol);
  res.table.resize(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { res.table[i] = row_for(pts[i], st, i, res.c0_star); });
  double worst_rel = std::numeric_limits<double>::infinity();
  for (const auto& row : res.table) {
    res.cond_number = std::max(res.cond_number, row.c_high / row.c_low);
    res.c_high_max = std::max(res.c_high_max, row.c_high);
    const double rel = row.gap / row.tol;
    if (rel < worst_rel) {
      worst_rel = rel;
      res.worst = row;
    }
  }
  res.ok = res.c0_star > 0.0;
  if (!res.ok) res.message = "admissible eta found but no positive c0";
  return res;
}

SearchResult search_eta_c0(const ModelParams& params, const std::vector<Vec3>& xi_grid,
                           const SearchOptions& opts) {
  return search_eta_c0(std::vector<ModelParams>{params}, xi_grid, opts);
}

}  // namespace emrelax
