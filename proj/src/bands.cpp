#include "emrelax/bands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "emrelax/kernels/kernels.hpp"

namespace emrelax {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::low:
      return "low";
    case Regime::medium:
      return "medium";
    case Regime::high:
      return "high";
  }
  return "?";
}

int j_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ArgumentError("j_epsilon: epsilon must lie in (0, 1]");
  return -static_cast<int>(std::floor(std::log2(epsilon))) + 1;
}

int band_of(double knorm) {
  if (!(knorm > 0.0)) throw ArgumentError("band_of: |k| must be positive");
  int e = 0;
  std::frexp(knorm, &e);
  return e;
}

BandPartition::BandPartition(GridPtr grid, double epsilon)
    : grid_(std::move(grid)), epsilon_(epsilon), j_eps_(j_epsilon(epsilon)) {
  const PeriodicGrid& g = *grid_;
  j_min_ = band_of(1.0 / g.length());
  j_max_ = j_min_;
  for (std::size_t m = 0; m < g.spec_size(); ++m) {
    if (g.knorm(m) > 0.0) j_max_ = std::max(j_max_, band_of(g.knorm(m)));
  }
  band_index_.resize(g.spec_size());
  for (std::size_t m = 0; m < g.spec_size(); ++m) {
    band_index_[m] = g.knorm(m) > 0.0 ? band_of(g.knorm(m)) - j_min_ : 0;
  }
}

Regime BandPartition::regime(int j) const {
  if (j <= 0) return Regime::low;
  if (j >= j_eps_) return Regime::high;
  return Regime::medium;
}

std::pair<int, int> BandPartition::range(Regime r) const {
  switch (r) {
    case Regime::low:
      return {std::numeric_limits<int>::min(), 0};
    case Regime::medium:
      return {1, j_eps_ - 1};
    case Regime::high:
      return {j_eps_, std::numeric_limits<int>::max()};
  }
  return {1, 0};
}

BandNorms band_norms(const SpectralField& f, const BandPartition& part) {
  require_same_grid(f.grid, part.grid(), "band_norms");
  const PeriodicGrid& g = *f.grid;
  std::vector<double> acc(static_cast<std::size_t>(part.num_bands()), 0.0);
  const auto& k = kernels::active();
  for (int c = 0; c < f.ncomp; ++c) {
    k.band_abs2(g.spec_size(), f.comp(c), g.weights().data(), part.band_index().data(), acc.data());
  }
  BandNorms out{part.j_min(), std::vector<double>(acc.size())};
  for (std::size_t i = 0; i < acc.size(); ++i) out.values[i] = std::sqrt(g.volume() * acc[i]);
  return out;
}

SpectralField band_project(const SpectralField& f, const BandPartition& part, int j) {
  require_same_grid(f.grid, part.grid(), "band_project");
  SpectralField out = SpectralField::zeros(f.grid, f.ncomp);
  if (j < part.j_min() || j > part.j_max()) return out;
  const std::size_t ns = f.grid->spec_size();
  for (int c = 0; c < f.ncomp; ++c) {
    for (std::size_t m = 0; m < ns; ++m) {
      if (part.band(m) == j) out.comp(c)[m] = f.comp(c)[m];
    }
  }
  return out;
}

double band_sum(const BandNorms& b, double s, int lo, int hi) {
  double sum = 0.0;
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    const int j = b.j_min + static_cast<int>(i);
    if (j < lo || j > hi) continue;
    sum += std::exp2(j * s) * b.values[i];
  }
  return sum;
}

double besov_norm(const BandNorms& b, double s) { return band_sum(b, s); }

double besov_norm(const SpectralField& f, const BandPartition& part, double s) {
  return besov_norm(band_norms(f, part), s);
}

double regime_norm(const BandNorms& b, const BandPartition& part, Regime r, double s) {
  const auto [lo, hi] = part.range(r);
  return band_sum(b, s, lo, hi);
}

double regime_norm(const SpectralField& f, const BandPartition& part, Regime r, double s) {
  return regime_norm(band_norms(f, part), part, r, s);
}

double hybrid_norm(const BandNorms& b, double s1, double s2) {
  return band_sum(b, s1, std::numeric_limits<int>::min(), 0) + band_sum(b, s2, 1);
}

double hybrid_norm(const SpectralField& f, const BandPartition& part, double s1, double s2) {
  return hybrid_norm(band_norms(f, part), s1, s2);
}

void TimeNormAccumulator::push(double t, const BandNorms& b) {
  if (!std::isfinite(t)) throw ArgumentError("time accumulator: non-finite time");
  if (count_ == 0) {
    j_min_ = b.j_min;
    sup_ = b.values;
    sq_int_.assign(b.values.size(), 0.0);
    int_.assign(b.values.size(), 0.0);
    last_ = b.values;
    t_first_ = t_last_ = t;
    count_ = 1;
    return;
  }
  if (b.j_min != j_min_ || b.values.size() != sup_.size()) {
    throw ArgumentError("time accumulator: band layout changed between samples");
  }
  const double dt = t - t_last_;
  if (!(dt > 0.0)) throw ArgumentError("time accumulator: times must increase");
  if (count_ == 1) {
    dt_ = dt;
  } else if (std::abs(dt - dt_) > 1e-9 * dt_) {
    std::ostringstream os;
    os << "time accumulator: non-uniform time grid (step " << dt << " vs " << dt_ << ")";
    throw ArgumentError(os.str());
  }
  for (std::size_t i = 0; i < sup_.size(); ++i) {
    const double v = b.values[i];
    sup_[i] = std::max(sup_[i], v);
    sq_int_[i] += 0.5 * dt * (last_[i] * last_[i] + v * v);
    int_[i] += 0.5 * dt * (last_[i] + v);
  }
  last_ = b.values;
  t_last_ = t;
  ++count_;
}

BandNorms TimeNormAccumulator::sup() const { return {j_min_, sup_}; }

BandNorms TimeNormAccumulator::l2() const {
  BandNorms out{j_min_, sq_int_};
  for (auto& v : out.values) v = std::sqrt(v);
  return out;
}

BandNorms TimeNormAccumulator::l1() const { return {j_min_, int_}; }

FunctionalAccumulator::FunctionalAccumulator(const BandPartition& part, std::string a_variable)
    : part_(part), a_variable_(std::move(a_variable)) {}

void FunctionalAccumulator::push(double t, const PerturbationState& s) {
  const double eps = part_.epsilon();
  const BandNorms nu = band_norms(s.u, part_);
  BandNorms neu = nu;
  for (auto& v : neu.values) v *= eps;
  acc_[0].push(t, band_norms(s.a, part_));
  acc_[1].push(t, neu);
  acc_[2].push(t, band_norms(s.e, part_));
  acc_[3].push(t, band_norms(s.h, part_));
  acc_[4].push(t, nu);
}

namespace {

void add_term(Breakdown& b, std::string name, Regime r, double s, double value) {
  b.total += value;
  b.terms.push_back({std::move(name), regime_name(r), s, value});
}

}  // namespace

Breakdown FunctionalAccumulator::energy() const {
  Breakdown b;
  b.a_variable = a_variable_;
  const double eps = part_.epsilon();
  struct Piece {
    Regime r;
    double s;
    double w;
  };
  for (const Piece& p : {Piece{Regime::low, 0.5, 1.0}, Piece{Regime::medium, 1.5, 1.0}, Piece{Regime::high, 2.5, eps}}) {
    double v = 0.0;
    for (int f = 0; f < 4; ++f) v += regime_norm(acc_[f].sup(), part_, p.r, p.s);
    std::ostringstream name;
    name << "sup_t(a,eps u,E,H)_" << regime_name(p.r) << "_B" << p.s;
    add_term(b, name.str(), p.r, p.s, p.w * v);
  }
  return b;
}

Breakdown FunctionalAccumulator::dissipation() const {
  Breakdown b;
  b.a_variable = a_variable_;
  const double eps = part_.epsilon();
  struct Term {
    const char* field;
    int acc;
    Regime r;
    double s;
    double w;
  };
  const Term terms[] = {
      {"a", 0, Regime::low, 0.5, 1.0},    {"u", 4, Regime::low, 0.5, 1.0},    {"E", 2, Regime::low, 0.5, 1.0},
      {"H", 3, Regime::low, 1.5, 1.0},    {"a", 0, Regime::medium, 2.5, 1.0}, {"u", 4, Regime::medium, 1.5, 1.0},
      {"E", 2, Regime::medium, 1.5, 1.0}, {"H", 3, Regime::medium, 1.5, 1.0}, {"a", 0, Regime::high, 2.5, 1.0},
      {"eps u", 4, Regime::high, 2.5, eps}, {"E", 2, Regime::high, 1.5, 1.0}, {"H", 3, Regime::high, 1.5, 1.0},
  };
  for (const Term& t : terms) {
    std::ostringstream name;
    name << "L2_t " << t.field << "_" << regime_name(t.r) << "_B" << t.s;
    add_term(b, name.str(), t.r, t.s, t.w * regime_norm(acc_[t.acc].l2(), part_, t.r, t.s));
  }
  return b;
}

namespace {

void check_traj(const std::vector<double>& times, const std::vector<PerturbationState>& traj) {
  if (times.size() != traj.size() || times.empty()) {
    throw ArgumentError("functional: times and trajectory must be nonempty and of equal length");
  }
}

FunctionalAccumulator accumulate(const std::vector<double>& times, const std::vector<PerturbationState>& traj,
                                 const BandPartition& part, const std::string& a_variable) {
  check_traj(times, traj);
  FunctionalAccumulator acc(part, a_variable);
  for (std::size_t i = 0; i < times.size(); ++i) acc.push(times[i], traj[i]);
  return acc;
}

}  // namespace

Breakdown energy_functional(const std::vector<double>& times, const std::vector<PerturbationState>& traj,
                            const BandPartition& part, const std::string& a_variable) {
  return accumulate(times, traj, part, a_variable).energy();
}

Breakdown dissipation_functional(const std::vector<double>& times, const std::vector<PerturbationState>& traj,
                                 const BandPartition& part, const std::string& a_variable) {
  return accumulate(times, traj, part, a_variable).dissipation();
}

Breakdown initial_energy(const PerturbationState& s0, const BandPartition& part, const std::string& a_variable) {
  Breakdown b;
  b.a_variable = a_variable;
  const BandNorms n[4] = {band_norms(s0.a, part), band_norms(s0.u, part), band_norms(s0.e, part),
                          band_norms(s0.h, part)};
  const double eps = part.epsilon();
  struct Piece {
    Regime r;
    double s;
    double w;
  };
  for (const Piece& p : {Piece{Regime::low, 0.5, 1.0}, Piece{Regime::medium, 1.5, 1.0}, Piece{Regime::high, 2.5, eps}}) {
    double v = 0.0;
    for (const auto& bn : n) v += regime_norm(bn, part, p.r, p.s);
    std::ostringstream name;
    name << "(a0,u0,E0,H0)_" << regime_name(p.r) << "_B" << p.s;
    add_term(b, name.str(), p.r, p.s, p.w * v);
  }
  return b;
}

}  // namespace emrelax
