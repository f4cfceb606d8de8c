#include "emrelax/cli.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "emrelax/config.hpp"
#include "emrelax/io.hpp"
#include "emrelax/lyapunov.hpp"
#include "emrelax/symbol.hpp"
#include "json.hpp"

namespace emrelax {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Log-spaced |xi| values from "lo:hi:count".
std::vector<double> parse_xi_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw ConfigError("--xi-grid: expected lo:hi:count, got '" + text + "'");
  double lo = 0.0, hi = 0.0;
  long count = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("lo");
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("hi");
    count = std::stol(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("count");
  } catch (const std::logic_error&) {
    throw ConfigError("--xi-grid: cannot parse '" + text + "'");
  }
  if (!(lo > 0.0 && hi >= lo) || count < 1) throw ConfigError("--xi-grid: need 0 < lo <= hi and count >= 1");
  return log_space(lo, hi, static_cast<std::size_t>(count));
}

std::vector<Vec3> xi_grid(const std::vector<double>& norms, const std::vector<Vec3>& dirs) {
  std::vector<Vec3> out;
  for (double k : norms) {
    for (const Vec3& d : dirs) out.push_back({k * d[0], k * d[1], k * d[2]});
  }
  return out;
}

void check_epsilons(const std::vector<double>& eps) {
  for (double e : eps) {
    if (!(e > 0.0 && e <= 1.0)) {
      std::ostringstream os;
      os << "--epsilon: " << e << " outside the valid range (0, 1]";
      throw ConfigError(os.str());
    }
  }
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Shared state of one invocation: the config, its hash and the manifest.
struct Context {
  RunConfig cfg;
  std::string config_text;
  json args = json::object();

  std::string hash() const { return sha256_hex(config_text + args.dump()); }
};

Context load(const std::string& path) {
  Context c;
  if (!path.empty()) {
    std::string text;
    try {
      text = read_file(path);
    } catch (const IoError& e) {
      throw ConfigError(std::string("--config: ") + e.what());
    }
    c.cfg = parse_config(text);
  }
  c.config_text = emit_config(c.cfg);
  return c;
}

// Output file name and directory from an --out path, defaulting into output.dir.
std::pair<fs::path, std::string> split_out(const std::string& out, const RunConfig& cfg, const std::string& fallback) {
  const fs::path p = out.empty() ? fs::path(cfg.output.dir) / fallback : fs::path(out);
  fs::path dir = p.parent_path();
  if (dir.empty()) dir = ".";
  return {dir, p.filename().string()};
}

struct ScanOptions {
  std::string config;
  std::vector<double> eps{1.0, 0.1, 0.01};
  double xi_min = 1e-3;
  double xi_max = 1e3;
  std::size_t xi_count = 61;
  std::uint64_t seed = 1;
  std::string out;
};

int symbol_scan(const ScanOptions& o, std::ostream& log) {
  check_epsilons(o.eps);
  if (!(o.xi_min > 0.0 && o.xi_max >= o.xi_min) || o.xi_count < 1) {
    throw ConfigError("--xi-min/--xi-max/--xi-count: need 0 < min <= max and count >= 1");
  }
  Context ctx = load(o.config);
  ctx.args = {{"epsilon", o.eps}, {"xi_min", o.xi_min}, {"xi_max", o.xi_max}, {"xi_count", o.xi_count},
              {"seed", o.seed}};
  // Default directions plus two seeded random ones.
  std::vector<Vec3> dirs = default_directions();
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 2; ++i) {
    Vec3 d{gauss(rng), gauss(rng), gauss(rng)};
    const double n = norm2(d);
    dirs.push_back({d[0] / n, d[1] / n, d[2] / n});
  }
  const std::vector<double> norms = log_space(o.xi_min, o.xi_max, o.xi_count);
  std::vector<std::vector<RegimeRow>> rows;
  double c0 = std::numeric_limits<double>::infinity();
  for (double e : o.eps) {
    rows.push_back(regime_rates(model_params(ctx.cfg, e), norms, dirs));
    for (const RegimeRow& r : rows.back()) c0 = std::min(c0, r.rate / decay_weight(e, r.xi_norm));
  }
  CsvWriter csv({"epsilon", "xi_norm", "abscissa", "lambda_envelope", "ratio"});
  for (std::size_t i = 0; i < o.eps.size(); ++i) {
    for (const RegimeRow& r : rows[i]) {
      const double env = -c0 * decay_weight(o.eps[i], r.xi_norm);
      csv.row(std::vector<double>{o.eps[i], r.xi_norm, -r.rate, env, -r.rate / env});
    }
  }
  const auto [dir, name] = split_out(o.out, ctx.cfg, "symbol_scan.csv");
  Manifest m(dir, "symbol-scan", ctx.hash(), o.seed);
  m.write("resolved_config.json", ctx.config_text);
  m.write(name, csv.str());
  m.finish(kExitOk);
  log << "symbol-scan: envelope constant c0 = " << c0 << ", wrote " << (dir / name).string() << "\n";
  return kExitOk;
}

struct LyapOptions {
  std::string config;
  std::vector<double> eps{1.0};
  std::string xi = "1e-2:1e3:60";
  double tol = 1e-10;
  double cond_max = 1e3;
  std::string out;
};

int lyapunov_search(const LyapOptions& o, std::ostream& log) {
  check_epsilons(o.eps);
  if (!(o.tol > 0.0)) throw ConfigError("--tol: must be positive");
  Context ctx = load(o.config);
  ctx.args = {{"epsilon", o.eps}, {"xi_grid", o.xi}, {"tol", o.tol}, {"cond_max", o.cond_max}};
  const std::vector<Vec3> grid = xi_grid(parse_xi_grid(o.xi), default_directions());
  std::vector<ModelParams> plist;
  for (double e : o.eps) plist.push_back(model_params(ctx.cfg, e));
  SearchOptions so;
  so.tol = o.tol;
  const SearchResult r = search_eta_c0(plist, grid, so);
  json table = json::array();
  for (const CertificateRow& row : r.table) {
    table.push_back({{"epsilon", row.epsilon}, {"xi", vec_json(row.xi)}, {"gap", row.gap}, {"tol", row.tol},
                     {"c_low", row.c_low}, {"c_high", row.c_high}});
  }
  const bool pass = r.ok && r.cond_number <= o.cond_max;
  json j = {{"ok", r.ok},
            {"satisfied", pass},
            {"message", r.message},
            {"eta_max", r.eta_max},
            {"eta_star", r.eta_star},
            {"c0_star", r.c0_star},
            {"cond_number", r.cond_number},
            {"c_high_max", r.c_high_max},
            {"certified_rate", r.certified_rate()},
            {"worst_xi", {{"epsilon", r.worst.epsilon}, {"xi", vec_json(r.worst.xi)}, {"gap", r.worst.gap}}},
            {"gap_table", table}};
  const auto [dir, name] = split_out(o.out, ctx.cfg, "lyapunov.json");
  const int code = pass ? kExitOk : kExitThreshold;
  Manifest m(dir, "lyapunov-search", ctx.hash(), 0);
  m.write("resolved_config.json", ctx.config_text);
  m.write(name, dump(j));
  m.finish(code);
  log << "lyapunov-search: eta* = " << r.eta_star << ", c0* = " << r.c0_star << ", cond = " << r.cond_number
      << (pass ? "" : " (threshold violated)") << "\n";
  return code;
}

struct PointwiseCli {
  std::string config;
  std::vector<double> eps{1.0, 0.1, 0.01};
  std::string xi = "1e-2:1e3:60";
  std::vector<double> times{0.1, 1.0, 10.0};
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  double c_cap = 100.0;
  std::string out;
};

int pointwise_verify(const PointwiseCli& o, std::ostream& log) {
  check_epsilons(o.eps);
  for (double t : o.times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("--times: must be finite and nonnegative");
  }
  if (o.trials < 1) throw ConfigError("--trials: must be >= 1");
  if (!(o.c_cap > 0.0)) throw ConfigError("--c-cap: must be positive");
  Context ctx = load(o.config);
  ctx.args = {{"epsilon", o.eps}, {"xi_grid", o.xi},   {"times", o.times},
              {"trials", o.trials}, {"seed", o.seed}, {"c_cap", o.c_cap}};
  const std::vector<Vec3> grid = xi_grid(parse_xi_grid(o.xi), default_directions());
  std::vector<ModelParams> plist;
  for (double e : o.eps) plist.push_back(model_params(ctx.cfg, e));
  PointwiseOptions po;
  po.trials = o.trials;
  po.seed = o.seed;
  po.c_cap = o.c_cap;
  const PointwiseReport r = verify_pointwise(plist, grid, o.times, po);
  CsvWriter csv({"epsilon", "xi1", "xi2", "xi3", "t", "ratio", "weight"});
  for (const PointwiseSample& s : r.samples) csv.row(std::vector<double>{s.epsilon, s.xi[0], s.xi[1], s.xi[2], s.t, s.ratio, s.weight});
  json j = {{"satisfied", r.satisfied},
            {"c0_fit", r.c0_fit},
            {"c_fit", r.c_fit},
            {"c_cap", r.c_cap},
            {"samples", r.samples.size()},
            {"worst",
             {{"epsilon", r.worst.epsilon}, {"xi", vec_json(r.worst.xi)}, {"t", r.worst.t}, {"ratio", r.worst.ratio}}}};
  const auto [dir, name] = split_out(o.out, ctx.cfg, "pointwise.json");
  const int code = r.satisfied ? kExitOk : kExitThreshold;
  Manifest m(dir, "pointwise-verify", ctx.hash(), o.seed);
  m.write("resolved_config.json", ctx.config_text);
  m.write(name, dump(j));
  m.write(fs::path(name).stem().string() + "_samples.csv", csv.str());
  m.finish(code);
  log << "pointwise-verify: c0 = " << r.c0_fit << ", C = " << r.c_fit << (r.satisfied ? "" : " (bound violated)")
      << "\n";
  return code;
}

std::string snapshot_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snap_%06zu.bin", step);
  return buf;
}

int simulate(const std::string& config, const std::string& out_dir, std::ostream& log) {
  Context ctx = load(config);
  if (!out_dir.empty()) ctx.cfg.output.dir = out_dir;
  ctx.args = json::object();
  const RunConfig& c = ctx.cfg;
  const ModelParams p = model_params(c, c.model.epsilon);
  const GridPtr grid = make_grid(c.grid.dim, c.grid.n, c.grid.length);
  const StepperConfig sc{c.stepper.dt, c.stepper.t_end, true};
  const std::size_t steps = step_count(sc);

  Manifest m(c.output.dir, "simulate", ctx.hash(), c.initial.seed);
  m.write("resolved_config.json", ctx.config_text);
  json summary = {{"epsilon", p.epsilon()}, {"dt", sc.dt}, {"t_end", sc.t_end}};

  InitialData init;
  try {
    init = make_initial(grid, p, initial_spec(c));
  } catch (const DomainError& e) {
    summary["status"] = "aborted";
    summary["abort"] = {{"kind", "vacuum"}, {"message", e.what()}, {"t", 0.0}};
    m.write("summary.json", dump(summary));
    m.finish(kExitNumerical);
    log << "simulate: initial data rejected: " << e.what() << "\n";
    return kExitNumerical;
  }
  SimState& s = init.em;
  const BandPartition part(grid, p.epsilon());
  CsvWriter csv({"step", "t", "energy", "dissipated", "energy_defect", "gauss", "div_b", "min_rho", "rho_b12",
                 "u_b12", "e_b12", "b_b12"});
  double energy0 = 0.0;
  bool first = true;
  auto observe = [&](const SimState& x, const EnergySample& e) {
    const std::size_t step = static_cast<std::size_t>(std::llround(x.time / sc.dt));
    if (first) energy0 = e.energy;
    first = false;
    SpectralField drho = x.rho;
    drho.data[0] -= p.rho_bar();
    SpectralField db = x.b;
    for (int a = 0; a < 3; ++a) db.comp(a)[0] -= p.b_bar()[a];
    const double defect = energy0 > 0.0 ? std::abs(e.energy + e.dissipated - energy0) / energy0 : 0.0;
    csv.row(std::vector<std::string>{
        std::to_string(step), format_double(e.t), format_double(e.energy), format_double(e.dissipated),
        format_double(defect), format_double(e.gauss), format_double(e.div_b), format_double(e.min_rho),
        format_double(besov_norm(band_norms(drho, part), 0.5)), format_double(besov_norm(band_norms(x.u, part), 0.5)),
        format_double(besov_norm(band_norms(x.e, part), 0.5)), format_double(besov_norm(band_norms(db, part), 0.5))});
    const bool snap = step == 0 || step == steps || (c.diagnostics.snapshot_every && step % c.diagnostics.snapshot_every == 0);
    if (c.output.snapshots && snap) m.write(snapshot_name(step), encode_snapshot(snapshot_of(x)));
  };
  int code = kExitOk;
  try {
    const RunRecord rec = run(s, sc, RunSchedule{c.diagnostics.every}, observe);
    summary["status"] = "ok";
    summary["steps"] = rec.steps;
    summary["energy0"] = rec.energy0;
    summary["energy_defect"] = rec.energy_defect;
    summary["max_gauss"] = rec.max_gauss;
    summary["max_div_b"] = rec.max_div_b;
    log << "simulate: " << rec.steps << " steps, energy defect " << rec.energy_defect << "\n";
  } catch (const NumericalAbort& e) {
    code = kExitNumerical;
    summary["status"] = "aborted";
    summary["abort"] = {{"kind", e.kind()}, {"message", e.what()}, {"t", s.time}};
    m.write("abort_snapshot.bin", encode_snapshot(snapshot_of(s)));
    log << "simulate: numerical abort (" << e.kind() << "): " << e.what() << "\n";
  }
  m.write("diagnostics.csv", csv.str());
  m.write("summary.json", dump(summary));
  m.finish(code);
  return code;
}

json norms_json(const ErrorNorms& n) {
  json j = json::object();
  const auto v = n.values();
  for (std::size_t i = 0; i < v.size(); ++i) j[ErrorNorms::names()[i]] = v[i];
  j["horizon"] = n.horizon;
  return j;
}

json slopes_json(const std::vector<SlopeFit>& fits) {
  json j = json::object();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    j[ErrorNorms::names()[i]] = {{"slope", fits[i].slope},
                                 {"stderr", fits[i].stderr_slope},
                                 {"intercept", fits[i].intercept},
                                 {"residual", fits[i].residual},
                                 {"points", fits[i].points}};
  }
  return j;
}

int relax_study(const std::string& config, const std::vector<double>& eps, const std::string& out, std::ostream& log) {
  Context ctx = load(config);
  if (!eps.empty()) {
    check_epsilons(eps);
    ctx.cfg.study.epsilons = eps;
    validate_config(ctx.cfg);
    ctx.config_text = emit_config(ctx.cfg);
  }
  const RunConfig& c = ctx.cfg;
  const RelaxReport rep = convergence_study(c.study.epsilons, study_config(c));

  json rows = json::array();
  CsvWriter csv({"epsilon", "t", "rho", "u", "e", "b", "bmod", "z"});
  bool failed = false;
  for (const RelaxRow& r : rep.rows) {
    json row = {{"epsilon", r.epsilon}, {"ok", r.ok}, {"dt", r.dt}, {"steps", r.steps}};
    if (!r.ok) {
      failed = true;
      row["failure"] = r.failure;
    } else {
      row["norms_T"] = norms_json(r.at_t);
      row["norms_2T"] = norms_json(r.at_2t);
    }
    rows.push_back(row);
    for (const ErrorSample& s : r.series) csv.row(std::vector<double>{r.epsilon, s.t, s.rho, s.u, s.e, s.b, s.bmod, s.z});
  }
  json j = {{"epsilons", c.study.epsilons},
            {"horizon", c.study.horizon},
            {"rows", rows},
            {"slopes", slopes_json(rep.slopes)},
            {"slopes_2T", slopes_json(rep.slopes_2t)}};
  const std::string stem = out.empty() ? (fs::path(c.output.dir) / "relax_study").string() : out;
  const auto [dir, name] = split_out(stem, c, "relax_study");
  const int code = failed ? kExitNumerical : kExitOk;
  Manifest m(dir, "relax-study", ctx.hash(), c.initial.seed);
  m.write("resolved_config.json", ctx.config_text);
  m.write(name + ".json", dump(j));
  m.write(name + ".csv", csv.str());
  m.finish(code);
  for (std::size_t i = 0; i < rep.slopes.size(); ++i) {
    log << "relax-study: slope " << ErrorNorms::names()[i] << " = " << rep.slopes[i].slope << "\n";
  }
  if (failed) log << "relax-study: at least one run aborted\n";
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Euler-Maxwell relaxation toolkit", "emrelax"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  ScanOptions scan;
  auto* scan_cmd = app.add_subcommand("symbol-scan", "Slowest constrained decay rate against the envelope");
  scan_cmd->add_option("--config", scan.config, "Run configuration (model section is used)");
  scan_cmd->add_option("--epsilon", scan.eps, "Relaxation parameter (repeatable)")->take_all();
  scan_cmd->add_option("--xi-min", scan.xi_min, "Smallest |xi|");
  scan_cmd->add_option("--xi-max", scan.xi_max, "Largest |xi|");
  scan_cmd->add_option("--xi-count", scan.xi_count, "Number of log-spaced |xi|");
  scan_cmd->add_option("--seed", scan.seed, "Seed for the extra random directions");
  scan_cmd->add_option("--out", scan.out, "Output CSV");

  LyapOptions lyap;
  auto* lyap_cmd = app.add_subcommand("lyapunov-search", "Certify the hypocoercive Lyapunov form");
  lyap_cmd->add_option("--config", lyap.config, "Run configuration (model section is used)");
  lyap_cmd->add_option("--epsilon", lyap.eps, "Relaxation parameter (repeatable)")->take_all();
  lyap_cmd->add_option("--xi-grid", lyap.xi, "lo:hi:count log-spaced |xi| times the five fixed directions");
  lyap_cmd->add_option("--tol", lyap.tol, "Relative gap tolerance");
  lyap_cmd->add_option("--cond-max", lyap.cond_max, "Largest accepted equivalence condition number");
  lyap_cmd->add_option("--out", lyap.out, "Output JSON");

  PointwiseCli pw;
  auto* pw_cmd = app.add_subcommand("pointwise-verify", "Check the uniform pointwise decay bound");
  pw_cmd->add_option("--config", pw.config, "Run configuration (model section is used)");
  pw_cmd->add_option("--epsilon", pw.eps, "Relaxation parameter (repeatable)")->take_all();
  pw_cmd->add_option("--xi-grid", pw.xi, "lo:hi:count log-spaced |xi| times the five fixed directions");
  pw_cmd->add_option("--times", pw.times, "Sample times (repeatable)")->take_all();
  pw_cmd->add_option("--trials", pw.trials, "Random compatible states per wavevector");
  pw_cmd->add_option("--seed", pw.seed, "Seed for the random states");
  pw_cmd->add_option("--c-cap", pw.c_cap, "Bound on the constant C");
  pw_cmd->add_option("--out", pw.out, "Output JSON");

  std::string sim_config, sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the nonlinear Euler-Maxwell solver");
  sim_cmd->add_option("--config", sim_config, "Run configuration");
  sim_cmd->add_option("--out-dir", sim_out, "Output directory (overrides output.dir)");

  std::string rs_config, rs_out;
  std::vector<double> rs_eps;
  auto* rs_cmd = app.add_subcommand("relax-study", "Relaxation error norms and their rates in epsilon");
  rs_cmd->add_option("--config", rs_config, "Run configuration");
  rs_cmd->add_option("--eps", rs_eps, "Relaxation parameter (repeatable, overrides study.epsilons)")->take_all();
  rs_cmd->add_option("--out", rs_out, "Output path stem; writes <stem>.json and <stem>.csv");

  std::vector<const char*> argv{"emrelax"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*scan_cmd) return symbol_scan(scan, out);
    if (*lyap_cmd) return lyapunov_search(lyap, out);
    if (*pw_cmd) return pointwise_verify(pw, out);
    if (*sim_cmd) return simulate(sim_config, sim_out, out);
    if (*rs_cmd) return relax_study(rs_config, rs_eps, rs_out, out);
  } catch (const NumericalAbort& e) {
    err << "numerical abort (" << e.kind() << "): " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace emrelax
