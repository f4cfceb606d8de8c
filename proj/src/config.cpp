#include "emrelax/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace emrelax {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

// Walks one JSON object, handing out typed fields and rejecting leftovers.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) fail(join(path_, it.key()), "unknown key");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(path(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(path(key), "must be finite");
    }
  }

  void integer(const std::string& key, int& out) {
    std::int64_t v = out;
    integer64(key, v);
    if (v < INT32_MIN || v > INT32_MAX) fail(path(key), "out of range");
    out = static_cast<int>(v);
  }

  void integer64(const std::string& key, std::int64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(path(key), "expected an integer");
      out = v->get<std::int64_t>();
    }
  }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < 0) fail(path(key), "expected a nonnegative integer");
      out = v->get<std::size_t>();
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(path(key), "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(path(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& x = (*v)[i];
        const std::string p = path(key) + "[" + std::to_string(i) + "]";
        if (!x.is_number()) fail(p, "expected a number");
        out.push_back(x.get<double>());
        if (!std::isfinite(out.back())) fail(p, "must be finite");
      }
    }
  }

  void vec3(const std::string& key, Vec3& out) {
    std::vector<double> v(out.begin(), out.end());
    numbers(key, v);
    if (v.size() != 3) fail(path(key), "expected three numbers");
    out = {v[0], v[1], v[2]};
  }

  // Sub-object reader; a missing key behaves like an empty object.
  const json& section(const std::string& key) {
    static const json empty = json::object();
    const json* v = find(key);
    return v ? *v : empty;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

bool power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

void check(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) fail(path, msg);
}

}  // namespace

const char* prepared_name(Prepared p) { return p == Prepared::well ? "well" : "ill"; }

void validate_config(const RunConfig& c) {
  check(c.model.rho_bar > 0.0, "model.rho_bar", "must be positive");
  check(c.model.pressure_amplitude > 0.0, "model.pressure.amplitude", "must be positive");
  check(c.model.gamma >= 1.0, "model.pressure.gamma", "must be >= 1");
  check(c.model.epsilon > 0.0 && c.model.epsilon <= 1.0, "model.epsilon", "must lie in (0, 1]");
  check(c.grid.dim >= 1 && c.grid.dim <= 3, "grid.dim", "must be 1, 2 or 3");
  check(power_of_two(c.grid.n), "grid.n", "must be a power of two >= 2");
  check(c.grid.length > 0.0, "grid.length", "must be positive");
  check(c.stepper.dt > 0.0, "stepper.dt", "must be positive");
  check(c.stepper.t_end >= 0.0, "stepper.t_end", "must be nonnegative");
  check(c.initial.band_lo <= c.initial.band_hi, "initial.band_hi", "must be >= initial.band_lo");
  check(c.initial.amplitude >= 0.0, "initial.amplitude", "must be nonnegative");
  check(c.initial.transverse >= 0.0, "initial.transverse", "must be nonnegative");
  check(c.initial.density_mismatch >= 0.0, "initial.density_mismatch", "must be nonnegative");
  check(c.initial.velocity >= 0.0, "initial.velocity", "must be nonnegative");
  check(c.diagnostics.every >= 1, "diagnostics.every", "must be >= 1");
  check(c.diagnostics.every == 0 || c.diagnostics.snapshot_every % c.diagnostics.every == 0,
        "diagnostics.snapshot_every", "must be a multiple of diagnostics.every");
  check(c.study.epsilons.size() >= 3, "study.epsilons", "needs at least three values");
  for (std::size_t i = 0; i < c.study.epsilons.size(); ++i) {
    const std::string p = "study.epsilons[" + std::to_string(i) + "]";
    check(c.study.epsilons[i] > 0.0 && c.study.epsilons[i] <= 1.0, p, "must lie in (0, 1]");
    if (i > 0) check(c.study.epsilons[i] < c.study.epsilons[i - 1], p, "epsilons must be strictly descending");
  }
  check(c.study.horizon > 0.0, "study.horizon", "must be positive");
  check(c.study.dt > 0.0, "study.dt", "must be positive");
  check(c.study.layer_steps > 0.0, "study.layer_steps", "must be positive");
  check(c.study.sample_every >= 1, "study.sample_every", "must be >= 1");
  check(!c.output.dir.empty(), "output.dir", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text.empty() ? std::string("{}") : text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: malformed JSON: ") + e.what());
  }
  RunConfig c;
  {
    Reader r(root, "");
    {
      Reader m(r.section("model"), "model");
      m.number("rho_bar", c.model.rho_bar);
      m.vec3("b_bar", c.model.b_bar);
      m.number("epsilon", c.model.epsilon);
      Reader p(m.section("pressure"), "model.pressure");
      p.number("amplitude", c.model.pressure_amplitude);
      p.number("gamma", c.model.gamma);
    }
    {
      Reader g(r.section("grid"), "grid");
      g.integer("dim", c.grid.dim);
      g.integer("n", c.grid.n);
      g.number("length", c.grid.length);
    }
    {
      Reader s(r.section("stepper"), "stepper");
      s.number("dt", c.stepper.dt);
      s.number("t_end", c.stepper.t_end);
    }
    {
      Reader i(r.section("initial"), "initial");
      i.integer("band_lo", c.initial.band_lo);
      i.integer("band_hi", c.initial.band_hi);
      i.number("amplitude", c.initial.amplitude);
      i.seed("seed", c.initial.seed);
      std::string prep = prepared_name(c.initial.prepared);
      i.string("prepared", prep);
      if (prep == "well") {
        c.initial.prepared = Prepared::well;
      } else if (prep == "ill") {
        c.initial.prepared = Prepared::ill;
      } else {
        fail("initial.prepared", "expected \"well\" or \"ill\"");
      }
      i.number("transverse", c.initial.transverse);
      i.number("density_mismatch", c.initial.density_mismatch);
      i.number("velocity", c.initial.velocity);
    }
    {
      Reader d(r.section("diagnostics"), "diagnostics");
      d.count("every", c.diagnostics.every);
      d.count("snapshot_every", c.diagnostics.snapshot_every);
    }
    {
      Reader s(r.section("study"), "study");
      s.numbers("epsilons", c.study.epsilons);
      s.number("horizon", c.study.horizon);
      s.boolean("double_horizon", c.study.double_horizon);
      s.number("dt", c.study.dt);
      s.number("layer_steps", c.study.layer_steps);
      s.count("sample_every", c.study.sample_every);
    }
    {
      Reader o(r.section("output"), "output");
      o.string("dir", c.output.dir);
      o.boolean("snapshots", c.output.snapshots);
    }
  }
  validate_config(c);
  return c;
}

std::string emit_config(const RunConfig& c) {
  json j;
  j["model"] = {{"rho_bar", c.model.rho_bar},
                {"b_bar", {c.model.b_bar[0], c.model.b_bar[1], c.model.b_bar[2]}},
                {"epsilon", c.model.epsilon},
                {"pressure", {{"amplitude", c.model.pressure_amplitude}, {"gamma", c.model.gamma}}}};
  j["grid"] = {{"dim", c.grid.dim}, {"n", c.grid.n}, {"length", c.grid.length}};
  j["stepper"] = {{"dt", c.stepper.dt}, {"t_end", c.stepper.t_end}};
  j["initial"] = {{"band_lo", c.initial.band_lo},
                  {"band_hi", c.initial.band_hi},
                  {"amplitude", c.initial.amplitude},
                  {"seed", c.initial.seed},
                  {"prepared", prepared_name(c.initial.prepared)},
                  {"transverse", c.initial.transverse},
                  {"density_mismatch", c.initial.density_mismatch},
                  {"velocity", c.initial.velocity}};
  j["diagnostics"] = {{"every", c.diagnostics.every}, {"snapshot_every", c.diagnostics.snapshot_every}};
  j["study"] = {{"epsilons", c.study.epsilons},       {"horizon", c.study.horizon},
                {"double_horizon", c.study.double_horizon}, {"dt", c.study.dt},
                {"layer_steps", c.study.layer_steps}, {"sample_every", c.study.sample_every}};
  j["output"] = {{"dir", c.output.dir}, {"snapshots", c.output.snapshots}};
  return j.dump(2) + "\n";
}

ModelParams model_params(const RunConfig& c, double epsilon) {
  return ModelParams(c.model.rho_bar, c.model.b_bar, epsilon, PressureLaw{c.model.pressure_amplitude, c.model.gamma});
}

InitialSpec initial_spec(const RunConfig& c) {
  InitialSpec s;
  s.band_lo = c.initial.band_lo;
  s.band_hi = c.initial.band_hi;
  s.amplitude = c.initial.amplitude;
  s.seed = c.initial.seed;
  s.prepared = c.initial.prepared;
  s.transverse = c.initial.transverse;
  s.density_mismatch = c.initial.density_mismatch;
  s.velocity = c.initial.velocity;
  return s;
}

StudyConfig study_config(const RunConfig& c) {
  StudyConfig s;
  s.dim = c.grid.dim;
  s.n = c.grid.n;
  s.length = c.grid.length;
  s.base = model_params(c, c.model.epsilon);
  s.initial = initial_spec(c);
  s.dt = c.study.dt;
  s.layer_steps = c.study.layer_steps;
  s.horizon = c.study.horizon;
  s.double_horizon = c.study.double_horizon;
  s.sample_every = c.study.sample_every;
  return s;
}

}  // namespace emrelax
