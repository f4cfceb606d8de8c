#pragma once

// Run configuration: JSON text with sections model, grid, stepper, initial,
// diagnostics, study and output. Every key is optional; unknown keys and
// out-of-range values are rejected with the key path in the message.

#include <string>
#include <vector>

#include "emrelax/relax.hpp"

namespace emrelax {

class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

struct ModelSection {
  double rho_bar = 1.0;
  Vec3 b_bar{0.0, 0.0, 1.0};
  double pressure_amplitude = 0.5;
  double gamma = 2.0;
  /// Used by simulate; relax-study takes its epsilons from the study section.
  double epsilon = 0.2;

  bool operator==(const ModelSection&) const = default;
};

struct GridSection {
  int dim = 1;
  int n = 256;
  double length = 4.0;

  bool operator==(const GridSection&) const = default;
};

struct StepperSection {
  double dt = 1e-3;
  double t_end = 1.0;

  bool operator==(const StepperSection&) const = default;
};

struct InitialSection {
  int band_lo = -1;
  int band_hi = 2;
  double amplitude = 1e-2;
  std::uint64_t seed = 1;
  Prepared prepared = Prepared::ill;
  double transverse = 1.0;
  double density_mismatch = 0.0;
  double velocity = 1.0;

  bool operator==(const InitialSection&) const = default;
};

struct DiagnosticsSection {
  /// Diagnostics row every this many steps.
  std::size_t every = 10;
  /// Field snapshot every this many steps; 0 writes only the first and last.
  std::size_t snapshot_every = 0;

  bool operator==(const DiagnosticsSection&) const = default;
};

struct StudySection {
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};
  double horizon = 2.0;
  bool double_horizon = true;
  double dt = 1e-3;
  double layer_steps = 10.0;
  std::size_t sample_every = 1;

  bool operator==(const StudySection&) const = default;
};

struct OutputSection {
  std::string dir = "out";
  bool snapshots = true;

  bool operator==(const OutputSection&) const = default;
};

struct RunConfig {
  ModelSection model;
  GridSection grid;
  StepperSection stepper;
  InitialSection initial;
  DiagnosticsSection diagnostics;
  StudySection study;
  OutputSection output;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError (key path in the message) on malformed text, unknown
/// keys, type mismatches and constraint violations.
RunConfig parse_config(const std::string& text);
/// Canonical JSON with every field explicit; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& cfg);
/// Re-runs the constraint checks on an assembled config.
void validate_config(const RunConfig& cfg);

ModelParams model_params(const RunConfig& cfg, double epsilon);
InitialSpec initial_spec(const RunConfig& cfg);
StudyConfig study_config(const RunConfig& cfg);

const char* prepared_name(Prepared p);

}  // namespace emrelax
