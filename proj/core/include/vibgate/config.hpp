#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "vibgate/eigensolve.hpp"
#include "vibgate/molsys.hpp"
#include "vibgate/oct.hpp"

namespace vibgate {

enum class CachePolicy { use, refresh, off };

struct GridSpec {
  double r_min = -2.5, r_max = 2.5;
  double d_min = -1.8, d_max = 1.8;
  std::size_t n_r = 64, n_d = 64;

  Grid2D build() const { return Grid2D(r_min, r_max, n_r, d_min, d_max, n_d); }
};

/// Run configuration. INI sections: [system], [grid], [eigensolve],
/// [problem], [output]. Unknown keys are rejected.
struct RunConfig {
  ModelParams system;
  GridSpec grid;
  std::size_t n_states = 26;
  RelaxConfig relax;

  std::string gate = "identity";
  /// Explicit transitions, "initial>target" separated by ';'. States are
  /// qubit labels or signed pairs such as "00+01" or "10-11". Overrides gate.
  std::string transitions;
  double alpha = 0.01;
  double duration_fs = 700.0;
  double dt_fs = 0.25;
  std::size_t max_iter = 200;
  double target_fidelity = 0.99;
  double guess_peak = 5e-4;
  std::filesystem::path guess;
  Polarization polarization;
  std::uint64_t seed = 1;

  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir = "cache";
  CachePolicy cache = CachePolicy::use;

  /// Directory of the config file; a relative guess path resolves against
  /// it. Output and cache directories are relative to the working directory.
  std::filesystem::path base_dir;

  /// Throws ConfigError naming the offending section.key.
  void validate() const;

  /// Optimizer settings (without transitions).
  ControlProblem problem_settings() const;
};

/// Throws ConfigError on syntax errors, unknown keys or invalid values.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical key=value text of every setting, hashed into run manifests.
std::string canonical_config(const RunConfig& cfg);

}  // namespace vibgate
