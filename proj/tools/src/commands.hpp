#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vibgate/config.hpp"
#include "vibgate/eigensolve.hpp"

namespace vibgate::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kConfigError = 2,
  kEigensolveError = 3,
  kUnconverged = 4,
  kCoverageError = 5,
};

inline constexpr const char* kCacheEnv = "VIBGATE_CACHE_DIR";

/// Cache directory after the environment override.
std::filesystem::path cache_root(const RunConfig& cfg);

struct StateSet {
  std::vector<EigenState> states;
  bool from_cache = false;
  std::filesystem::path cache_dir;  ///< empty when caching is off
};

/// Loads or computes eigenstates according to the cache policy.
StateSet obtain_states(const RunConfig& cfg, const MolecularSystem& system, std::ostream& log);

struct AnalyzeOptions {
  std::filesystem::path pulse;
  std::filesystem::path output_dir = "analysis";
  double window_fwhm_fs = 40.0;
  std::size_t n_times = 200;
  double max_wavenumber = 8000.0;
};

struct MaskOptions {
  std::filesystem::path pulse;
  std::filesystem::path output_dir = "mask";
  std::optional<RunConfig> config;  ///< needed for the fidelity retention sweep
  double center_cm = 674.0;
  double spectral_fwhm_cm = 590.0;
  double peak_au = 0.028;
  std::size_t pixels = 128;
  std::vector<std::size_t> sweep = {16, 32, 64, 128, 256};
};

struct EvolveOptions {
  std::string state = "00";
  double t_max_fs = 1000.0;
  double dt_fs = 0.1;
  double snapshot_every_fs = 0.0;  ///< 0 disables density snapshots
};

// Each command returns an exit code and never throws.
int cmd_eigensolve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err);
int cmd_mask(const MaskOptions& opt, std::ostream& out, std::ostream& err);
int cmd_evolve(const RunConfig& cfg, const EvolveOptions& opt, std::ostream& out,
               std::ostream& err);

/// Maps an exception thrown by the library to the exit-code contract.
int exit_code_for(const std::exception& e);

}  // namespace vibgate::cli
