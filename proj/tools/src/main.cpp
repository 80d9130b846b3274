#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "manifest.hpp"
#include "vibgate/errors.hpp"

using namespace vibgate;
using namespace vibgate::cli;

namespace {

std::optional<RunConfig> load(const std::string& path, const std::string& out_override) {
  if (path.empty()) return std::nullopt;
  RunConfig cfg = load_config(path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vibrational two-qubit gate synthesis by optimal control"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 invalid config or input, 3 eigensolver failure,\n"
             "4 optimization unconverged, 5 mask coverage error.\n"
             "Environment: " + std::string(kCacheEnv) + " overrides the eigenstate cache directory.");

  std::string config_path, out_dir;

  auto* eig = app.add_subcommand("eigensolve", "Compute or load eigenstates and print the energy table");
  eig->add_option("-c,--config", config_path, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
  eig->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");

  auto* opt = app.add_subcommand("optimize", "Optimize a gate pulse and write the result bundle");
  opt->add_option("-c,--config", config_path, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
  opt->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
  std::string gate_override;
  opt->add_option("-g,--gate", gate_override, "Gate name (overrides problem.gate)");

  AnalyzeOptions an;
  auto* ana = app.add_subcommand("analyze", "Spectrum, spectrogram and intensity summary of a pulse");
  ana->add_option("pulse", an.pulse, "Pulse CSV (t_fs,field_au)")->required();
  ana->add_option("-o,--out", an.output_dir, "Output directory")->capture_default_str();
  ana->add_option("-w,--window-fs", an.window_fwhm_fs, "Spectrogram window FWHM in fs")->capture_default_str();
  ana->add_option("--frames", an.n_times, "Spectrogram time slices")->capture_default_str();
  ana->add_option("--max-wavenumber", an.max_wavenumber, "Spectrogram upper wavenumber (cm^-1)")->capture_default_str();

  MaskOptions mk;
  std::string mask_config;
  auto* msk = app.add_subcommand("mask", "Shaper mask for a pulse and pixel-count retention sweep");
  msk->add_option("pulse", mk.pulse, "Target pulse CSV")->required();
  msk->add_option("-o,--out", mk.output_dir, "Output directory")->capture_default_str();
  msk->add_option("-c,--config", mask_config, "Run configuration; enables the fidelity retention sweep")
      ->check(CLI::ExistingFile);
  msk->add_option("--center", mk.center_cm, "Reference pulse center (cm^-1)")->capture_default_str();
  msk->add_option("--fwhm", mk.spectral_fwhm_cm, "Reference spectral intensity FWHM (cm^-1)")->capture_default_str();
  msk->add_option("--peak", mk.peak_au, "Reference peak field (a.u.)")->capture_default_str();
  msk->add_option("-p,--pixels", mk.pixels, "Shaper pixels")->capture_default_str();
  msk->add_option("--sweep", mk.sweep, "Pixel counts for the retention sweep")->capture_default_str();

  EvolveOptions ev;
  auto* evo = app.add_subcommand("evolve", "Field-free evolution of a qubit superposition");
  evo->add_option("-c,--config", config_path, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
  evo->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
  evo->add_option("-s,--state", ev.state, "Qubit label or signed pair, e.g. 00+10")->capture_default_str();
  evo->add_option("-t,--t-max", ev.t_max_fs, "Duration in fs")->capture_default_str();
  evo->add_option("--dt", ev.dt_fs, "Sampling interval in fs")->capture_default_str();
  evo->add_option("--snapshot-every", ev.snapshot_every_fs, "Density snapshot interval in fs (0: none)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*eig) return cmd_eigensolve(*load(config_path, out_dir), std::cout, std::cerr);
    if (*opt) {
      RunConfig cfg = *load(config_path, out_dir);
      if (!gate_override.empty()) {
        cfg.gate = gate_override;
        cfg.transitions.clear();
        cfg.validate();
      }
      return cmd_optimize(cfg, std::cout, std::cerr);
    }
    if (*ana) return cmd_analyze(an, std::cout, std::cerr);
    if (*msk) {
      mk.config = load(mask_config, "");
      return cmd_mask(mk, std::cout, std::cerr);
    }
    if (*evo) return cmd_evolve(*load(config_path, out_dir), ev, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kFailure;
}
