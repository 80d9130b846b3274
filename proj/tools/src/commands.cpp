#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>

#include <json.hpp>

#include "manifest.hpp"
#include "vibgate/errors.hpp"
#include "vibgate/field.hpp"
#include "vibgate/gates.hpp"
#include "vibgate/hashing.hpp"
#include "vibgate/oct.hpp"
#include "vibgate/propagate.hpp"
#include "vibgate/pulsetools.hpp"

namespace vibgate::cli {
namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& dir, const std::string& name, RunManifest& manifest,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream out(dir / name);
  body(out);
  out.close();
  if (!out) throw Error("cannot write " + (dir / name).string());
  manifest.add_file(dir, name);
}

std::string cache_hash(const StateSet& set) {
  if (!set.cache_dir.empty() && fs::exists(set.cache_dir / "manifest.json"))
    return sha256_file(set.cache_dir / "manifest.json");
  Sha256 h;
  for (const auto& s : set.states) h.update_values(std::span<const double>(&s.energy_hartree, 1));
  return h.hex_digest();
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

void print_table(std::ostream& out, const std::vector<EigenState>& states) {
  char buf[128];
  out << "index,energy_cm,n_r,n_d,confidence\n";
  for (const auto& s : states) {
    std::snprintf(buf, sizeof buf, "%zu,%.10f,%d,%d,%.6f\n", s.index, s.energy, s.quanta.n_r,
                  s.quanta.n_d, s.confidence);
    out << buf;
  }
}

struct Prepared {
  MolecularSystem system;
  StateSet set;
};

Prepared prepare(const RunConfig& cfg, std::ostream& log) {
  MolecularSystem system = build_model(cfg.system, cfg.grid.build());
  StateSet set = obtain_states(cfg, system, log);
  return {std::move(system), std::move(set)};
}

GateSpec gate_spec_for(const RunConfig& cfg, const std::vector<EigenState>& states,
                       const MolecularSystem& system) {
  const QubitEncoding enc = QubitEncoding::from_states(states);
  enc.validate(states, system);
  if (cfg.transitions.empty()) return make_gate_spec(cfg.gate, enc);
  GateSpec spec{"custom", enc, parse_transitions(cfg.transitions, enc), {}};
  return spec;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const SpecError*>(&e) || dynamic_cast<const ParameterError*>(&e))
    return kConfigError;
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const SpectrumExhaustedError*>(&e) ||
      dynamic_cast<const ConfinementError*>(&e) || dynamic_cast<const AmbiguousAssignmentError*>(&e))
    return kEigensolveError;
  if (dynamic_cast<const CoverageError*>(&e)) return kCoverageError;
  return kFailure;
}

fs::path cache_root(const RunConfig& cfg) {
  if (const char* env = std::getenv(kCacheEnv); env && *env) return env;
  return cfg.cache_dir;
}

StateSet obtain_states(const RunConfig& cfg, const MolecularSystem& system, std::ostream& log) {
  StateSet set;
  const std::string hash = system.hash();
  if (cfg.cache != CachePolicy::off) set.cache_dir = cache_root(cfg) / hash.substr(0, 16);
  if (cfg.cache == CachePolicy::use) {
    if (auto cached = load_eigenstate_cache(set.cache_dir, hash, cfg.n_states)) {
      set.states = std::move(*cached);
      set.from_cache = true;
      log << "eigenstates: loaded " << set.states.size() << " from " << set.cache_dir.string()
          << '\n';
      return set;
    }
  }
  log << "eigenstates: relaxing " << cfg.n_states << " states\n";
  set.states = relax(system, cfg.n_states, cfg.relax);
  if (cfg.cache != CachePolicy::off) save_eigenstate_cache(set.cache_dir, set.states, hash);
  return set;
}

int cmd_eigensolve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    OutputLock lock(cfg.output_dir);
    RunManifest manifest("eigensolve");
    manifest.set_config_hash(sha256_hex(canonical_config(cfg)));
    Prepared p = prepare(cfg, err);
    manifest.set_system_hash(p.system.hash());
    manifest.set_cache_hash(cache_hash(p.set));
    print_table(out, p.set.states);
    write_file(cfg.output_dir, "energies.csv", manifest,
               [&](std::ostream& o) { print_table(o, p.set.states); });
    manifest.write(cfg.output_dir);
    return int{kSuccess};
  });
}

int cmd_optimize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    OutputLock lock(cfg.output_dir);
    RunManifest manifest("optimize");
    manifest.set_config_hash(sha256_hex(canonical_config(cfg)));
    Prepared p = prepare(cfg, err);
    manifest.set_system_hash(p.system.hash());
    manifest.set_cache_hash(cache_hash(p.set));

    const GateSpec spec = gate_spec_for(cfg, p.set.states, p.system);
    const ControlProblem problem = make_problem(spec, cfg.problem_settings());
    const OptimizationResult res = optimize(problem, p.system, p.set.states);
    const FidelityReport report =
        gate_fidelity(res.field, spec, p.system, p.set.states, res.final_states);
    const LeakageReport leak = leakage_report(report, p.set.states);
    const PhaseReport phases = phase_report(report);

    write_file(cfg.output_dir, "pulse.csv", manifest,
               [&](std::ostream& o) { write_pulse_csv(o, res.field); });
    write_file(cfg.output_dir, "trace.csv", manifest,
               [&](std::ostream& o) { write_trace_csv(o, res.trace); });
    write_file(cfg.output_dir, "report.json", manifest,
               [&](std::ostream& o) { write_report_json(o, report, leak, phases); });
    write_file(cfg.output_dir, "leakage.csv", manifest,
               [&](std::ostream& o) { write_leakage_csv(o, leak); });
    manifest.set_status(res.trace.converged ? "converged" : "unconverged: " + res.trace.stop_reason);
    manifest.write(cfg.output_dir);

    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: mean fidelity %.6f after %zu iterations (%s)\n",
                  spec.name.c_str(), report.mean, res.trace.records.size() - 1,
                  res.trace.stop_reason.c_str());
    out << buf;
    for (const auto& w : res.field.warnings()) err << "warning: " << w << '\n';
    return res.trace.converged ? int{kSuccess} : int{kUnconverged};
  });
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LaserField field = read_pulse_csv(opt.pulse);
    field.validate(1e9);
    OutputLock lock(opt.output_dir);
    RunManifest manifest("analyze");
    manifest.set_config_hash(sha256_file(opt.pulse));

    const Spectrum spec = spectrum(field);
    const Spectrogram map = spectrogram(field, opt.window_fwhm_fs, opt.n_times, opt.max_wavenumber);
    write_file(opt.output_dir, "spectrum.csv", manifest,
               [&](std::ostream& o) { write_spectrum_csv(o, spec); });
    write_file(opt.output_dir, "spectrogram.csv", manifest,
               [&](std::ostream& o) { write_spectrogram_csv(o, map); });

    nlohmann::json s;
    s["duration_fs"] = field.duration_fs();
    s["temporal_fwhm_fs"] = temporal_fwhm(field);
    s["peak_au"] = field.peak();
    s["peak_w_cm2"] = intensity(field.peak());
    s["fluence_au"] = field.fluence();
    s["peak_wavenumber_cm"] = spec.wavenumber[spec.peak_bin()];
    s["spectral_fwhm_cm"] = spec.fwhm();
    s["spectral_intensity_fwhm_cm"] = spec.intensity_fwhm();
    write_file(opt.output_dir, "summary.json", manifest,
               [&](std::ostream& o) { o << s.dump(2) << '\n'; });
    manifest.write(opt.output_dir);
    out << s.dump(2) << '\n';
    return int{kSuccess};
  });
}

int cmd_mask(const MaskOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LaserField pulse = read_pulse_csv(opt.pulse);
    OutputLock lock(opt.output_dir);
    RunManifest manifest("mask");
    manifest.set_config_hash(sha256_file(opt.pulse));
    const LaserField reference = fourier_limited_pulse(
        opt.center_cm, opt.spectral_fwhm_cm, opt.peak_au, pulse.dt_fs, pulse.duration_fs());

    const MaskFunction mask = compute_mask(pulse, reference, opt.pixels);
    LaserField shaped = apply_mask(reference, mask);
    write_file(opt.output_dir, "mask.csv", manifest,
               [&](std::ostream& o) { write_mask_csv(o, mask); });
    write_file(opt.output_dir, "reference_pulse.csv", manifest,
               [&](std::ostream& o) { write_pulse_csv(o, reference); });
    write_file(opt.output_dir, "shaped_pulse.csv", manifest,
               [&](std::ostream& o) { write_pulse_csv(o, shaped); });

    nlohmann::json s;
    s["pixels"] = opt.pixels;
    s["scale"] = mask.scale;
    s["window_cm"] = {mask.window_lo, mask.window_lo + mask.pixel_width * mask.n_pixels};
    s["reference_duration_fs"] = fourier_limited_duration(opt.spectral_fwhm_cm);

    if (opt.config) {
      const RunConfig& cfg = *opt.config;
      manifest.set_config_hash(sha256_hex(canonical_config(cfg)));
      Prepared p = prepare(cfg, err);
      manifest.set_system_hash(p.system.hash());
      manifest.set_cache_hash(cache_hash(p.set));
      const GateSpec spec = gate_spec_for(cfg, p.set.states, p.system);
      const double base = gate_fidelity(pulse, spec, p.system, p.set.states).mean;

      std::vector<std::size_t> counts = opt.sweep;
      if (std::find(counts.begin(), counts.end(), opt.pixels) == counts.end())
        counts.push_back(opt.pixels);
      std::sort(counts.begin(), counts.end());
      nlohmann::json rows = nlohmann::json::array();
      std::string csv = "pixels,fidelity,retention\n";
      for (std::size_t n : counts) {
        const MaskFunction m = compute_mask(pulse, reference, n);
        LaserField f = apply_mask(reference, m);
        for (double& x : f.samples) x /= m.scale;
        const double fid = gate_fidelity(f, spec, p.system, p.set.states).mean;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", n, fid, fid / base);
        csv += buf;
        rows.push_back({{"pixels", n}, {"fidelity", fid}, {"retention", fid / base}});
      }
      write_file(opt.output_dir, "retention.csv", manifest, [&](std::ostream& o) { o << csv; });
      s["unpixelated_fidelity"] = base;
      s["retention"] = rows;
    }
    write_file(opt.output_dir, "summary.json", manifest,
               [&](std::ostream& o) { o << s.dump(2) << '\n'; });
    manifest.write(opt.output_dir);
    out << s.dump(2) << '\n';
    return int{kSuccess};
  });
}

int cmd_evolve(const RunConfig& cfg, const EvolveOptions& opt, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    if (!(opt.dt_fs > 0.0) || !(opt.t_max_fs > opt.dt_fs))
      throw ParameterError("evolve needs 0 < dt < t_max");
    OutputLock lock(cfg.output_dir);
    RunManifest manifest("evolve");
    manifest.set_config_hash(sha256_hex(canonical_config(cfg)));
    Prepared p = prepare(cfg, err);
    manifest.set_system_hash(p.system.hash());
    manifest.set_cache_hash(cache_hash(p.set));

    const QubitEncoding enc = QubitEncoding::from_states(p.set.states);
    const Superposition sup = parse_state(opt.state, enc);
    std::vector<cplx> coeffs(p.set.states.size(), 0.0);
    for (const auto& t : sup.terms) coeffs[t.index] += t.weight;
    const auto energies = energies_hartree(p.set.states);

    const auto samples = autocorrelation(coeffs, energies, opt.t_max_fs, opt.dt_fs);
    const auto predicted = predicted_revivals(coeffs, energies);
    const auto observed = first_revival(samples, opt.dt_fs);

    write_file(cfg.output_dir, "autocorrelation.csv", manifest, [&](std::ostream& o) {
      char buf[64];
      o << "t_fs,autocorrelation\n";
      for (std::size_t i = 0; i < samples.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.17g\n", static_cast<double>(i) * opt.dt_fs,
                      samples[i]);
        o << buf;
      }
    });

    if (opt.snapshot_every_fs > 0.0) {
      const auto basis_states = wavefunctions(p.set.states);
      const SpectralBasis basis{basis_states, energies};
      std::size_t k = 0;
      for (double t = 0.0; t <= opt.t_max_fs + 1e-9; t += opt.snapshot_every_fs, ++k) {
        WaveFunction psi = free_evolve_spectral(coeffs, basis, t);
        for (cplx& a : psi.amp()) a = std::norm(a);
        char name[48];
        std::snprintf(name, sizeof name, "density_%04zu.vgwf", k);
        write_snapshot(cfg.output_dir / name, psi);
        manifest.add_file(cfg.output_dir, name);
      }
    }

    nlohmann::json s;
    s["state"] = opt.state;
    s["dt_fs"] = opt.dt_fs;
    s["predicted_revivals_fs"] = predicted;
    s["first_revival_fs"] = observed ? nlohmann::json(*observed) : nlohmann::json(nullptr);
    write_file(cfg.output_dir, "summary.json", manifest,
               [&](std::ostream& o) { o << s.dump(2) << '\n'; });
    manifest.write(cfg.output_dir);
    out << s.dump(2) << '\n';
    return int{kSuccess};
  });
}

}  // namespace vibgate::cli
