// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "support.hpp"
#include "vibgate/config.hpp"
#include "vibgate/errors.hpp"
#include "vibgate/gates.hpp"
#include "vibgate/propagate.hpp"
#include "vibgate/pulsetools.hpp"

using namespace vibgate;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------- runs

struct GateRun {
  std::string config;
  std::string gate;
  int exit_code = -1;
  double seconds = 0.0;
  fs::path dir;
  std::vector<std::vector<double>> trace;
  nlohmann::json report;
  LaserField field;

  std::size_t iterations() const { return trace.empty() ? 0 : trace.size() - 1; }
  double worst_decrease() const {
    double w = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) w = std::max(w, trace[i - 1][1] - trace[i][1]);
    return w;
  }
};

class Workspace {
 public:
  Workspace() : root_(fs::path(VIBGATE_TEST_CACHE) / "acceptance") {
    fs::remove_all(root_);
    fs::create_directories(root_);
    const auto& sys = test::default_system();
    save_eigenstate_cache(root_ / "cache" / sys.hash().substr(0, 16), test::default_states(),
                          sys.hash());
  }

  RunConfig config(const std::string& name, const std::string& out) const {
    RunConfig cfg = load_config(fs::path(VIBGATE_CONFIG_DIR) / name);
    cfg.cache_dir = root_ / "cache";
    cfg.output_dir = root_ / out;
    return cfg;
  }

  GateRun optimize(const std::string& name, const std::string& out) const {
    GateRun r;
    r.config = name;
    const RunConfig cfg = config(name, out);
    r.gate = cfg.gate;
    r.dir = cfg.output_dir;
    std::ostringstream log;
    const auto t0 = Clock::now();
    r.exit_code = cli::cmd_optimize(cfg, log, log);
    r.seconds = seconds_since(t0);
    if (fs::exists(r.dir / "trace.csv")) r.trace = csv_rows(r.dir / "trace.csv");
    if (fs::exists(r.dir / "report.json")) r.report = nlohmann::json::parse(slurp(r.dir / "report.json"));
    if (fs::exists(r.dir / "pulse.csv")) r.field = read_pulse_csv(r.dir / "pulse.csv");
    return r;
  }

  /// Optimization for a shipped config, run once and shared by the criteria.
  const GateRun& shipped(const std::string& name) {
    auto it = runs_.find(name);
    if (it == runs_.end()) {
      std::cerr << "  optimizing " << name << " ..." << std::flush;
      it = runs_.emplace(name, optimize(name, "runs/" + fs::path(name).stem().string())).first;
      std::cerr << " exit " << it->second.exit_code << ", " << it->second.iterations()
                << " iterations, " << it->second.seconds << " s\n";
    }
    return it->second;
  }

 private:
  fs::path root_;
  std::map<std::string, GateRun> runs_;
};

struct GateTarget {
  const char* config;
  const char* label;
  double threshold;
};

constexpr GateTarget kGates[] = {
    {"not_q2.ini", "NOT", 0.90},         {"pi_q2.ini", "Pi", 0.97},
    {"hadamard_q2.ini", "Hadamard", 0.90}, {"cnot_c1.ini", "CNOT", 0.90},
    {"bell_prep.ini", "Bell prep", 0.96},  {"hadamard_prep.ini", "Hadamard prep", 0.98},
};

/// Shipped optimization configs, one per distinct canonical setting.
std::vector<std::string> optimization_configs(const Workspace& ws) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(VIBGATE_CONFIG_DIR))
    if (e.path().extension() == ".ini") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::set<std::string> seen;
  std::vector<std::string> out;
  // gate configs first so duplicates resolve to them
  std::stable_partition(names.begin(), names.end(), [](const std::string& n) {
    return std::any_of(std::begin(kGates), std::end(kGates), [&](const GateTarget& g) { return n == g.config; });
  });
  for (const auto& n : names) {
    const RunConfig cfg = ws.config(n, "probe");
    if (cfg.n_states == 12) continue;  // eigensolver-only config
    if (seen.insert(canonical_config(cfg)).second) out.push_back(n);
  }
  return out;
}

// ---------------------------------------------------------------- criteria

Outcome eigensolver_oracle() {
  Outcome o;
  const ModelParams p = test::harmonic_params();
  const MolecularSystem sys = build_model(p, test::harmonic_grid());
  const auto t0 = Clock::now();
  const auto st = relax(sys, 12);
  const double secs = seconds_since(t0);
  const double wr = units::wavenumber_to_hartree(p.omega_r);
  const double wd = units::wavenumber_to_hartree(p.omega_d);
  double worst = 0.0, ortho = 0.0;
  for (const auto& s : st) {
    const double exact = (s.quanta.n_r + 0.5) * wr + (s.quanta.n_d + 0.5) * wd;
    worst = std::max(worst, std::abs(s.energy_hartree - exact) / exact);
  }
  for (std::size_t i = 0; i < st.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      ortho = std::max(ortho, std::abs(inner_product(st[i].psi, st[j].psi) - (i == j ? 1.0 : 0.0)));
  o.detail << "12 states, max relative error " << worst << ", orthonormality " << ortho << ", " << secs
           << " s";
  o.require(worst <= 1e-6, "ladder");
  o.require(ortho <= 1e-8, "orthonormality");
  o.require(secs <= 120.0, "runtime");
  return o;
}

LaserField carrier(double dt, std::size_t n, double amp, double wavenumber) {
  LaserField f(dt, std::vector<double>(n));
  const double w = units::wavenumber_to_angular_per_fs(wavenumber);
  for (std::size_t j = 0; j < n; ++j) f.samples[j] = amp * std::cos(w * f.time_fs(j));
  return f;
}

Outcome propagator() {
  Outcome o;
  const auto& sys = test::default_system();
  const auto& st = test::default_states();

  PropagationOptions every;
  every.check_interval = 1000;
  const auto drift = propagate(st[0].psi, sys, carrier(0.25, 30000, 0.01, 727.0), every);
  const double norm_drift = std::max(drift.norm_drift, std::abs(drift.final_state.norm() - 1.0));

  const MolecularSystem harm = build_model(test::harmonic_params(), test::harmonic_grid());
  const auto pairs = test::separable_eigenpairs(harm, 3, 3);
  const LaserField zero(0.0005, std::vector<double>(2000, 0.0));
  double phase_err = 0.0;
  for (int k : {0, 1, 3}) {
    const auto& pr = pairs[static_cast<std::size_t>(k)];
    const cplx got = inner_product(pr.psi, propagate(pr.psi, harm, zero).final_state);
    const cplx expected = std::polar(1.0, -pr.energy * units::fs_to_au(zero.duration_fs()));
    phase_err = std::max(phase_err, std::abs(got - expected));
  }

  const MolecularSystem tls = test::two_level_system();
  const auto tl = test::separable_eigenpairs(tls, 1, 4);
  const double w01 = tl[1].energy - tl[0].energy;
  const double mu01 = std::abs(dipole_matrix_element(tls, tl[0].psi, tl[1].psi));
  const double e0 = 2e-5 / mu01;
  const double omega = mu01 * e0;
  const double dt = 0.025;
  const std::size_t n = static_cast<std::size_t>(1.5 * units::au_to_fs(std::numbers::pi / omega) / dt);
  LaserField drive(dt, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) drive.samples[j] = e0 * std::cos(w01 * units::fs_to_au(drive.time_fs(j)));
  PropagationOptions rec;
  rec.record_stride = 2000;
  const auto rabi = propagate(tl[0].psi, tls, drive, rec);
  double rabi_err = 0.0;
  for (std::size_t i = 0; i < rabi.trajectory.size(); ++i) {
    const double s = std::sin(0.5 * omega * units::fs_to_au(rabi.times_fs[i]));
    rabi_err = std::max(rabi_err, std::abs(std::norm(inner_product(tl[1].psi, rabi.trajectory[i])) - s * s));
  }

  WaveFunction psi0 = st[0].psi;
  psi0 += st[1].psi;
  psi0.normalize();
  const LaserField f = carrier(0.25, 2000, 0.02, 800.0);
  const auto fwd = propagate(psi0, sys, f);
  PropagationOptions back;
  back.direction = Direction::backward;
  WaveFunction diff = propagate(fwd.final_state, sys, f, back).final_state;
  diff -= psi0;
  const double round_trip = diff.norm();

  o.detail << "norm drift " << norm_drift << " over 30000 steps, eigenphase error " << phase_err
           << ", Rabi error " << rabi_err << ", round trip " << round_trip;
  o.require(norm_drift <= 1e-10, "norm drift");
  o.require(phase_err <= 1e-8, "eigenphase");
  o.require(rabi_err <= 1e-3, "Rabi curve");
  o.require(round_trip <= 1e-8, "round trip");
  return o;
}

Outcome monotonicity(Workspace& ws) {
  Outcome o;
  const auto names = optimization_configs(ws);
  double worst = 0.0;
  for (const auto& n : names) {
    const GateRun& r = ws.shipped(n);
    o.require(!r.trace.empty(), n + " produced no trace");
    worst = std::max(worst, r.worst_decrease());
    o.require(r.worst_decrease() <= 1e-9, n + " decreased K");
  }
  o.detail << names.size() << " configs, largest K decrease " << worst;
  return o;
}

Outcome gradient_check() {
  Outcome o;
  const MolecularSystem sys = test::two_level_system();
  const auto st = relax(sys, 3);
  ControlProblem p;
  p.duration_fs = 30.0;
  p.dt_fs = 0.05;
  p.alpha = 0.5;
  p.transitions = {{Superposition::basis(0), Superposition::basis(1), 1.0, true}};
  const double w = st[1].energy_hartree - st[0].energy_hartree;
  LaserField field(p.dt_fs, std::vector<double>(p.steps()));
  const auto shape = p.shape_samples();
  for (std::size_t j = 0; j < field.steps(); ++j)
    field.samples[j] = 0.02 * shape[j] * std::cos(w * units::fs_to_au(field.time_fs(j)));
  const double dt = units::fs_to_au(p.dt_fs);
  const std::size_t n = field.steps();

  const SplitOperator fwd_op(sys, dt), bwd_op(sys, -dt);
  const WaveFunction& phi = st[1].psi;
  WaveFunction final_state = st[0].psi;
  fwd_op.steps(final_state.amp(), field.samples);
  const cplx c_conj = inner_product(final_state, phi);

  double worst = 0.0;
  for (std::size_t j : {n / 5, n / 2, 3 * n / 4}) {
    WaveFunction psi = st[0].psi;
    for (std::size_t m = 0; m < j; ++m) fwd_op.step(psi.amp(), field.samples[m]);
    fwd_op.kinetic(psi.amp(), true);
    fwd_op.potential_and_field(psi.amp(), field.samples[j]);
    WaveFunction chi = phi;
    for (std::size_t m = n; m-- > j + 1;) bwd_op.step(chi.amp(), field.samples[m]);
    bwd_op.kinetic(chi.amp(), true);
    const std::vector<WaveFunction> f = {psi}, b = {chi};
    const std::vector<cplx> c = {c_conj};
    const double analytic = 2.0 * dt * (p.alpha / shape[j]) * update_field(sys, f, b, c, p.alpha, shape[j]);

    const double h = 1e-5;
    LaserField up = field, down = field;
    up.samples[j] += h;
    down.samples[j] -= h;
    const double fd = (overlap_term(p, sys, st, up) - overlap_term(p, sys, st, down)) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic - fd) / std::abs(fd));
  }
  o.detail << "largest relative deviation " << worst << " at 3 samples";
  o.require(worst <= 1e-4, "gradient");
  return o;
}

Outcome gate_synthesis(Workspace& ws) {
  Outcome o;
  for (const auto& g : kGates) {
    const GateRun& r = ws.shipped(g.config);
    const double mean = r.report.is_null() ? 0.0 : r.report["mean_fidelity"].get<double>();
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s%s %.4f (>= %.2f, %zu it, %.0f s, peak %.4f)",
                  &g == &kGates[0] ? "" : "; ", g.label, mean, g.threshold, r.iterations(), r.seconds,
                  r.field.samples.empty() ? 0.0 : r.field.peak());
    o.detail << buf;
    o.require(mean >= g.threshold, std::string(g.label) + " fidelity");
    o.require(r.iterations() <= 1000, std::string(g.label) + " iterations");
    o.require(r.seconds <= 1800.0, std::string(g.label) + " runtime");
  }

  // NOT applied twice returns the basis states, degraded by twice the infidelity
  const GateRun& n = ws.shipped("not_q2.ini");
  if (!n.field.samples.empty()) {
    LaserField twice = n.field;
    twice.samples.insert(twice.samples.end(), n.field.samples.begin(), n.field.samples.end());
    const auto& st = test::default_states();
    const auto spec = make_gate_spec("identity", QubitEncoding::from_states(st));
    const double back = gate_fidelity(twice, spec, test::default_system(), st).mean;
    const double r = n.report["mean_fidelity"].get<double>();
    char buf[120];
    std::snprintf(buf, sizeof buf, "; NOT twice %.4f (>= %.4f)", back, r * r - 0.05);
    o.detail << buf;
    o.require(back >= r * r - 0.05, "NOT involution");
  }
  return o;
}

Outcome intensities() {
  Outcome o;
  struct Pair {
    const char* gate;
    double field, quoted;
  };
  const Pair pairs[] = {{"Pi", 0.0057, 1.1597e12},
                        {"Hadamard", 0.0095, 3.226e12},
                        {"CNOT", 0.0070, 1.749e12},
                        {"reference", 0.0280, 2.799e13}};
  double worst = 0.0;
  for (const auto& p : pairs) worst = std::max(worst, std::abs(intensity(p.field) / p.quoted - 1.0));
  const double not_ratio = 7.146e13 / intensity(0.0224);
  o.detail << "largest deviation " << worst * 100.0 << "% over 4 pairs; NOT pair quoted/computed = "
           << not_ratio << " (reported discrepancy)";
  o.require(worst <= 0.02, "intensity pairs");
  o.require(not_ratio > 3.9 && not_ratio < 4.2, "NOT discrepancy factor");
  return o;
}

Outcome mask_pixelation(Workspace& ws) {
  Outcome o;
  const GateRun& r = ws.shipped("cnot_c1.ini");
  if (r.field.samples.empty()) {
    o.require(false, "no CNOT pulse");
    return o;
  }
  const auto& sys = test::default_system();
  const auto& st = test::default_states();
  const GateSpec spec = make_gate_spec("cnot_c1", QubitEncoding::from_states(st));
  const LaserField reference =
      fourier_limited_pulse(674.0, 590.0, 0.028, r.field.dt_fs, r.field.duration_fs());
  const double base = gate_fidelity(r.field, spec, sys, st).mean;
  std::vector<double> retention;
  o.detail << "unpixelated " << base << ", retention";
  try {
    for (std::size_t n : {16u, 32u, 64u, 128u, 256u}) {
      const MaskFunction m = compute_mask(r.field, reference, n);
      LaserField shaped = apply_mask(reference, m);
      for (double& x : shaped.samples) x /= m.scale;
      retention.push_back(gate_fidelity(shaped, spec, sys, st).mean / base);
      o.detail << ' ' << n << ':' << retention.back();
    }
  } catch (const CoverageError& e) {
    o.require(false, e.what());
    return o;
  }
  o.require(retention[3] >= 0.95, "128-pixel retention");
  for (std::size_t i = 1; i < retention.size(); ++i)
    o.require(retention[i] >= retention[i - 1] - 1e-9, "monotone retention");
  return o;
}

Outcome revivals() {
  Outcome o;
  const auto& st = test::default_states();
  const auto energies = energies_hartree(st);
  const QubitEncoding enc = QubitEncoding::from_states(st);
  const double dt = 0.1;
  for (const char* name : {"bell_prep", "hadamard_prep"}) {
    const auto spec = make_gate_spec(name, enc);
    std::vector<cplx> c(st.size(), 0.0);
    for (const auto& t : spec.transitions[0].target.terms) c[t.index] = t.weight;
    const auto predicted = predicted_revivals(c, energies);
    const auto seen = first_revival(autocorrelation(c, energies, 3.0 * predicted.at(0), dt), dt);
    o.detail << name << " predicted " << predicted[0] << " fs, observed "
             << (seen ? std::to_string(*seen) : std::string("none")) << " fs; ";
    o.require(seen && std::abs(*seen - predicted[0]) <= dt, name);
  }
  o.detail << "sample " << dt << " fs";
  return o;
}

Outcome leakage_audit(Workspace& ws) {
  Outcome o;
  double worst = 0.0;
  for (const auto& g : kGates) {
    const GateRun& r = ws.shipped(g.config);
    if (r.report.is_null()) {
      o.require(false, std::string(g.label) + " report missing");
      continue;
    }
    const double err = r.report["unit_sum_error"].get<double>();
    worst = std::max(worst, err);
    o.require(err <= 1e-6, std::string(g.label) + " unit sum");
    const auto& lk = r.report["leakage"];
    o.require(lk.contains("top3_concentration"), std::string(g.label) + " concentration");
    char buf[120];
    std::snprintf(buf, sizeof buf, "; %s leakage %.2e top-3 %.3f", g.label, lk["total"].get<double>(),
                  lk["top3_concentration"].get<double>());
    o.detail << buf;
  }
  std::ostringstream head;
  head << "largest unit-sum error " << worst;
  const std::string rest = o.detail.str();
  o.detail.str(head.str() + rest);
  return o;
}

Outcome determinism(Workspace& ws) {
  Outcome o;
  const GateRun a = ws.optimize("quick_not.ini", "determinism/a");
  const GateRun b = ws.optimize("quick_not.ini", "determinism/b");
  bool same_shape = !a.trace.empty() && a.trace.size() == b.trace.size();
  double worst = 0.0;
  if (same_shape)
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      same_shape = same_shape && a.trace[i].size() == b.trace[i].size();
      for (std::size_t k = 0; same_shape && k < a.trace[i].size(); ++k)
        worst = std::max(worst, std::abs(a.trace[i][k] - b.trace[i][k]));
    }
  const bool identical = slurp(a.dir / "trace.csv") == slurp(b.dir / "trace.csv");
  o.detail << a.trace.size() << " trace rows, largest difference " << worst
           << (identical ? ", byte-identical" : "");
  o.require(same_shape, "trace layout");
  o.require(worst <= 1e-9, "trace values");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("criteria", only, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  Workspace ws;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"eigensolver harmonic oracle", eigensolver_oracle},
      {"propagator accuracy", propagator},
      {"OCT monotonicity", [&] { return monotonicity(ws); }},
      {"gradient check", gradient_check},
      {"gate synthesis", [&] { return gate_synthesis(ws); }},
      {"intensity conversions", intensities},
      {"mask pixelation", [&] { return mask_pixelation(ws); }},
      {"revival prediction", revivals},
      {"leakage audit", [&] { return leakage_audit(ws); }},
      {"determinism", [&] { return determinism(ws); }},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << criteria[i].first
              << "): " << o.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
