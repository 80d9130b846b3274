#include "vibgate/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "vibgate/errors.hpp"
#include "vibgate/gates.hpp"
#include "vibgate/units.hpp"

namespace vibgate {
namespace {

namespace pt = boost::property_tree;

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

Setter real(double RunConfig::*member) {
  return [member](RunConfig& c, const std::string& k, const std::string& v) {
    c.*member = to_double(k, v);
  };
}

template <typename F>
Setter with(F f) {
  return [f](RunConfig& c, const std::string& k, const std::string& v) { f(c, k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"system.omega_r", with([](RunConfig& c, auto& k, auto& v) { c.system.omega_r = to_double(k, v); })},
      {"system.omega_d", with([](RunConfig& c, auto& k, auto& v) { c.system.omega_d = to_double(k, v); })},
      {"system.anharmonicity_r",
       with([](RunConfig& c, auto& k, auto& v) { c.system.anharmonicity_r = to_double(k, v); })},
      {"system.anharmonicity_d",
       with([](RunConfig& c, auto& k, auto& v) { c.system.anharmonicity_d = to_double(k, v); })},
      {"system.coupling", with([](RunConfig& c, auto& k, auto& v) { c.system.coupling = to_double(k, v); })},
      {"system.dipole_slope_r",
       with([](RunConfig& c, auto& k, auto& v) { c.system.dipole_slope_r = to_double(k, v); })},
      {"system.dipole_slope_d",
       with([](RunConfig& c, auto& k, auto& v) { c.system.dipole_slope_d = to_double(k, v); })},
      {"system.dipole_saturation",
       with([](RunConfig& c, auto& k, auto& v) { c.system.dipole_saturation = to_double(k, v); })},
      {"system.mass_r_amu", with([](RunConfig& c, auto& k, auto& v) {
         c.system.mass_r = to_double(k, v) * units::kAmuInElectronMasses;
       })},
      {"system.mass_d_amu", with([](RunConfig& c, auto& k, auto& v) {
         c.system.mass_d = to_double(k, v) * units::kAmuInElectronMasses;
       })},
      {"grid.r_min", with([](RunConfig& c, auto& k, auto& v) { c.grid.r_min = to_double(k, v); })},
      {"grid.r_max", with([](RunConfig& c, auto& k, auto& v) { c.grid.r_max = to_double(k, v); })},
      {"grid.d_min", with([](RunConfig& c, auto& k, auto& v) { c.grid.d_min = to_double(k, v); })},
      {"grid.d_max", with([](RunConfig& c, auto& k, auto& v) { c.grid.d_max = to_double(k, v); })},
      {"grid.n_r", with([](RunConfig& c, auto& k, auto& v) { c.grid.n_r = to_uint(k, v); })},
      {"grid.n_d", with([](RunConfig& c, auto& k, auto& v) { c.grid.n_d = to_uint(k, v); })},
      {"eigensolve.n_states", with([](RunConfig& c, auto& k, auto& v) { c.n_states = to_uint(k, v); })},
      {"eigensolve.tau_fs", with([](RunConfig& c, auto& k, auto& v) { c.relax.tau_fs = to_double(k, v); })},
      {"eigensolve.max_steps",
       with([](RunConfig& c, auto& k, auto& v) { c.relax.max_steps = to_uint(k, v); })},
      {"eigensolve.energy_tolerance",
       with([](RunConfig& c, auto& k, auto& v) { c.relax.energy_tolerance = to_double(k, v); })},
      {"eigensolve.residual_tolerance",
       with([](RunConfig& c, auto& k, auto& v) { c.relax.residual_tolerance = to_double(k, v); })},
      {"eigensolve.perturbation",
       with([](RunConfig& c, auto& k, auto& v) { c.relax.perturbation = to_double(k, v); })},
      {"problem.gate", with([](RunConfig& c, auto&, auto& v) { c.gate = v; })},
      {"problem.transitions", with([](RunConfig& c, auto&, auto& v) { c.transitions = v; })},
      {"problem.alpha", real(&RunConfig::alpha)},
      {"problem.duration_fs", real(&RunConfig::duration_fs)},
      {"problem.dt_fs", real(&RunConfig::dt_fs)},
      {"problem.max_iter", with([](RunConfig& c, auto& k, auto& v) { c.max_iter = to_uint(k, v); })},
      {"problem.target_fidelity", real(&RunConfig::target_fidelity)},
      {"problem.guess_peak", real(&RunConfig::guess_peak)},
      {"problem.guess", with([](RunConfig& c, auto&, auto& v) { c.guess = v; })},
      {"problem.polarization_r",
       with([](RunConfig& c, auto& k, auto& v) { c.polarization.r = to_double(k, v); })},
      {"problem.polarization_d",
       with([](RunConfig& c, auto& k, auto& v) { c.polarization.d = to_double(k, v); })},
      {"problem.seed", with([](RunConfig& c, auto& k, auto& v) {
         c.seed = to_uint(k, v);
         c.relax.seed = c.seed;
       })},
      {"output.dir", with([](RunConfig& c, auto&, auto& v) { c.output_dir = v; })},
      {"output.cache_dir", with([](RunConfig& c, auto&, auto& v) { c.cache_dir = v; })},
      {"output.cache", with([](RunConfig& c, auto& k, auto& v) {
         if (v == "use") c.cache = CachePolicy::use;
         else if (v == "refresh") c.cache = CachePolicy::refresh;
         else if (v == "off") c.cache = CachePolicy::off;
         else throw ConfigError(k + ": expected use, refresh or off");
       })},
  };
  return table;
}

bool power_of_two(std::size_t n) { return n >= 16 && (n & (n - 1)) == 0; }

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

void RunConfig::validate() const {
  try {
    system.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  if (!(grid.r_max > grid.r_min)) throw ConfigError("grid.r_max: must exceed grid.r_min");
  if (!(grid.d_max > grid.d_min)) throw ConfigError("grid.d_max: must exceed grid.d_min");
  if (!power_of_two(grid.n_r)) throw ConfigError("grid.n_r: must be a power of two >= 16");
  if (!power_of_two(grid.n_d)) throw ConfigError("grid.n_d: must be a power of two >= 16");
  if (n_states == 0) throw ConfigError("eigensolve.n_states: must be at least 1");
  if (n_states > grid.n_r * grid.n_d / 4)
    throw ConfigError("eigensolve.n_states: exceeds a quarter of the grid points");
  try {
    relax.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("eigensolve: ") + e.what());
  }
  if (transitions.empty()) {
    bool known = false;
    for (const char* g : kGateNames) known = known || gate == g;
    if (!known) throw ConfigError("problem.gate: unknown gate '" + gate + "'");
  } else {
    try {
      QubitEncoding dummy{{0, 1, 2, 3}};
      parse_transitions(transitions, dummy);
    } catch (const SpecError& e) {
      throw ConfigError(std::string("problem.transitions: ") + e.what());
    }
  }
  if (!(alpha > 0.0)) throw ConfigError("problem.alpha: must be positive");
  if (!(dt_fs > 0.0 && dt_fs <= 0.25)) throw ConfigError("problem.dt_fs: must lie in (0, 0.25]");
  if (!(duration_fs >= 10.0 * dt_fs)) throw ConfigError("problem.duration_fs: too short for dt_fs");
  if (max_iter == 0) throw ConfigError("problem.max_iter: must be at least 1");
  if (!(target_fidelity > 0.0 && target_fidelity <= 1.0))
    throw ConfigError("problem.target_fidelity: must lie in (0, 1]");
  if (!(guess_peak >= 0.0 && guess_peak < kIonizationGuard))
    throw ConfigError("problem.guess_peak: must lie in [0, 0.05)");
  if (!(std::abs(polarization.r) <= 1.0 && std::abs(polarization.d) <= 1.0) ||
      (polarization.r == 0.0 && polarization.d == 0.0))
    throw ConfigError("problem.polarization: weights must lie in [-1, 1] and not both vanish");
  if (!guess.empty() && !std::filesystem::exists(resolve(base_dir, guess)))
    throw ConfigError("problem.guess: file not found: " + resolve(base_dir, guess).string());
  if (output_dir.empty()) throw ConfigError("output.dir: must not be empty");
}

ControlProblem RunConfig::problem_settings() const {
  ControlProblem p;
  p.alpha = alpha;
  p.duration_fs = duration_fs;
  p.dt_fs = dt_fs;
  p.max_iter = max_iter;
  p.target_fidelity = target_fidelity;
  p.polarization = polarization;
  p.guess_peak = guess_peak;
  if (!guess.empty()) p.guess = read_pulse_csv(resolve(base_dir, guess));
  return p;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config syntax: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  cfg.base_dir = base_dir;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section + ": key outside a section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      auto it = setters().find(name);
      if (it == setters().end()) throw ConfigError(name + ": unknown key");
      it->second(cfg, name, value.get_value<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream out;
  char buf[96];
  auto num = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
    out << buf;
  };
  num("system.omega_r", c.system.omega_r);
  num("system.omega_d", c.system.omega_d);
  num("system.anharmonicity_r", c.system.anharmonicity_r);
  num("system.anharmonicity_d", c.system.anharmonicity_d);
  num("system.coupling", c.system.coupling);
  num("system.dipole_slope_r", c.system.dipole_slope_r);
  num("system.dipole_slope_d", c.system.dipole_slope_d);
  num("system.dipole_saturation", c.system.dipole_saturation);
  num("system.mass_r", c.system.mass_r);
  num("system.mass_d", c.system.mass_d);
  num("grid.r_min", c.grid.r_min);
  num("grid.r_max", c.grid.r_max);
  num("grid.d_min", c.grid.d_min);
  num("grid.d_max", c.grid.d_max);
  num("grid.n_r", static_cast<double>(c.grid.n_r));
  num("grid.n_d", static_cast<double>(c.grid.n_d));
  num("eigensolve.n_states", static_cast<double>(c.n_states));
  num("eigensolve.tau_fs", c.relax.tau_fs);
  num("eigensolve.max_steps", static_cast<double>(c.relax.max_steps));
  num("eigensolve.energy_tolerance", c.relax.energy_tolerance);
  num("eigensolve.residual_tolerance", c.relax.residual_tolerance);
  num("eigensolve.perturbation", c.relax.perturbation);
  out << "problem.gate=" << c.gate << "\nproblem.transitions=" << c.transitions << '\n';
  num("problem.alpha", c.alpha);
  num("problem.duration_fs", c.duration_fs);
  num("problem.dt_fs", c.dt_fs);
  num("problem.max_iter", static_cast<double>(c.max_iter));
  num("problem.target_fidelity", c.target_fidelity);
  num("problem.guess_peak", c.guess_peak);
  out << "problem.guess=" << c.guess.string() << '\n';
  num("problem.polarization_r", c.polarization.r);
  num("problem.polarization_d", c.polarization.d);
  out << "problem.seed=" << c.seed << '\n';
  return out.str();
}

}  // namespace vibgate
