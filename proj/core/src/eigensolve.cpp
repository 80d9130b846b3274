#include "vibgate/eigensolve.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "vibgate/errors.hpp"
#include "vibgate/propagate.hpp"
#include "vibgate/units.hpp"

namespace vibgate {
namespace {

using Vec = std::vector<cplx>;

cplx dot(const Vec& a, const Vec& b) {
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    re += a[n].real() * b[n].real() + a[n].imag() * b[n].imag();
    im += a[n].real() * b[n].imag() - a[n].imag() * b[n].real();
  }
  return {re, im};
}

void axpy(cplx s, const Vec& x, Vec& y) {
  for (std::size_t n = 0; n < y.size(); ++n) y[n] += s * x[n];
}

double norm2(const Vec& a) {
  double s = 0.0;
  for (const cplx& x : a) s += std::norm(x);
  return s;
}

void scale(Vec& a, double s) {
  for (cplx& x : a) x *= s;
}

// Vectors are kept normalized in the plain Euclidean sense; the grid cell
// weight is applied only when building EigenStates.
void project_out(Vec& v, const std::vector<Vec>& basis, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) axpy(-dot(basis[k], v), basis[k], v);
}

// Modified Gram-Schmidt, twice for stability.
void orthonormalize(std::vector<Vec>& x) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      project_out(x[i], x, i);
      scale(x[i], 1.0 / std::sqrt(norm2(x[i])));
    }
  }
}

Vec apply_h(const MolecularSystem& system, const Vec& v) {
  WaveFunction w(system.grid(), v);
  auto h = apply_hamiltonian(system, w);
  return Vec(h.amp().begin(), h.amp().end());
}

// Fixes the arbitrary global phase: the largest amplitude becomes real
// and positive.
void fix_phase(Vec& v) {
  std::size_t best = 0;
  for (std::size_t n = 1; n < v.size(); ++n)
    if (std::norm(v[n]) > std::norm(v[best]) * (1.0 + 1e-12)) best = n;
  const cplx ph = std::conj(v[best]) / std::abs(v[best]);
  for (cplx& x : v) x *= ph;
}

// Eigenfunctions of the 1D cuts V(r, d0) and V(r0, d) on the grid's own
// points, normalized with the grid spacing. For a harmonic surface these
// are the discrete harmonic oscillator functions.
struct ModeFunctions {
  std::vector<double> energy;
  std::vector<std::vector<double>> f;  // [n][grid index]
};

struct ModeTables {
  ModeFunctions r, d;
};

ModeFunctions cut_eigenfunctions(const std::vector<double>& v, double delta, double mass,
                                 std::size_t count) {
  const std::size_t n = v.size();
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * delta);
  std::vector<double> t_row(n, 0.0);
  for (std::size_t off = 0; off < n; ++off) {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double kp = dk * (p < n / 2 ? static_cast<double>(p)
                                        : static_cast<double>(p) - static_cast<double>(n));
      s += kp * kp / (2.0 * mass) *
           std::cos(2.0 * std::numbers::pi * static_cast<double>(p * off) / static_cast<double>(n));
    }
    t_row[off] = s / static_cast<double>(n);
  }
  Eigen::MatrixXd h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          t_row[i > j ? i - j : j - i] + (i == j ? v[i] : 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  ModeFunctions out;
  const double w = 1.0 / std::sqrt(delta);
  for (std::size_t k = 0; k < std::min(count, n); ++k) {
    std::vector<double> f(n);
    double big = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = es.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * w;
      if (std::abs(f[i]) > std::abs(big)) big = f[i];
    }
    if (big < 0.0)
      for (double& x : f) x = -x;
    out.energy.push_back(es.eigenvalues()(static_cast<Eigen::Index>(k)));
    out.f.push_back(std::move(f));
  }
  return out;
}

std::size_t nearest_index(double x, double lo, double h, std::size_t n) {
  const auto i = static_cast<std::ptrdiff_t>(std::lround((x - lo) / h));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

ModeTables mode_tables(const MolecularSystem& system, std::size_t count) {
  const Grid2D& g = system.grid();
  const std::size_t ic = nearest_index(system.r0(), g.r_min(), g.dr(), g.n_r());
  const std::size_t jc = nearest_index(system.d0(), g.d_min(), g.dd(), g.n_d());
  std::vector<double> vr(g.n_r()), vd(g.n_d());
  for (std::size_t i = 0; i < g.n_r(); ++i) vr[i] = system.v()[g.index(i, jc)];
  for (std::size_t j = 0; j < g.n_d(); ++j) vd[j] = system.v()[g.index(ic, j)];
  return {cut_eigenfunctions(vr, g.dr(), system.mass_r(), count),
          cut_eigenfunctions(vd, g.dd(), system.mass_d(), count)};
}

std::vector<Quanta> guess_order(const ModeTables& t, std::size_t count) {
  std::vector<Quanta> all;
  for (std::size_t a = 0; a < t.r.energy.size(); ++a)
    for (std::size_t b = 0; b < t.d.energy.size(); ++b)
      all.push_back({static_cast<int>(a), static_cast<int>(b)});
  std::stable_sort(all.begin(), all.end(), [&](const Quanta& x, const Quanta& y) {
    return t.r.energy[static_cast<std::size_t>(x.n_r)] + t.d.energy[static_cast<std::size_t>(x.n_d)] <
           t.r.energy[static_cast<std::size_t>(y.n_r)] + t.d.energy[static_cast<std::size_t>(y.n_d)];
  });
  all.resize(std::min(count, all.size()));
  return all;
}

Vec product_guess(const Grid2D& g, const ModeTables& t, Quanta q) {
  const auto& a = t.r.f[static_cast<std::size_t>(q.n_r)];
  const auto& b = t.d.f[static_cast<std::size_t>(q.n_d)];
  Vec v(g.size());
  for (std::size_t i = 0; i < g.n_r(); ++i)
    for (std::size_t j = 0; j < g.n_d(); ++j) v[g.index(i, j)] = a[i] * b[j];
  return v;
}

}  // namespace

void RelaxConfig::validate() const {
  if (!(tau_fs > 0.0) || !(min_tau_fs > 0.0) || min_tau_fs > tau_fs)
    throw ParameterError("relaxation step must satisfy 0 < min_tau <= tau");
  if (max_steps == 0) throw ParameterError("max_steps must be positive");
  if (!(energy_tolerance > 0.0) || !(residual_tolerance > 0.0))
    throw ParameterError("tolerances must be positive");
  if (!(perturbation >= 0.0)) throw ParameterError("perturbation must be >= 0");
}

double hermite_function(int n, double m_omega, double q) {
  const double xi = std::sqrt(m_omega) * q;
  const double pref = std::pow(m_omega, 0.25);
  double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
  if (n == 0) return pref * h0;
  double h1 = std::sqrt(2.0) * xi * h0;
  for (int k = 1; k < n; ++k) {
    const double h2 = std::sqrt(2.0 / (k + 1)) * xi * h1 - std::sqrt(static_cast<double>(k) / (k + 1)) * h0;
    h0 = h1;
    h1 = h2;
  }
  return pref * h1;
}

std::vector<EigenState> relax(const MolecularSystem& system, std::size_t n_states,
                              const RelaxConfig& cfg) {
  cfg.validate();
  if (n_states == 0) throw ParameterError("n_states must be >= 1");
  const Grid2D& g = system.grid();
  const std::size_t total = n_states + cfg.guard_states;
  if (total > g.size() / 4)
    throw SpectrumExhaustedError("grid cannot resolve " + std::to_string(total) + " states");
  const double edge = system.edge_potential();

  double tau = units::fs_to_au(cfg.tau_fs);
  const double tau_min = units::fs_to_au(cfg.min_tau_fs);
  auto make_op = [&](double t) { return SplitOperator(system, cplx(0.0, -t)); };

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise;
  std::vector<Vec> x;
  x.reserve(total);

  // Sequential relaxation, each state kept orthogonal to all lower ones.
  {
    SplitOperator op = make_op(tau);
    const ModeTables tables = mode_tables(system, total + 1);
    for (const Quanta& q : guess_order(tables, total)) {
      Vec v = product_guess(g, tables, q);
      if (cfg.perturbation > 0.0) {
        double peak = 0.0;
        for (const cplx& a : v) peak = std::max(peak, std::abs(a));
        for (cplx& a : v) a += cfg.perturbation * peak * noise(rng);
      }
      project_out(v, x, x.size());
      scale(v, 1.0 / std::sqrt(norm2(v)));
      double e_prev = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < cfg.max_steps; ++s) {
        Vec trial = v;
        op.step(trial, 0.0);
        project_out(trial, x, x.size());
        const double nn = norm2(trial);
        if (!std::isfinite(nn) || !(nn > 0.0)) {
          if (tau / 2.0 < tau_min)
            throw ConvergenceError("imaginary-time relaxation diverged", std::numeric_limits<double>::infinity());
          tau /= 2.0;
          op = make_op(tau);
          continue;
        }
        const double e = -0.5 * std::log(nn) / tau;
        scale(trial, 1.0 / std::sqrt(nn));
        v = std::move(trial);
        if (std::abs(e - e_prev) < cfg.energy_tolerance) break;
        e_prev = e;
      }
      x.push_back(std::move(v));
    }
  }

  // Block refinement: imaginary-time sweeps of the whole set, each ended by
  // diagonalizing H in the current span.
  std::vector<double> energies(total);
  std::vector<double> residuals(total);
  std::size_t used = 0;
  double best_worst = std::numeric_limits<double>::infinity();
  std::vector<double> e_last(total, std::numeric_limits<double>::infinity());
  SplitOperator op = make_op(tau);
  const double cell = g.cell();
  for (;;) {
    orthonormalize(x);
    std::vector<Vec> hx(total);
    for (std::size_t i = 0; i < total; ++i) hx[i] = apply_h(system, x[i]);
    Eigen::MatrixXcd h(total, total);
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t j = i; j < total; ++j) {
        const cplx hij = dot(x[i], hx[j]);
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hij;
        h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(hij);
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::MatrixXcd& c = es.eigenvectors();
    std::vector<Vec> y(total, Vec(g.size())), hy(total, Vec(g.size()));
    for (std::size_t k = 0; k < total; ++k)
      for (std::size_t i = 0; i < total; ++i) {
        const cplx cik = c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        axpy(cik, x[i], y[k]);
        axpy(cik, hx[i], hy[k]);
      }
    double worst = 0.0, worst_de = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
      energies[k] = es.eigenvalues()(static_cast<Eigen::Index>(k));
      axpy(-energies[k], y[k], hy[k]);
      residuals[k] = std::sqrt(norm2(hy[k]) / norm2(y[k]));
      if (k < n_states) {
        worst = std::max(worst, residuals[k]);
        worst_de = std::max(worst_de, std::abs(energies[k] - e_last[k]));
      }
      e_last[k] = energies[k];
    }
    x = std::move(y);

    for (std::size_t k = 0; k < n_states; ++k)
      if (energies[k] >= edge)
        throw SpectrumExhaustedError("state " + std::to_string(k) + " at " +
                                     std::to_string(units::hartree_to_wavenumber(energies[k])) +
                                     " cm^-1 lies above the confinement edge");
    if (worst <= cfg.residual_tolerance && worst_de < cfg.energy_tolerance) break;
    if (used >= cfg.max_steps)
      throw ConvergenceError("relaxation did not converge; worst residual " + std::to_string(worst) +
                                 " hartree",
                             worst);

    // The split-operator fixed point differs from the true eigenvector by
    // O(tau^2); shrink tau once a sweep stops improving the residual.
    if (worst > cfg.residual_tolerance && worst > 0.7 * best_worst && tau / 2.0 >= tau_min) {
      tau /= 2.0;
      op = make_op(tau);
    }
    best_worst = std::min(best_worst, worst);

    const auto sweep = static_cast<std::size_t>(std::ceil(80.0 / tau));
    for (std::size_t s = 0; s < sweep; ++s) {
      for (auto& v : x) op.step(v, 0.0);
      orthonormalize(x);
    }
    used += sweep;
  }

  std::vector<EigenState> out;
  out.reserve(n_states);
  const double inv_sqrt_cell = 1.0 / std::sqrt(cell);
  for (std::size_t k = 0; k < n_states; ++k) {
    Vec v = std::move(x[k]);
    fix_phase(v);
    scale(v, inv_sqrt_cell);
    EigenState st{WaveFunction(g, std::move(v)), units::hartree_to_wavenumber(energies[k]),
                  energies[k], {}, 0.0, k, residuals[k]};
    const auto a = try_assign_quanta(st.psi, system);
    st.quanta = a.quanta;
    st.confidence = a.confidence;
    out.push_back(std::move(st));
  }
  return out;
}

Assignment try_assign_quanta(const WaveFunction& psi, const MolecularSystem& system, int n_max) {
  if (!(psi.grid() == system.grid())) throw DimensionError("state is not on the system grid");
  const Grid2D& g = system.grid();
  const ModeTables t = mode_tables(system, static_cast<std::size_t>(n_max) + 1);
  const auto amp = psi.amp();
  const double nrm = psi.norm_squared();
  Assignment best;
  std::vector<cplx> partial(g.n_r());
  const int nb = static_cast<int>(t.d.f.size()), na = static_cast<int>(t.r.f.size());
  for (int b = 0; b < nb; ++b) {
    const auto& hd = t.d.f[static_cast<std::size_t>(b)];
    for (std::size_t i = 0; i < g.n_r(); ++i) {
      cplx s{};
      for (std::size_t j = 0; j < g.n_d(); ++j) s += hd[j] * amp[g.index(i, j)];
      partial[i] = s;
    }
    for (int a = 0; a < na; ++a) {
      const auto& hr = t.r.f[static_cast<std::size_t>(a)];
      cplx s{};
      for (std::size_t i = 0; i < g.n_r(); ++i) s += hr[i] * partial[i];
      const double w = std::norm(s * g.cell()) / nrm;
      if (w > best.confidence) best = {{a, b}, w};
    }
  }
  return best;
}

Quanta assign_quanta(const EigenState& state, const MolecularSystem& system) {
  const auto a = try_assign_quanta(state.psi, system);
  if (a.confidence < 0.5)
    throw AmbiguousAssignmentError("state " + std::to_string(state.index) +
                                       " is strongly mixed; best overlap " +
                                       std::to_string(a.confidence),
                                   a.confidence);
  return a.quanta;
}

std::optional<std::size_t> find_state(const std::vector<EigenState>& states, Quanta q) {
  for (const auto& s : states)
    if (s.quanta == q && s.confidence >= 0.5) return s.index;
  return std::nullopt;
}

std::vector<double> energies_hartree(const std::vector<EigenState>& states) {
  std::vector<double> e;
  for (const auto& s : states) e.push_back(s.energy_hartree);
  return e;
}

std::vector<WaveFunction> wavefunctions(const std::vector<EigenState>& states) {
  std::vector<WaveFunction> w;
  for (const auto& s : states) w.push_back(s.psi);
  return w;
}

void save_eigenstate_cache(const std::filesystem::path& dir,
                           const std::vector<EigenState>& states,
                           const std::string& system_hash) {
  std::filesystem::create_directories(dir);
  nlohmann::json m;
  m["system_hash"] = system_hash;
  m["states"] = nlohmann::json::array();
  for (const auto& s : states) {
    char name[32];
    std::snprintf(name, sizeof name, "state_%03zu.vgwf", s.index);
    write_snapshot(dir / name, s.psi);
    m["states"].push_back({{"index", s.index},
                           {"energy_cm", s.energy},
                           {"energy_hartree", s.energy_hartree},
                           {"n_r", s.quanta.n_r},
                           {"n_d", s.quanta.n_d},
                           {"confidence", s.confidence},
                           {"residual", s.residual},
                           {"file", name}});
  }
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << '\n';
  if (!out) throw Error("cannot write eigenstate cache in " + dir.string());
}

std::optional<std::vector<EigenState>> load_eigenstate_cache(const std::filesystem::path& dir,
                                                             const std::string& system_hash,
                                                             std::size_t n_states) {
  std::ifstream in(dir / "manifest.json");
  if (!in) return std::nullopt;
  nlohmann::json m;
  try {
    in >> m;
    if (m.at("system_hash").get<std::string>() != system_hash) return std::nullopt;
    const auto& arr = m.at("states");
    if (arr.size() < n_states) return std::nullopt;
    std::vector<EigenState> out;
    for (std::size_t k = 0; k < n_states; ++k) {
      const auto& e = arr[k];
      EigenState s{read_snapshot(dir / e.at("file").get<std::string>()),
                   e.at("energy_cm").get<double>(),
                   e.at("energy_hartree").get<double>(),
                   {e.at("n_r").get<int>(), e.at("n_d").get<int>()},
                   e.at("confidence").get<double>(),
                   e.at("index").get<std::size_t>(),
                   e.at("residual").get<double>()};
      out.push_back(std::move(s));
    }
    return out;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace vibgate
