#include "vibgate/molsys.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vibgate/errors.hpp"
#include "vibgate/fft.hpp"
#include "vibgate/hashing.hpp"

namespace vibgate {
namespace {

void require_same_grid(const MolecularSystem& s, const WaveFunction& psi) {
  if (!(s.grid() == psi.grid())) throw DimensionError("wavefunction is not on the system grid");
}

// Fourth-order expansion of the Morse oscillator, D (y^2 - y^3 + 7/12 y^4)
// with y = a q. Bound from below and confining on both sides.
double mode_potential(const ModeFit& m, double q) {
  if (m.dissociation <= 0.0) return 0.5 * m.mass * m.harmonic_omega * m.harmonic_omega * q * q;
  const double y = m.range * q;
  return m.dissociation * y * y * (1.0 - y + 7.0 / 12.0 * y * y);
}

ModeFit make_mode(double harmonic_omega, double anharmonicity, double mass) {
  ModeFit m;
  m.harmonic_omega = harmonic_omega;
  m.mass = mass;
  if (anharmonicity > 0.0) {
    m.dissociation = harmonic_omega / (4.0 * anharmonicity);
    m.range = harmonic_omega * std::sqrt(mass / (2.0 * m.dissociation));
  }
  return m;
}

double dipole(double slope, double saturation, double q) {
  if (saturation <= 0.0) return slope * q;
  const double u = q / saturation;
  return slope * q * std::exp(-u * u);
}

struct ModeLevels {
  std::array<double, 3> energy{};
  std::array<double, 3> q2{};  // <q^2> in each level
};

// Lowest three levels of a 1D mode on a Fourier grid of the given half-width.
ModeLevels solve_mode(const ModeFit& mode, double half_width) {
  constexpr std::size_t n = 128;
  const double dq = 2.0 * half_width / static_cast<double>(n);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * dq);

  // T_ij = (1/n) sum_k k^2/(2m) cos(k (q_i - q_j)); depends only on i - j.
  std::vector<double> t_row(n, 0.0);
  for (std::size_t off = 0; off < n; ++off) {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double kp = dk * (p < n / 2 ? static_cast<double>(p)
                                        : static_cast<double>(p) - static_cast<double>(n));
      s += kp * kp / (2.0 * mode.mass) *
           std::cos(2.0 * std::numbers::pi * static_cast<double>(p * off) /
                    static_cast<double>(n));
    }
    t_row[off] = s / static_cast<double>(n);
  }

  Eigen::MatrixXd h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t_row[i > j ? i - j : j - i];
  for (std::size_t i = 0; i < n; ++i) {
    const double q = -half_width + static_cast<double>(i) * dq;
    h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += mode_potential(mode, q);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  ModeLevels out;
  for (int lvl = 0; lvl < 3; ++lvl) {
    out.energy[static_cast<std::size_t>(lvl)] = es.eigenvalues()(lvl);
    double q2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double q = -half_width + static_cast<double>(i) * dq;
      const double c = es.eigenvectors()(static_cast<Eigen::Index>(i), lvl);
      q2 += c * c * q * q;
    }
    out.q2[static_cast<std::size_t>(lvl)] = q2;
  }
  return out;
}

}  // namespace

void ModelParams::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(omega_r) || !positive(omega_d)) throw ParameterError("omega_r, omega_d must be > 0");
  if (!positive(mass_r) || !positive(mass_d)) throw ParameterError("masses must be > 0");
  if (!(anharmonicity_r >= 0.0 && anharmonicity_r < 0.1) ||
      !(anharmonicity_d >= 0.0 && anharmonicity_d < 0.1))
    throw ParameterError("anharmonicities must lie in [0, 0.1)");
  if (!(coupling >= 0.0) || !std::isfinite(coupling))
    throw ParameterError("coupling must be finite and >= 0");
  if (!std::isfinite(dipole_slope_r) || !std::isfinite(dipole_slope_d) ||
      !std::isfinite(dipole_saturation))
    throw ParameterError("dipole parameters must be finite");
}

MolecularSystem::MolecularSystem(const Grid2D& grid, std::vector<double> v,
                                 std::vector<double> mu_r, std::vector<double> mu_d,
                                 double mass_r, double mass_d, double r0, double d0)
    : grid_(grid), v_(std::move(v)), mu_r_(std::move(mu_r)), mu_d_(std::move(mu_d)),
      mass_r_(mass_r), mass_d_(mass_d), r0_(r0), d0_(d0) {
  const std::size_t n = grid_.size();
  if (v_.size() != n || mu_r_.size() != n || mu_d_.size() != n)
    throw DimensionError("surface arrays do not match the grid");
  auto finite = [](const std::vector<double>& a) {
    return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(v_) || !finite(mu_r_) || !finite(mu_d_))
    throw ParameterError("surface arrays must be finite");
  if (!(mass_r > 0.0) || !(mass_d > 0.0)) throw ParameterError("masses must be > 0");

  const double vmin = *std::min_element(v_.begin(), v_.end());
  for (double& x : v_) x -= vmin;

  // Curvature at the grid point nearest to (r0, d0).
  auto nearest = [](double x, double lo, double h, std::size_t cnt) {
    const auto i = static_cast<std::ptrdiff_t>(std::lround((x - lo) / h));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 1,
                                                               static_cast<std::ptrdiff_t>(cnt) - 2));
  };
  const std::size_t ic = nearest(r0, grid_.r_min(), grid_.dr(), grid_.n_r());
  const std::size_t jc = nearest(d0, grid_.d_min(), grid_.dd(), grid_.n_d());
  const double krr = (v_[grid_.index(ic + 1, jc)] - 2.0 * v_[grid_.index(ic, jc)] +
                      v_[grid_.index(ic - 1, jc)]) / (grid_.dr() * grid_.dr());
  const double kdd = (v_[grid_.index(ic, jc + 1)] - 2.0 * v_[grid_.index(ic, jc)] +
                      v_[grid_.index(ic, jc - 1)]) / (grid_.dd() * grid_.dd());
  omega_r_ = std::sqrt(std::max(krr, 0.0) / mass_r_);
  omega_d_ = std::sqrt(std::max(kdd, 0.0) / mass_d_);
}

double MolecularSystem::edge_potential() const {
  double m = std::numeric_limits<double>::infinity();
  const std::size_t nr = grid_.n_r(), nd = grid_.n_d();
  for (std::size_t i = 0; i < nr; ++i) {
    m = std::min({m, v_[grid_.index(i, 0)], v_[grid_.index(i, nd - 1)]});
  }
  for (std::size_t j = 0; j < nd; ++j) {
    m = std::min({m, v_[grid_.index(0, j)], v_[grid_.index(nr - 1, j)]});
  }
  return m;
}

std::string MolecularSystem::hash() const {
  Sha256 h;
  const double header[] = {grid_.r_min(), grid_.r_max(), grid_.d_min(), grid_.d_max(),
                           static_cast<double>(grid_.n_r()), static_cast<double>(grid_.n_d()),
                           mass_r_, mass_d_, r0_, d0_};
  h.update_values(std::span<const double>(header));
  h.update_values(std::span<const double>(v_));
  h.update_values(std::span<const double>(mu_r_));
  h.update_values(std::span<const double>(mu_d_));
  return h.hex_digest();
}

Grid2D default_grid(std::size_t n) { return Grid2D(-2.5, 2.5, n, -1.8, 1.8, n); }

ModelSurface build_model_surface(const ModelParams& params, const Grid2D& grid) {
  params.validate();
  const double target_r = units::wavenumber_to_hartree(params.omega_r);
  const double target_d = units::wavenumber_to_hartree(params.omega_d);
  const double half_r = 0.5 * (grid.r_max() - grid.r_min());
  const double half_d = 0.5 * (grid.d_max() - grid.d_min());
  const double c = params.coupling;

  // Fit the harmonic frequencies so that the fundamentals, including the
  // first-order coupling shift, hit the targets.
  double w_r = target_r / (1.0 - 2.0 * params.anharmonicity_r);
  double w_d = target_d / (1.0 - 2.0 * params.anharmonicity_d);
  ModeFit bend = make_mode(w_r, params.anharmonicity_r, params.mass_r);
  ModeFit stretch = make_mode(w_d, params.anharmonicity_d, params.mass_d);
  ModeLevels lr, ld;
  const bool exact_harmonic =
      params.anharmonicity_r == 0.0 && params.anharmonicity_d == 0.0 && c == 0.0;
  if (exact_harmonic) {
    bend = make_mode(target_r, 0.0, params.mass_r);
    stretch = make_mode(target_d, 0.0, params.mass_d);
    for (std::size_t n = 0; n < 3; ++n) {
      const double x = static_cast<double>(n) + 0.5;
      lr.energy[n] = x * target_r;
      ld.energy[n] = x * target_d;
      lr.q2[n] = x / (params.mass_r * target_r);
      ld.q2[n] = x / (params.mass_d * target_d);
    }
  } else {
    for (int it = 0; it < 60; ++it) {
      bend = make_mode(w_r, params.anharmonicity_r, params.mass_r);
      stretch = make_mode(w_d, params.anharmonicity_d, params.mass_d);
      lr = solve_mode(bend, half_r);
      ld = solve_mode(stretch, half_d);
      const double fund_r = lr.energy[1] - lr.energy[0] + c * (lr.q2[1] - lr.q2[0]) * ld.q2[0];
      const double fund_d = ld.energy[1] - ld.energy[0] + c * (ld.q2[1] - ld.q2[0]) * lr.q2[0];
      const double fr = target_r / fund_r, fd = target_d / fund_d;
      w_r *= fr;
      w_d *= fd;
      if (std::abs(fr - 1.0) < 1e-13 && std::abs(fd - 1.0) < 1e-13) break;
    }
  }

  // n = 4 classical turning point, harmonic estimate
  auto turning4 = [](const ModeFit& m) { return std::sqrt(9.0 / (m.mass * m.harmonic_omega)); };
  if (2.0 * half_r < 6.0 * turning4(bend) || 2.0 * half_d < 6.0 * turning4(stretch))
    throw ConfinementError("grid must span at least six n=4 turning points in each mode");

  const double r0 = grid.r_center();
  const double d0 = grid.d_center();
  const std::size_t n = grid.size();
  std::vector<double> v(n), mu_r(n), mu_d(n);
  for (std::size_t i = 0; i < grid.n_r(); ++i) {
    const double qr = grid.r(i) - r0;
    const double vr = mode_potential(bend, qr);
    const double mr = dipole(params.dipole_slope_r, params.dipole_saturation, qr);
    for (std::size_t j = 0; j < grid.n_d(); ++j) {
      const double qd = grid.d(j) - d0;
      const std::size_t p = grid.index(i, j);
      v[p] = vr + mode_potential(stretch, qd) + c * qr * qr * qd * qd;
      mu_r[p] = mr;
      mu_d[p] = dipole(params.dipole_slope_d, params.dipole_saturation, qd);
    }
  }

  ModelSurface out{MolecularSystem(grid, std::move(v), std::move(mu_r), std::move(mu_d),
                                   params.mass_r, params.mass_d, r0, d0),
                   bend, stretch,
                   lr.energy[2] + ld.energy[2] + c * lr.q2[2] * ld.q2[2]};
  if (out.system.edge_potential() < 10.0 * out.highest_qubit_energy)
    throw ConfinementError("edge potential " +
                           std::to_string(units::hartree_to_wavenumber(out.system.edge_potential())) +
                           " cm^-1 is below ten times the highest qubit level");
  return out;
}

DipoleProjection dipole_projection(const MolecularSystem& system, const WaveFunction& psi) {
  require_same_grid(system, psi);
  WaveFunction a = psi, b = psi;
  auto pa = a.amp();
  auto pb = b.amp();
  for (std::size_t p = 0; p < pa.size(); ++p) {
    pa[p] *= system.mu_r()[p];
    pb[p] *= system.mu_d()[p];
  }
  return {std::move(a), std::move(b)};
}

DipoleExpectation dipole_expectation(const MolecularSystem& system, const WaveFunction& psi) {
  const auto proj = dipole_projection(system, psi);
  return {inner_product(psi, proj.mu_r_psi), inner_product(psi, proj.mu_d_psi)};
}

cplx dipole_matrix_element(const MolecularSystem& system, const WaveFunction& a,
                           const WaveFunction& b, Polarization pol) {
  require_same_grid(system, a);
  require_same_grid(system, b);
  const auto x = a.amp();
  const auto y = b.amp();
  cplx s{};
  for (std::size_t p = 0; p < x.size(); ++p)
    s += std::conj(x[p]) * y[p] * (pol.r * system.mu_r()[p] + pol.d * system.mu_d()[p]);
  return s * a.grid().cell();
}

WaveFunction apply_hamiltonian(const MolecularSystem& system, const WaveFunction& psi) {
  require_same_grid(system, psi);
  const Grid2D& g = system.grid();
  std::vector<cplx> buf(psi.amp().begin(), psi.amp().end());
  Fft2D fft(g.n_r(), g.n_d());
  fft.forward(buf);
  const double inv_n = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.n_r(); ++i) {
    const double tr = g.k_r(i) * g.k_r(i) / (2.0 * system.mass_r());
    for (std::size_t j = 0; j < g.n_d(); ++j)
      buf[g.index(i, j)] *= (tr + g.k_d(j) * g.k_d(j) / (2.0 * system.mass_d())) * inv_n;
  }
  fft.backward(buf);
  const auto src = psi.amp();
  for (std::size_t p = 0; p < buf.size(); ++p) buf[p] += system.v()[p] * src[p];
  return WaveFunction(g, std::move(buf));
}

WaveFunction potential_snapshot(const MolecularSystem& system) {
  std::vector<cplx> amp(system.v().begin(), system.v().end());
  return WaveFunction(system.grid(), std::move(amp));
}

}  // namespace vibgate
