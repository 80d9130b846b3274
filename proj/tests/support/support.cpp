#include "support.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#ifndef VIBGATE_TEST_CACHE
#define VIBGATE_TEST_CACHE "test_cache"
#endif

namespace vibgate::test {
namespace {

struct Modes1D {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

// Fourier-grid Hamiltonian of one coordinate: kinetic matrix from the FFT
// momenta, potential on the diagonal.
Modes1D solve_1d(const std::vector<double>& v, double mass, const std::vector<double>& k,
                 double delta) {
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXd h(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double t = 0.0;
      for (int m = 0; m < n; ++m) {
        const double km = k[static_cast<std::size_t>(m)];
        t += km * km / (2.0 * mass) * std::cos(km * (j - l) * delta);
      }
      h(j, l) = t / n + (j == l ? v[static_cast<std::size_t>(j)] : 0.0);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return {es.eigenvectors(), es.eigenvalues()};
}

}  // namespace

const MolecularSystem& default_system() {
  static const MolecularSystem s = build_model(ModelParams{}, default_grid());
  return s;
}

const std::vector<EigenState>& default_states() {
  static const std::vector<EigenState> states = [] {
    const auto& sys = default_system();
    const std::filesystem::path dir = std::filesystem::path(VIBGATE_TEST_CACHE) / "default";
    if (auto cached = load_eigenstate_cache(dir, sys.hash(), 26)) return *cached;
    auto st = relax(sys, 26);
    save_eigenstate_cache(dir, st, sys.hash());
    return st;
  }();
  return states;
}

ModelParams harmonic_params() {
  ModelParams p;
  p.anharmonicity_r = 0.0;
  p.anharmonicity_d = 0.0;
  p.coupling = 0.0;
  return p;
}

Grid2D harmonic_grid() { return Grid2D(-3.3, 3.3, 64, -1.8, 1.8, 64); }

std::vector<GridEigenpair> separable_eigenpairs(const MolecularSystem& system, int n_r, int n_d) {
  const Grid2D& g = system.grid();
  const auto& v = system.v();
  std::size_t i0 = 0, j0 = 0;
  double vmin = v[0];
  for (std::size_t i = 0; i < g.n_r(); ++i)
    for (std::size_t j = 0; j < g.n_d(); ++j)
      if (v[g.index(i, j)] < vmin) {
        vmin = v[g.index(i, j)];
        i0 = i;
        j0 = j;
      }
  std::vector<double> a(g.n_r()), b(g.n_d()), kr(g.n_r()), kd(g.n_d());
  for (std::size_t i = 0; i < g.n_r(); ++i) {
    a[i] = v[g.index(i, j0)];
    kr[i] = g.k_r(i);
  }
  for (std::size_t j = 0; j < g.n_d(); ++j) {
    b[j] = v[g.index(i0, j)] - v[g.index(i0, j0)];
    kd[j] = g.k_d(j);
  }
  const Modes1D mr = solve_1d(a, system.mass_r(), kr, g.dr());
  const Modes1D md = solve_1d(b, system.mass_d(), kd, g.dd());

  std::vector<GridEigenpair> out;
  const double norm = 1.0 / std::sqrt(g.cell());
  for (int p = 0; p < n_r; ++p)
    for (int q = 0; q < n_d; ++q) {
      WaveFunction psi(g);
      for (std::size_t i = 0; i < g.n_r(); ++i)
        for (std::size_t j = 0; j < g.n_d(); ++j)
          psi.amp()[g.index(i, j)] = mr.vectors(static_cast<int>(i), p) *
                                     md.vectors(static_cast<int>(j), q) * norm;
      out.push_back({std::move(psi), mr.values(p) + md.values(q)});
    }
  std::stable_sort(out.begin(), out.end(),
                   [](const GridEigenpair& x, const GridEigenpair& y) { return x.energy < y.energy; });
  return out;
}

MolecularSystem two_level_system() {
  const Grid2D g(-0.4, 0.4, 16, -1.6, 1.6, 64);
  const double m_r = 4.5 * units::kAmuInElectronMasses, m_d = units::kAmuInElectronMasses;
  const double w_r = 0.05, w_d = 0.015, quartic = 0.56;
  std::vector<double> v(g.size()), mu_r(g.size(), 0.0), mu_d(g.size());
  for (std::size_t i = 0; i < g.n_r(); ++i)
    for (std::size_t j = 0; j < g.n_d(); ++j) {
      const double r = g.r(i), d = g.d(j);
      v[g.index(i, j)] = 0.5 * m_r * w_r * w_r * r * r + 0.5 * m_d * w_d * w_d * d * d +
                         quartic * d * d * d * d;
      mu_d[g.index(i, j)] = d;
    }
  return MolecularSystem(g, std::move(v), std::move(mu_r), std::move(mu_d), m_r, m_d, 0.0, 0.0);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(VIBGATE_TEST_CACHE) / "scratch" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace vibgate::test
