#pragma once

#include <string>
#include <vector>

#include "vibgate/grid.hpp"

namespace vibgate {

/// Parameters of the two-mode model surface. Wavenumbers are the target
/// fundamentals (0 -> 1 spacings), not harmonic frequencies.
struct ModelParams {
  double omega_r = 727.0;   ///< bending fundamental, cm^-1
  double omega_d = 3289.0;  ///< stretching fundamental, cm^-1
  double anharmonicity_r = 0.02;
  double anharmonicity_d = 0.015;
  double coupling = 0.2;            ///< hartree/bohr^4, multiplies (R-R0)^2 (d-d0)^2
  double dipole_slope_r = 1.2;      ///< a.u./bohr
  double dipole_slope_d = 0.25;     ///< a.u./bohr
  double dipole_saturation = 0.28;  ///< bohr; <= 0 gives a linear dipole
  double mass_r = 4.5 * 1822.888486;  ///< m_e
  double mass_d = 1.0 * 1822.888486;  ///< m_e

  /// Throws ParameterError for non-physical values.
  void validate() const;
};

/// Per-mode constants resolved while fitting the surface to the targets.
struct ModeFit {
  double harmonic_omega = 0.0;  ///< hartree
  double dissociation = 0.0;    ///< hartree; 0 for a harmonic mode
  double range = 0.0;           ///< Morse exponent a, 1/bohr
  double mass = 0.0;
};

/// Potential, dipole components and masses on a grid. min(v) == 0.
class MolecularSystem {
 public:
  /// Shifts v so its minimum is exactly zero. Throws DimensionError on
  /// size mismatch and ParameterError on non-finite input.
  MolecularSystem(const Grid2D& grid, std::vector<double> v, std::vector<double> mu_r,
                  std::vector<double> mu_d, double mass_r, double mass_d, double r0, double d0);

  const Grid2D& grid() const noexcept { return grid_; }
  const std::vector<double>& v() const noexcept { return v_; }
  const std::vector<double>& mu_r() const noexcept { return mu_r_; }
  const std::vector<double>& mu_d() const noexcept { return mu_d_; }
  double mass_r() const noexcept { return mass_r_; }
  double mass_d() const noexcept { return mass_d_; }
  double r0() const noexcept { return r0_; }
  double d0() const noexcept { return d0_; }

  /// Harmonic frequencies (hartree) from the curvature of v at (r0, d0).
  double harmonic_omega_r() const noexcept { return omega_r_; }
  double harmonic_omega_d() const noexcept { return omega_d_; }

  /// Minimum of v over the outermost grid rows and columns.
  double edge_potential() const;

  /// SHA-256 over grid, masses and every sampled array.
  std::string hash() const;

 private:
  Grid2D grid_;
  std::vector<double> v_, mu_r_, mu_d_;
  double mass_r_, mass_d_;
  double r0_, d0_;
  double omega_r_ = 0.0, omega_d_ = 0.0;
};

struct ModelSurface {
  MolecularSystem system;
  ModeFit bend;
  ModeFit stretch;
  /// Estimated energy of the (n_d, n_r) = (2, 2) level above the minimum.
  double highest_qubit_energy = 0.0;
};

/// Morse-type modes (quartic expansion) plus (R-R0)^2 (d-d0)^2 coupling,
/// with harmonic frequencies fitted so the fundamentals match the targets.
/// Throws ConfinementError when the grid is too small.
ModelSurface build_model_surface(const ModelParams& params, const Grid2D& grid);

inline MolecularSystem build_model(const ModelParams& params, const Grid2D& grid) {
  return build_model_surface(params, grid).system;
}

/// Default grid for the shipped acetylene-like parameters.
Grid2D default_grid(std::size_t n = 64);

/// Polarization weights on the two dipole components.
struct Polarization {
  double r = 1.0;
  double d = 1.0;
};

/// mu_R * psi and mu_d * psi.
struct DipoleProjection {
  WaveFunction mu_r_psi;
  WaveFunction mu_d_psi;
};

DipoleProjection dipole_projection(const MolecularSystem& system, const WaveFunction& psi);

/// <psi|mu_R|psi> and <psi|mu_d|psi>.
struct DipoleExpectation {
  cplx r;
  cplx d;
};

DipoleExpectation dipole_expectation(const MolecularSystem& system, const WaveFunction& psi);

/// <a| p_r mu_R + p_d mu_d |b>.
cplx dipole_matrix_element(const MolecularSystem& system, const WaveFunction& a,
                           const WaveFunction& b, Polarization pol = {});

/// Applies the kinetic plus potential operator. Used for residuals and
/// matrix elements; propagation never needs it.
WaveFunction apply_hamiltonian(const MolecularSystem& system, const WaveFunction& psi);

/// Potential surface as a real-valued snapshot (imaginary part zero).
WaveFunction potential_snapshot(const MolecularSystem& system);

}  // namespace vibgate
