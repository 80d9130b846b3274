#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vibgate/fft.hpp"
#include "vibgate/field.hpp"
#include "vibgate/grid.hpp"
#include "vibgate/molsys.hpp"

namespace vibgate {

/// Strang-split propagator exp(-i H dt) with H = T + V - mu * eps. A complex
/// step dt = -i tau gives the imaginary-time operator exp(-H tau).
///
/// Kinetic factors carry the 1/N of the inverse FFT. The dipole phase uses a
/// factored row/column form when mu_R depends on R only and mu_d on d only.
class SplitOperator {
 public:
  SplitOperator(const MolecularSystem& system, cplx dt_au, Polarization pol = {});

  const Grid2D& grid() const noexcept { return grid_; }
  cplx dt() const noexcept { return dt_; }
  bool separable_dipole() const noexcept { return separable_; }

  /// exp(-i T dt/2) (half) or exp(-i T dt) (full).
  void kinetic(std::span<cplx> psi, bool half) const;
  /// exp(-i V dt).
  void potential(std::span<cplx> psi) const;
  /// exp(+i mu eps dt). Real time steps only.
  void field_phase(std::span<cplx> psi, double field) const;
  /// exp(-i (V - mu eps) dt) in one pass.
  void potential_and_field(std::span<cplx> psi, double field) const;

  /// One full step: half kinetic, potential + field, half kinetic.
  void step(std::span<cplx> psi, double field) const;
  /// Consecutive steps with merged kinetic halves.
  void steps(std::span<cplx> psi, std::span<const double> fields) const;

  /// s_m = sum_x w_x theta_x^m exp(i theta_x eps) with theta_x = mu_x dt,
  /// for m = 0, 1, 2. Used by the control update.
  struct PhaseSums {
    cplx s0, s1, s2;
  };
  PhaseSums phase_sums(std::span<const cplx> w, double field) const;

 private:
  Grid2D grid_;
  cplx dt_;
  Fft2D fft_;
  std::vector<cplx> kin_half_, kin_full_, pot_;
  bool separable_ = false;
  std::vector<double> theta_;                // mu_total * dt per point
  std::vector<double> theta_r_, theta_d_;    // factored form
  mutable std::vector<cplx> row_, col_;      // phase scratch
};

enum class Direction { forward, backward };

struct PropagationOptions {
  Direction direction = Direction::forward;
  /// Record every `stride` steps (0 disables recording). The default
  /// trajectory stride is 20.
  std::size_t record_stride = 0;
  Polarization polarization{};
  double max_dt_fs = 0.25;
  double norm_tolerance = 1e-6;
  /// Steps between norm checks.
  std::size_t check_interval = 500;
};

struct PropagationResult {
  WaveFunction final_state;
  std::vector<WaveFunction> trajectory;
  std::vector<double> times_fs;
  double norm_drift = 0.0;
};

/// Propagates psi0 through the whole field. Backward propagation starts at
/// T and applies the adjoint steps in reverse order. Throws
/// InstabilityError when the norm drifts beyond tolerance and
/// DivergenceError on NaN.
PropagationResult propagate(const WaveFunction& psi0, const MolecularSystem& system,
                            const LaserField& field, const PropagationOptions& options = {});

/// Eigenstate data needed for spectral (closed form) free evolution.
struct SpectralBasis {
  std::span<const WaveFunction> states;
  std::span<const double> energies_hartree;
};

/// sum_n c_n exp(-i E_n t) phi_n.
WaveFunction free_evolve_spectral(std::span<const cplx> coeffs, const SpectralBasis& basis,
                                  double t_fs);

/// |<psi(0)|psi(t)>|^2 sampled at t = 0, dt, ..., t_max, assuming an
/// orthonormal basis. Exactly 1 at t = 0.
std::vector<double> autocorrelation(std::span<const cplx> coeffs,
                                    std::span<const double> energies_hartree, double t_max_fs,
                                    double dt_fs);

/// Complex amplitude <psi(0)|psi(t)> on the same sampling.
std::vector<cplx> autocorrelation_amplitude(std::span<const cplx> coeffs,
                                            std::span<const double> energies_hartree,
                                            double t_max_fs, double dt_fs);

/// Recurrence periods 2 pi / |E_m - E_n| (fs) for every populated pair,
/// ascending.
std::vector<double> predicted_revivals(std::span<const cplx> coeffs,
                                       std::span<const double> energies_hartree,
                                       double min_weight = 1e-6);

/// First sample time after the initial decay where the autocorrelation has
/// a local maximum above `threshold`; nullopt if none.
std::optional<double> first_revival(std::span<const double> samples, double dt_fs,
                                    double threshold = 0.99);

}  // namespace vibgate
