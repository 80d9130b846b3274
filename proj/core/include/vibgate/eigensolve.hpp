#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vibgate/grid.hpp"
#include "vibgate/molsys.hpp"

namespace vibgate {

struct Quanta {
  int n_r = 0;
  int n_d = 0;
  bool operator==(const Quanta&) const = default;
};

struct EigenState {
  WaveFunction psi;
  double energy = 0.0;          ///< cm^-1 above the potential minimum
  double energy_hartree = 0.0;
  Quanta quanta;
  double confidence = 0.0;      ///< largest squared product-basis overlap
  std::size_t index = 0;
  double residual = 0.0;        ///< ||(H - E) phi||, hartree
};

struct RelaxConfig {
  double tau_fs = 0.1;
  double min_tau_fs = 0.1 / 256.0;
  /// Cap on imaginary-time steps, per state in the sequential stage and in
  /// total for the block refinement.
  std::size_t max_steps = 200000;
  double energy_tolerance = 1e-10;  ///< hartree per step
  double residual_tolerance = 1e-6; ///< hartree
  /// Extra vectors carried through refinement to speed up the top states.
  std::size_t guard_states = 3;
  /// Relative amplitude of seeded noise added to the harmonic guesses.
  double perturbation = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Lowest n_states eigenstates by imaginary-time relaxation with
/// Gram-Schmidt projection, followed by diagonalization of H in the relaxed
/// basis and block refinement until every residual meets tolerance.
///
/// Throws ConvergenceError (with the worst residual) when max_steps is
/// exhausted and SpectrumExhaustedError when a requested state lies above
/// the edge potential.
std::vector<EigenState> relax(const MolecularSystem& system, std::size_t n_states,
                              const RelaxConfig& cfg = {});

/// Largest-overlap separable product state. The basis functions are the
/// eigenfunctions of the two 1D cuts through (r0, d0), which are the
/// harmonic oscillator functions when the modes are harmonic.
struct Assignment {
  Quanta quanta;
  double confidence = 0.0;
};

Assignment try_assign_quanta(const WaveFunction& psi, const MolecularSystem& system,
                             int n_max = 15);
/// Throws AmbiguousAssignmentError when the confidence is below 0.5.
Quanta assign_quanta(const EigenState& state, const MolecularSystem& system);

/// Normalized 1D harmonic oscillator eigenfunction of order n at q for
/// m * omega = m_omega.
double hermite_function(int n, double m_omega, double q);

/// Index of the state carrying the given quanta, if present.
std::optional<std::size_t> find_state(const std::vector<EigenState>& states, Quanta q);

std::vector<double> energies_hartree(const std::vector<EigenState>& states);
std::vector<WaveFunction> wavefunctions(const std::vector<EigenState>& states);

// Cache layout: manifest.json (energies, quanta, confidences, residuals,
// system hash) plus state_NNN.vgwf snapshots.
void save_eigenstate_cache(const std::filesystem::path& dir,
                           const std::vector<EigenState>& states,
                           const std::string& system_hash);
/// Returns nullopt when the cache is missing, holds fewer than n_states
/// states, or was built for a different system.
std::optional<std::vector<EigenState>> load_eigenstate_cache(const std::filesystem::path& dir,
                                                             const std::string& system_hash,
                                                             std::size_t n_states);

}  // namespace vibgate
