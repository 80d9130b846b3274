#pragma once

#include <filesystem>
#include <vector>

#include "vibgate/eigensolve.hpp"
#include "vibgate/molsys.hpp"

namespace vibgate::test {

/// Model system on the default grid.
const MolecularSystem& default_system();
/// Lowest 26 eigenstates of the default system, cached under the build tree.
const std::vector<EigenState>& default_states();

/// Harmonic limit of the default parameters on the wider oracle grid.
ModelParams harmonic_params();
Grid2D harmonic_grid();

/// Eigenpairs of the grid Hamiltonian for a separable potential
/// v(i, j) = a_i + b_j, built from the two 1D Fourier-grid problems.
struct GridEigenpair {
  WaveFunction psi;
  double energy;  ///< hartree
};
std::vector<GridEigenpair> separable_eigenpairs(const MolecularSystem& system, int n_r, int n_d);

/// 16 x 64 system: stiff harmonic bend (frozen in its ground state), quartic
/// stretch, dipole only along the stretch. Its lowest stretch levels form a
/// well isolated two-level system.
MolecularSystem two_level_system();

std::filesystem::path scratch_dir(const std::string& name);

}  // namespace vibgate::test
