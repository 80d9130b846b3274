#pragma once

// Atomic units are used internally (hbar = m_e = e = a0 = 1). Public
// interfaces speak cm^-1 for energies, fs for times and a.u. for fields.

#include <complex>
#include <numbers>

namespace vibgate {

using cplx = std::complex<double>;

namespace units {

inline constexpr double kHartreeInWavenumbers = 219474.6313;
inline constexpr double kAuTimeInFs = 0.02418884;
inline constexpr double kAuFieldInVPerM = 5.14221e11;
inline constexpr double kSpeedOfLight = 299792458.0;      // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kAmuInElectronMasses = 1822.888486;

constexpr double wavenumber_to_hartree(double cm) { return cm / kHartreeInWavenumbers; }
constexpr double hartree_to_wavenumber(double eh) { return eh * kHartreeInWavenumbers; }
constexpr double fs_to_au(double fs) { return fs / kAuTimeInFs; }
constexpr double au_to_fs(double au) { return au * kAuTimeInFs; }

/// Angular frequency (a.u.) of a wavenumber: omega = E/hbar.
constexpr double wavenumber_to_angular_au(double cm) { return wavenumber_to_hartree(cm); }

/// Converts an angular frequency in rad/fs to cm^-1.
constexpr double angular_per_fs_to_wavenumber(double w) {
  return w / (2.0 * std::numbers::pi * kSpeedOfLight * 100.0 * 1e-15);
}

constexpr double wavenumber_to_angular_per_fs(double cm) {
  return cm * 2.0 * std::numbers::pi * kSpeedOfLight * 100.0 * 1e-15;
}

}  // namespace units
}  // namespace vibgate
