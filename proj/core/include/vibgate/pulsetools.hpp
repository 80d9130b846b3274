#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "vibgate/field.hpp"
#include "vibgate/units.hpp"

namespace vibgate {

/// Discrete spectrum of a real field, S_m = dt * sum_j eps_j exp(-2 pi i m j / N),
/// kept for m = 0..N/2. The negative half follows by conjugate symmetry.
/// A pad factor > 1 zero-pads the samples to pad * N before transforming.
struct Spectrum {
  double dt_fs = 0.0;
  std::size_t samples = 0;  ///< unpadded length
  std::size_t length = 0;   ///< transform length
  std::vector<double> wavenumber;  ///< cm^-1
  std::vector<cplx> amplitude;     ///< a.u. field x fs

  double bin_width() const;  ///< cm^-1
  std::vector<double> magnitude() const;
  std::vector<double> phase() const;
  std::size_t peak_bin() const;
  /// Full width at half maximum of |S| (cm^-1), linearly interpolated.
  double fwhm() const;
  /// Same for |S|^2.
  double intensity_fwhm() const;
  /// sum_j eps_j^2 dt in a.u. of time, computed from the spectrum.
  double energy_au() const;
};

Spectrum spectrum(const LaserField& field, std::size_t pad = 1);
/// Inverse transform truncated to the unpadded length.
LaserField inverse(const Spectrum& s);

/// |analytic signal|, the envelope of a carrier pulse.
std::vector<double> envelope(const LaserField& field);
/// FWHM (fs) of the squared envelope.
double temporal_fwhm(const LaserField& field);

struct Spectrogram {
  std::vector<double> times_fs;
  std::vector<double> wavenumber;
  std::vector<std::vector<double>> magnitude;  ///< [time][wavenumber]
};

/// Gaussian-window short-time transform. Throws ParameterError unless
/// dt < window_fwhm_fs < T.
Spectrogram spectrogram(const LaserField& field, double window_fwhm_fs,
                        std::size_t n_times = 200, double max_wavenumber = 8000.0);

/// Cycle-averaged intensity I = c eps0 E^2 / 2 in W/cm^2.
double intensity(double field_au);

/// Transform-limited Gaussian centered at T/2. spectral_fwhm is the FWHM of
/// |S|^2; the temporal intensity FWHM follows as 0.441 / (c * spectral_fwhm).
/// Throws ParameterError when the spectrum reaches the Nyquist limit or the
/// pulse does not fit into [0, T].
LaserField fourier_limited_pulse(double center_cm, double spectral_fwhm_cm, double peak_au,
                                 double dt_fs, double duration_fs);

/// Temporal intensity FWHM (fs) of a transform-limited Gaussian.
double fourier_limited_duration(double spectral_fwhm_cm);

struct MaskFunction {
  std::size_t n_pixels = 0;
  std::vector<double> transmission;  ///< [0, 1]
  std::vector<double> phase;         ///< (-pi, pi]
  std::vector<double> pixel_center;  ///< cm^-1
  double window_lo = 0.0;            ///< cm^-1, lower edge of pixel 0
  double pixel_width = 0.0;          ///< cm^-1
  /// Target amplitude per unit shaper output: the shaped pulse equals
  /// scale * target, so 1 / scale is the required extra input energy factor
  /// in amplitude.
  double scale = 1.0;
  std::size_t pad = 8;

  std::size_t pixel_of(double wavenumber) const;
};

struct MaskOptions {
  double clip = 1e-3;          ///< reference support threshold, relative to its peak
  double target_clip = 1e-3;   ///< target support threshold, relative to its peak
  std::size_t pad = 8;         ///< zero padding of both spectra
};

/// Pixelated complex ratio target/reference over the reference's support.
/// n_pixels = 0 gives one pixel per spectral bin of the window. Throws
/// CoverageError when the target needs light the reference lacks and
/// DimensionError when the two fields are sampled differently.
MaskFunction compute_mask(const LaserField& target, const LaserField& reference,
                          std::size_t n_pixels, const MaskOptions& options = {});

/// Shaper output S_out = M * S_ref. Bins outside the window take the value
/// of the nearest edge pixel.
LaserField apply_mask(const LaserField& reference, const MaskFunction& mask);

/// Keeps only the spectral bins inside [lo, hi] cm^-1.
LaserField band_limit(const LaserField& field, double lo_cm, double hi_cm, std::size_t pad = 8);

// CSV: bin,wavenumber_cm,magnitude,phase
void write_spectrum_csv(std::ostream& out, const Spectrum& s);
// CSV: t_fs,wavenumber_cm,magnitude
void write_spectrogram_csv(std::ostream& out, const Spectrogram& s);
// CSV: pixel,wavenumber_cm,transmission,phase
void write_mask_csv(std::ostream& out, const MaskFunction& m);

}  // namespace vibgate
