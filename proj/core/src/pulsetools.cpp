#include "vibgate/pulsetools.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "vibgate/errors.hpp"
#include "vibgate/fft.hpp"

namespace vibgate {
namespace {

constexpr double kLightCmPerFs = units::kSpeedOfLight * 100.0 * 1e-15;
const double kGaussianTbp = 2.0 * std::numbers::ln2 / std::numbers::pi;

double wrap_phase(double p) {
  constexpr double pi = std::numbers::pi;
  p = std::remainder(p, 2.0 * pi);
  if (p <= -pi) p += 2.0 * pi;
  return p;
}

// Full-length spectrum from the kept half (conjugate symmetry).
std::vector<cplx> full_spectrum(const Spectrum& s) {
  std::vector<cplx> x(s.length);
  for (std::size_t m = 0; m < s.amplitude.size(); ++m) {
    x[m] = s.amplitude[m] / s.dt_fs;
    if (m > 0 && s.length - m != m) x[s.length - m] = std::conj(x[m]);
  }
  return x;
}

// Width at half of the peak value, interpolated between samples.
double half_width(const std::vector<double>& v, double spacing) {
  if (v.empty()) return 0.0;
  const std::size_t p = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double half = 0.5 * v[p];
  if (half <= 0.0) return 0.0;
  double left = 0.0;
  std::size_t i = p;
  while (i > 0 && v[i - 1] >= half) --i;
  if (i > 0) left = static_cast<double>(i) - (v[i] - half) / (v[i] - v[i - 1]);
  double right = static_cast<double>(v.size() - 1);
  std::size_t j = p;
  while (j + 1 < v.size() && v[j + 1] >= half) ++j;
  if (j + 1 < v.size()) right = static_cast<double>(j) + (v[j] - half) / (v[j] - v[j + 1]);
  return (right - left) * spacing;
}

void require_positive_field(const LaserField& f) {
  if (f.samples.empty() || !(f.dt_fs > 0.0)) throw ParameterError("empty field");
}

}  // namespace

double Spectrum::bin_width() const {
  return 1.0 / (static_cast<double>(length) * dt_fs * kLightCmPerFs);
}

std::vector<double> Spectrum::magnitude() const {
  std::vector<double> m(amplitude.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(amplitude[i]);
  return m;
}

std::vector<double> Spectrum::phase() const {
  std::vector<double> p(amplitude.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = wrap_phase(std::arg(amplitude[i]));
  return p;
}

std::size_t Spectrum::peak_bin() const {
  const auto m = magnitude();
  return static_cast<std::size_t>(std::max_element(m.begin(), m.end()) - m.begin());
}

double Spectrum::fwhm() const { return half_width(magnitude(), bin_width()); }

double Spectrum::intensity_fwhm() const {
  auto m = magnitude();
  for (double& x : m) x *= x;
  return half_width(m, bin_width());
}

double Spectrum::energy_au() const {
  double sum = 0.0;
  for (std::size_t m = 0; m < amplitude.size(); ++m) {
    const bool single = m == 0 || 2 * m == length;
    sum += (single ? 1.0 : 2.0) * std::norm(amplitude[m]);
  }
  return sum / (dt_fs * dt_fs) * units::fs_to_au(dt_fs) / static_cast<double>(length);
}

Spectrum spectrum(const LaserField& field, std::size_t pad) {
  require_positive_field(field);
  if (pad == 0) throw ParameterError("pad factor must be positive");
  Spectrum s;
  s.dt_fs = field.dt_fs;
  s.samples = field.samples.size();
  s.length = s.samples * pad;
  std::vector<cplx> x(s.length);
  std::copy(field.samples.begin(), field.samples.end(), x.begin());
  Fft1D(s.length).forward(x);
  const std::size_t kept = s.length / 2 + 1;
  s.amplitude.resize(kept);
  s.wavenumber.resize(kept);
  const double w = s.bin_width();
  for (std::size_t m = 0; m < kept; ++m) {
    s.amplitude[m] = x[m] * s.dt_fs;
    s.wavenumber[m] = static_cast<double>(m) * w;
  }
  return s;
}

LaserField inverse(const Spectrum& s) {
  std::vector<cplx> x = full_spectrum(s);
  Fft1D(s.length).backward(x);
  std::vector<double> out(s.samples);
  const double inv = 1.0 / static_cast<double>(s.length);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = x[j].real() * inv;
  return {s.dt_fs, std::move(out)};
}

std::vector<double> envelope(const LaserField& field) {
  require_positive_field(field);
  const std::size_t n = field.samples.size();
  std::vector<cplx> x(field.samples.begin(), field.samples.end());
  Fft1D fft(n);
  fft.forward(x);
  for (std::size_t m = 1; m < n; ++m) {
    if (2 * m < n) x[m] *= 2.0;
    else if (2 * m > n) x[m] = 0.0;
  }
  fft.backward(x);
  std::vector<double> env(n);
  for (std::size_t j = 0; j < n; ++j) env[j] = std::abs(x[j]) / static_cast<double>(n);
  return env;
}

double temporal_fwhm(const LaserField& field) {
  auto env = envelope(field);
  for (double& e : env) e *= e;
  return half_width(env, field.dt_fs);
}

Spectrogram spectrogram(const LaserField& field, double window_fwhm_fs, std::size_t n_times,
                        double max_wavenumber) {
  require_positive_field(field);
  const double duration = field.duration_fs();
  if (!(window_fwhm_fs > field.dt_fs && window_fwhm_fs < duration))
    throw ParameterError("spectrogram window must lie between dt and the pulse duration");
  if (n_times == 0) throw ParameterError("spectrogram needs at least one time slice");

  const std::size_t n = field.samples.size();
  const double bin = 1.0 / (static_cast<double>(n) * field.dt_fs * kLightCmPerFs);
  const std::size_t kept =
      std::min(n / 2 + 1, static_cast<std::size_t>(max_wavenumber / bin) + 1);
  Spectrogram out;
  for (std::size_t m = 0; m < kept; ++m) out.wavenumber.push_back(static_cast<double>(m) * bin);

  const double a = 4.0 * std::numbers::ln2 / (window_fwhm_fs * window_fwhm_fs);
  Fft1D fft(n);
  std::vector<cplx> x(n);
  for (std::size_t i = 0; i < n_times; ++i) {
    const double tc = (static_cast<double>(i) + 0.5) * duration / static_cast<double>(n_times);
    for (std::size_t j = 0; j < n; ++j) {
      const double dt = field.time_fs(j) - tc;
      x[j] = field.samples[j] * std::exp(-a * dt * dt);
    }
    fft.forward(x);
    std::vector<double> row(kept);
    for (std::size_t m = 0; m < kept; ++m) row[m] = std::abs(x[m]) * field.dt_fs;
    out.times_fs.push_back(tc);
    out.magnitude.push_back(std::move(row));
  }
  return out;
}

double intensity(double field_au) {
  if (field_au < 0.0 || !std::isfinite(field_au))
    throw ParameterError("field amplitude must be non-negative");
  const double e = field_au * units::kAuFieldInVPerM;
  return 0.5 * units::kSpeedOfLight * units::kVacuumPermittivity * e * e * 1e-4;
}

double fourier_limited_duration(double spectral_fwhm_cm) {
  if (!(spectral_fwhm_cm > 0.0)) throw ParameterError("spectral FWHM must be positive");
  return kGaussianTbp / (kLightCmPerFs * spectral_fwhm_cm);
}

LaserField fourier_limited_pulse(double center_cm, double spectral_fwhm_cm, double peak_au,
                                 double dt_fs, double duration_fs) {
  if (!(dt_fs > 0.0) || !(duration_fs > dt_fs)) throw ParameterError("invalid time grid");
  if (center_cm < 0.0) throw ParameterError("center wavenumber must be non-negative");
  const double tau = fourier_limited_duration(spectral_fwhm_cm);
  const double nyquist = 1.0 / (2.0 * dt_fs * kLightCmPerFs);
  if (center_cm + 3.0 * spectral_fwhm_cm >= nyquist)
    throw ParameterError("pulse spectrum reaches the Nyquist limit " + std::to_string(nyquist) +
                         " cm^-1 of dt");
  const double a = 2.0 * std::numbers::ln2 / (tau * tau);
  const double t0 = 0.5 * duration_fs;
  if (peak_au * std::exp(-a * t0 * t0) > 1e-6 * std::abs(peak_au))
    throw ParameterError("pulse of " + std::to_string(tau) + " fs does not fit the time window");

  LaserField f = LaserField::zeros(dt_fs, duration_fs);
  const double w = 2.0 * std::numbers::pi * kLightCmPerFs * center_cm;
  for (std::size_t j = 0; j < f.samples.size(); ++j) {
    const double t = f.time_fs(j) - t0;
    f.samples[j] = peak_au * std::exp(-a * t * t) * std::cos(w * t);
  }
  return f;
}

std::size_t MaskFunction::pixel_of(double wavenumber) const {
  const double p = std::floor((wavenumber - window_lo) / pixel_width);
  if (p <= 0.0) return 0;
  return std::min(n_pixels - 1, static_cast<std::size_t>(p));
}

MaskFunction compute_mask(const LaserField& target, const LaserField& reference,
                          std::size_t n_pixels, const MaskOptions& options) {
  require_positive_field(target);
  require_positive_field(reference);
  if (target.samples.size() != reference.samples.size() ||
      std::abs(target.dt_fs - reference.dt_fs) > 1e-12 * reference.dt_fs)
    throw DimensionError("target and reference must share dt and length");

  const Spectrum st = spectrum(target, options.pad);
  const Spectrum sr = spectrum(reference, options.pad);
  const auto mt = st.magnitude();
  const auto mr = sr.magnitude();
  const double ref_floor = options.clip * *std::max_element(mr.begin(), mr.end());
  const double tgt_floor = options.target_clip * *std::max_element(mt.begin(), mt.end());
  if (!(ref_floor > 0.0) || !(tgt_floor > 0.0)) throw ParameterError("zero field in mask input");

  std::size_t first = mr.size(), last = 0;
  for (std::size_t m = 0; m < mr.size(); ++m)
    if (mr[m] >= ref_floor) {
      first = std::min(first, m);
      last = m;
    }

  double bad_lo = -1.0, bad_hi = -1.0;
  for (std::size_t m = 0; m < mt.size(); ++m) {
    if (mt[m] < tgt_floor || mr[m] >= ref_floor) continue;
    if (bad_lo < 0.0) bad_lo = st.wavenumber[m];
    bad_hi = st.wavenumber[m];
  }
  if (bad_lo >= 0.0) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "target needs light at %.1f-%.1f cm^-1 outside the reference",
                  bad_lo, bad_hi);
    throw CoverageError(msg, bad_lo, bad_hi);
  }

  MaskFunction mask;
  mask.pad = options.pad;
  const double bin = sr.bin_width();
  mask.n_pixels = n_pixels == 0 ? last - first + 1 : n_pixels;
  mask.window_lo = sr.wavenumber[first] - 0.5 * bin;
  mask.pixel_width =
      (sr.wavenumber[last] - sr.wavenumber[first] + bin) / static_cast<double>(mask.n_pixels);

  std::vector<cplx> sum(mask.n_pixels, 0.0);
  std::vector<std::size_t> count(mask.n_pixels, 0);
  for (std::size_t m = first; m <= last; ++m) {
    if (mr[m] < ref_floor) continue;
    const std::size_t p = mask.pixel_of(sr.wavenumber[m]);
    sum[p] += st.amplitude[m] / sr.amplitude[m];
    ++count[p];
  }
  double largest = 0.0;
  for (std::size_t p = 0; p < mask.n_pixels; ++p) {
    if (count[p] > 0) sum[p] /= static_cast<double>(count[p]);
    largest = std::max(largest, std::abs(sum[p]));
  }
  if (!(largest > 0.0)) throw ParameterError("target has no spectral weight in the window");

  mask.scale = 1.0 / largest;
  for (std::size_t p = 0; p < mask.n_pixels; ++p) {
    mask.transmission.push_back(std::min(1.0, std::abs(sum[p]) * mask.scale));
    mask.phase.push_back(count[p] > 0 ? wrap_phase(std::arg(sum[p])) : 0.0);
    mask.pixel_center.push_back(mask.window_lo + (static_cast<double>(p) + 0.5) * mask.pixel_width);
  }
  return mask;
}

LaserField apply_mask(const LaserField& reference, const MaskFunction& mask) {
  if (mask.n_pixels == 0 || mask.transmission.size() != mask.n_pixels ||
      mask.phase.size() != mask.n_pixels)
    throw ParameterError("malformed mask");
  Spectrum s = spectrum(reference, mask.pad);
  for (std::size_t m = 0; m < s.amplitude.size(); ++m) {
    const std::size_t p = mask.pixel_of(s.wavenumber[m]);
    s.amplitude[m] *= std::polar(mask.transmission[p], mask.phase[p]);
  }
  return inverse(s);
}

LaserField band_limit(const LaserField& field, double lo_cm, double hi_cm, std::size_t pad) {
  Spectrum s = spectrum(field, pad);
  for (std::size_t m = 0; m < s.amplitude.size(); ++m)
    if (s.wavenumber[m] < lo_cm || s.wavenumber[m] > hi_cm) s.amplitude[m] = 0.0;
  return inverse(s);
}

void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
  const auto mag = s.magnitude();
  const auto ph = s.phase();
  char buf[160];
  out << "bin,wavenumber_cm,magnitude,phase\n";
  for (std::size_t m = 0; m < mag.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", m, s.wavenumber[m], mag[m], ph[m]);
    out << buf;
  }
}

void write_spectrogram_csv(std::ostream& out, const Spectrogram& s) {
  char buf[128];
  out << "t_fs,wavenumber_cm,magnitude\n";
  for (std::size_t i = 0; i < s.times_fs.size(); ++i)
    for (std::size_t m = 0; m < s.wavenumber.size(); ++m) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", s.times_fs[i], s.wavenumber[m],
                    s.magnitude[i][m]);
      out << buf;
    }
}

void write_mask_csv(std::ostream& out, const MaskFunction& m) {
  char buf[160];
  out << "pixel,wavenumber_cm,transmission,phase\n";
  for (std::size_t p = 0; p < m.n_pixels; ++p) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", p, m.pixel_center[p],
                  m.transmission[p], m.phase[p]);
    out << buf;
  }
}

}  // namespace vibgate
