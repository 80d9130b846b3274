#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vibgate {

inline constexpr double kIonizationGuard = 0.05;   ///< a.u.
inline constexpr double kStrongFieldWarning = 0.0224;  ///< a.u.

/// Control field sampled once per propagation step. Sample j acts on the
/// step [j dt, (j+1) dt] and is attributed to the midpoint (j + 1/2) dt.
struct LaserField {
  double dt_fs = 0.0;
  std::vector<double> samples;  ///< a.u.

  LaserField() = default;
  LaserField(double dt, std::vector<double> values) : dt_fs(dt), samples(std::move(values)) {}

  static LaserField zeros(double dt, double duration_fs);

  std::size_t steps() const noexcept { return samples.size(); }
  double duration_fs() const noexcept { return dt_fs * static_cast<double>(samples.size()); }
  double time_fs(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * dt_fs; }
  double peak() const noexcept;
  /// Integral of the squared field, a.u. of time.
  double fluence() const noexcept;

  /// Throws ParameterError for empty, non-finite or over-guard fields.
  void validate(double guard = kIonizationGuard) const;
  /// Human-readable notes for fields above the strong-field level.
  std::vector<std::string> warnings() const;
};

// Pulse file: header line "t_fs,field_au", then one row per sample.
void write_pulse_csv(std::ostream& out, const LaserField& field);
void write_pulse_csv(const std::filesystem::path& path, const LaserField& field);
/// Throws ParseError (with line number) on malformed input.
LaserField read_pulse_csv(std::istream& in);
LaserField read_pulse_csv(const std::filesystem::path& path);

}  // namespace vibgate
