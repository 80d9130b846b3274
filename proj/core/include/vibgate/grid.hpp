#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "vibgate/units.hpp"

namespace vibgate {

/// Uniform two-coordinate grid. R (bending) is the slow index, d
/// (stretching) the fast one; flat index = i_r * n_d + i_d.
class Grid2D {
 public:
  /// Throws ParameterError unless both counts are powers of two >= 16 and
  /// both extents are positive.
  Grid2D(double r_min, double r_max, std::size_t n_r, double d_min, double d_max,
         std::size_t n_d);

  double r_min() const noexcept { return r_min_; }
  double r_max() const noexcept { return r_max_; }
  double d_min() const noexcept { return d_min_; }
  double d_max() const noexcept { return d_max_; }
  std::size_t n_r() const noexcept { return n_r_; }
  std::size_t n_d() const noexcept { return n_d_; }
  std::size_t size() const noexcept { return n_r_ * n_d_; }

  double dr() const noexcept { return (r_max_ - r_min_) / static_cast<double>(n_r_); }
  double dd() const noexcept { return (d_max_ - d_min_) / static_cast<double>(n_d_); }
  /// Quadrature weight of one grid cell.
  double cell() const noexcept { return dr() * dd(); }

  double r(std::size_t i) const noexcept { return r_min_ + static_cast<double>(i) * dr(); }
  double d(std::size_t j) const noexcept { return d_min_ + static_cast<double>(j) * dd(); }
  /// Grid point nearest to the middle of each axis.
  double r_center() const noexcept { return r(n_r_ / 2); }
  double d_center() const noexcept { return d(n_d_ / 2); }

  /// Momenta in FFT ordering: k[0] = 0, k[n/2] = -pi/delta.
  double k_r(std::size_t i) const noexcept;
  double k_d(std::size_t j) const noexcept;

  std::size_t index(std::size_t i_r, std::size_t i_d) const noexcept { return i_r * n_d_ + i_d; }

  bool operator==(const Grid2D&) const = default;

 private:
  double r_min_, r_max_;
  double d_min_, d_max_;
  std::size_t n_r_, n_d_;
};

/// Complex amplitudes on a grid; |amp|^2 * cell integrates to the norm.
class WaveFunction {
 public:
  explicit WaveFunction(const Grid2D& grid);
  /// Throws DimensionError on size mismatch and ParameterError on
  /// non-finite amplitudes.
  WaveFunction(const Grid2D& grid, std::vector<cplx> amp);

  static WaveFunction sample(const Grid2D& grid,
                             const std::function<cplx(double r, double d)>& f);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<const cplx> amp() const noexcept { return amp_; }
  std::span<cplx> amp() noexcept { return amp_; }
  cplx operator()(std::size_t i_r, std::size_t i_d) const { return amp_[grid_.index(i_r, i_d)]; }

  double norm_squared() const noexcept;
  double norm() const noexcept;
  /// Throws ParameterError for the zero function.
  void normalize();
  bool is_finite() const noexcept;

  WaveFunction& operator+=(const WaveFunction& other);
  WaveFunction& operator-=(const WaveFunction& other);
  WaveFunction& operator*=(cplx s) noexcept;

 private:
  Grid2D grid_;
  std::vector<cplx> amp_;
};

WaveFunction operator*(cplx s, WaveFunction psi);
WaveFunction operator+(WaveFunction a, const WaveFunction& b);

/// sum conj(a) * b * cell. Throws DimensionError when the grids differ.
cplx inner_product(const WaveFunction& a, const WaveFunction& b);

/// Linear combination sum_n c_n * basis_n.
WaveFunction superpose(std::span<const WaveFunction> basis, std::span<const cplx> coeffs);

/// Momentum-space amplitudes in FFT ordering, normalized so that
/// sum |amp|^2 dk_r dk_d equals the position-space norm.
struct MomentumAmplitudes {
  Grid2D grid;
  std::vector<cplx> amp;

  double dk_r() const noexcept;
  double dk_d() const noexcept;
  double norm_squared() const noexcept;
};

MomentumAmplitudes to_momentum(const WaveFunction& psi);
WaveFunction from_momentum(const MomentumAmplitudes& phi);

/// Probability in the outermost `margin` rows/columns of the grid.
double edge_density(const WaveFunction& psi, std::size_t margin = 2);

// Snapshot format: "VGWF", u32 version, u64 n_r, u64 n_d, f64 r_min, r_max,
// d_min, d_max, then n_r*n_d interleaved (re, im) f64, all little-endian.
void write_snapshot(std::ostream& out, const WaveFunction& psi);
WaveFunction read_snapshot(std::istream& in);
void write_snapshot(const std::filesystem::path& path, const WaveFunction& psi);
WaveFunction read_snapshot(const std::filesystem::path& path);

}  // namespace vibgate
