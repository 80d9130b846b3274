#include "vibgate/grid.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "vibgate/errors.hpp"
#include "vibgate/fft.hpp"

namespace vibgate {
namespace {

bool valid_count(std::size_t n) { return n >= 16 && std::has_single_bit(n); }

double fft_momentum(std::size_t i, std::size_t n, double delta) {
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * delta);
  const auto signed_i = static_cast<std::ptrdiff_t>(i);
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  return dk * static_cast<double>(signed_i < half ? signed_i
                                                  : signed_i - static_cast<std::ptrdiff_t>(n));
}

void require_same_grid(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid() == b.grid())) throw DimensionError("wavefunctions live on different grids");
}

}  // namespace

Grid2D::Grid2D(double r_min, double r_max, std::size_t n_r, double d_min, double d_max,
               std::size_t n_d)
    : r_min_(r_min), r_max_(r_max), d_min_(d_min), d_max_(d_max), n_r_(n_r), n_d_(n_d) {
  if (!valid_count(n_r) || !valid_count(n_d))
    throw ParameterError("grid point counts must be powers of two >= 16");
  if (!(r_max > r_min) || !(d_max > d_min) || !std::isfinite(r_max - r_min) ||
      !std::isfinite(d_max - d_min))
    throw ParameterError("grid extents must be finite and increasing");
}

double Grid2D::k_r(std::size_t i) const noexcept { return fft_momentum(i, n_r_, dr()); }
double Grid2D::k_d(std::size_t j) const noexcept { return fft_momentum(j, n_d_, dd()); }

WaveFunction::WaveFunction(const Grid2D& grid) : grid_(grid), amp_(grid.size()) {}

WaveFunction::WaveFunction(const Grid2D& grid, std::vector<cplx> amp)
    : grid_(grid), amp_(std::move(amp)) {
  if (amp_.size() != grid_.size())
    throw DimensionError("amplitude count does not match the grid");
  if (!is_finite()) throw ParameterError("wavefunction amplitudes must be finite");
}

WaveFunction WaveFunction::sample(const Grid2D& grid,
                                  const std::function<cplx(double, double)>& f) {
  std::vector<cplx> amp(grid.size());
  for (std::size_t i = 0; i < grid.n_r(); ++i)
    for (std::size_t j = 0; j < grid.n_d(); ++j) amp[grid.index(i, j)] = f(grid.r(i), grid.d(j));
  return WaveFunction(grid, std::move(amp));
}

double WaveFunction::norm_squared() const noexcept {
  double s = 0.0;
  for (const cplx& a : amp_) s += std::norm(a);
  return s * grid_.cell();
}

double WaveFunction::norm() const noexcept { return std::sqrt(norm_squared()); }

void WaveFunction::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw ParameterError("cannot normalize the zero function");
  const double inv = 1.0 / n;
  for (cplx& a : amp_) a *= inv;
}

bool WaveFunction::is_finite() const noexcept {
  return std::all_of(amp_.begin(), amp_.end(), [](const cplx& a) {
    return std::isfinite(a.real()) && std::isfinite(a.imag());
  });
}

WaveFunction& WaveFunction::operator+=(const WaveFunction& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < amp_.size(); ++n) amp_[n] += other.amp_[n];
  return *this;
}

WaveFunction& WaveFunction::operator-=(const WaveFunction& other) {
  require_same_grid(*this, other);
  for (std::size_t n = 0; n < amp_.size(); ++n) amp_[n] -= other.amp_[n];
  return *this;
}

WaveFunction& WaveFunction::operator*=(cplx s) noexcept {
  for (cplx& a : amp_) a *= s;
  return *this;
}

WaveFunction operator*(cplx s, WaveFunction psi) {
  psi *= s;
  return psi;
}

WaveFunction operator+(WaveFunction a, const WaveFunction& b) {
  a += b;
  return a;
}

cplx inner_product(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a, b);
  const auto x = a.amp();
  const auto y = b.amp();
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    // conj(x) * y, expanded to keep the loop vectorizable
    re += x[n].real() * y[n].real() + x[n].imag() * y[n].imag();
    im += x[n].real() * y[n].imag() - x[n].imag() * y[n].real();
  }
  return cplx(re, im) * a.grid().cell();
}

WaveFunction superpose(std::span<const WaveFunction> basis, std::span<const cplx> coeffs) {
  if (basis.empty() || basis.size() != coeffs.size())
    throw DimensionError("superpose needs one coefficient per basis function");
  WaveFunction out(basis.front().grid());
  for (std::size_t n = 0; n < basis.size(); ++n) {
    if (!(basis[n].grid() == out.grid())) throw DimensionError("basis grids differ");
    if (coeffs[n] == cplx{}) continue;
    auto dst = out.amp();
    const auto src = basis[n].amp();
    for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += coeffs[n] * src[p];
  }
  return out;
}

double MomentumAmplitudes::dk_r() const noexcept {
  return 2.0 * std::numbers::pi / (static_cast<double>(grid.n_r()) * grid.dr());
}

double MomentumAmplitudes::dk_d() const noexcept {
  return 2.0 * std::numbers::pi / (static_cast<double>(grid.n_d()) * grid.dd());
}

double MomentumAmplitudes::norm_squared() const noexcept {
  double s = 0.0;
  for (const cplx& a : amp) s += std::norm(a);
  return s * dk_r() * dk_d();
}

MomentumAmplitudes to_momentum(const WaveFunction& psi) {
  const Grid2D& g = psi.grid();
  MomentumAmplitudes out{g, std::vector<cplx>(psi.amp().begin(), psi.amp().end())};
  Fft2D(g.n_r(), g.n_d()).forward(out.amp);
  const double scale = g.cell() / (2.0 * std::numbers::pi);
  for (cplx& a : out.amp) a *= scale;
  return out;
}

WaveFunction from_momentum(const MomentumAmplitudes& phi) {
  const Grid2D& g = phi.grid;
  std::vector<cplx> amp = phi.amp;
  Fft2D(g.n_r(), g.n_d()).backward(amp);
  const double scale =
      2.0 * std::numbers::pi / (g.cell() * static_cast<double>(g.size()));
  for (cplx& a : amp) a *= scale;
  return WaveFunction(g, std::move(amp));
}

double edge_density(const WaveFunction& psi, std::size_t margin) {
  const Grid2D& g = psi.grid();
  margin = std::min({margin, g.n_r() / 2, g.n_d() / 2});
  double s = 0.0;
  for (std::size_t i = 0; i < g.n_r(); ++i) {
    const bool edge_row = i < margin || i >= g.n_r() - margin;
    for (std::size_t j = 0; j < g.n_d(); ++j) {
      if (edge_row || j < margin || j >= g.n_d() - margin) s += std::norm(psi(i, j));
    }
  }
  return s * g.cell();
}

namespace {

constexpr std::array<char, 4> kMagic{'V', 'G', 'W', 'F'};
constexpr std::uint32_t kSnapshotVersion = 1;

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little_endian(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated wavefunction snapshot", 0);
  return to_little_endian(v);
}

}  // namespace

void write_snapshot(std::ostream& out, const WaveFunction& psi) {
  const Grid2D& g = psi.grid();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint64_t>(out, g.n_r());
  put<std::uint64_t>(out, g.n_d());
  put<double>(out, g.r_min());
  put<double>(out, g.r_max());
  put<double>(out, g.d_min());
  put<double>(out, g.d_max());
  for (const cplx& a : psi.amp()) {
    put<double>(out, a.real());
    put<double>(out, a.imag());
  }
}

WaveFunction read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ParseError("not a wavefunction snapshot", 0);
  if (get<std::uint32_t>(in) != kSnapshotVersion)
    throw ParseError("unsupported snapshot version", 0);
  const auto n_r = get<std::uint64_t>(in);
  const auto n_d = get<std::uint64_t>(in);
  const double r_min = get<double>(in), r_max = get<double>(in);
  const double d_min = get<double>(in), d_max = get<double>(in);
  Grid2D grid(r_min, r_max, n_r, d_min, d_max, n_d);
  std::vector<cplx> amp(grid.size());
  for (cplx& a : amp) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    a = {re, im};
  }
  return WaveFunction(grid, std::move(amp));
}

void write_snapshot(const std::filesystem::path& path, const WaveFunction& psi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_snapshot(out, psi);
}

WaveFunction read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace vibgate
