#include "vibgate/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vibgate/errors.hpp"
#include "vibgate/units.hpp"

namespace vibgate {
namespace {

constexpr cplx kI{0.0, 1.0};

bool is_separable(const MolecularSystem& s) {
  const Grid2D& g = s.grid();
  for (std::size_t i = 0; i < g.n_r(); ++i)
    for (std::size_t j = 1; j < g.n_d(); ++j)
      if (s.mu_r()[g.index(i, j)] != s.mu_r()[g.index(i, 0)]) return false;
  for (std::size_t i = 1; i < g.n_r(); ++i)
    for (std::size_t j = 0; j < g.n_d(); ++j)
      if (s.mu_d()[g.index(i, j)] != s.mu_d()[g.index(0, j)]) return false;
  return true;
}

void check_state(std::span<const cplx> psi, double cell, double norm0, double tol,
                 double& drift) {
  double s = 0.0;
  for (const cplx& a : psi) s += std::norm(a);
  s *= cell;
  if (!std::isfinite(s)) throw DivergenceError("propagation produced non-finite amplitudes");
  drift = std::max(drift, std::abs(s - norm0));
  if (std::abs(s - norm0) > tol)
    throw InstabilityError("norm drifted by " + std::to_string(s - norm0) +
                           "; use a smaller time step");
}

}  // namespace

SplitOperator::SplitOperator(const MolecularSystem& system, cplx dt_au, Polarization pol)
    : grid_(system.grid()), dt_(dt_au), fft_(grid_.n_r(), grid_.n_d()) {
  const std::size_t n = grid_.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  kin_half_.resize(n);
  kin_full_.resize(n);
  pot_.resize(n);
  for (std::size_t i = 0; i < grid_.n_r(); ++i) {
    const double tr = grid_.k_r(i) * grid_.k_r(i) / (2.0 * system.mass_r());
    for (std::size_t j = 0; j < grid_.n_d(); ++j) {
      const double t = tr + grid_.k_d(j) * grid_.k_d(j) / (2.0 * system.mass_d());
      const std::size_t p = grid_.index(i, j);
      kin_half_[p] = std::exp(-kI * t * dt_ * 0.5) * inv_n;
      kin_full_[p] = std::exp(-kI * t * dt_) * inv_n;
    }
  }
  for (std::size_t p = 0; p < n; ++p) pot_[p] = std::exp(-kI * system.v()[p] * dt_);

  const double dt_real = dt_.real();
  separable_ = is_separable(system);
  if (separable_) {
    theta_r_.resize(grid_.n_r());
    theta_d_.resize(grid_.n_d());
    for (std::size_t i = 0; i < grid_.n_r(); ++i)
      theta_r_[i] = pol.r * system.mu_r()[grid_.index(i, 0)] * dt_real;
    for (std::size_t j = 0; j < grid_.n_d(); ++j)
      theta_d_[j] = pol.d * system.mu_d()[grid_.index(0, j)] * dt_real;
    row_.resize(grid_.n_r());
    col_.resize(grid_.n_d());
  } else {
    theta_.resize(n);
    for (std::size_t p = 0; p < n; ++p)
      theta_[p] = (pol.r * system.mu_r()[p] + pol.d * system.mu_d()[p]) * dt_real;
  }
}

void SplitOperator::kinetic(std::span<cplx> psi, bool half) const {
  fft_.forward(psi);
  const auto& k = half ? kin_half_ : kin_full_;
  for (std::size_t p = 0; p < psi.size(); ++p) psi[p] *= k[p];
  fft_.backward(psi);
}

void SplitOperator::potential(std::span<cplx> psi) const {
  for (std::size_t p = 0; p < psi.size(); ++p) psi[p] *= pot_[p];
}

void SplitOperator::field_phase(std::span<cplx> psi, double field) const {
  if (field == 0.0) return;
  if (separable_) {
    for (std::size_t i = 0; i < row_.size(); ++i) row_[i] = std::polar(1.0, theta_r_[i] * field);
    for (std::size_t j = 0; j < col_.size(); ++j) col_[j] = std::polar(1.0, theta_d_[j] * field);
    const std::size_t nd = col_.size();
    for (std::size_t i = 0; i < row_.size(); ++i) {
      cplx* rowp = psi.data() + i * nd;
      for (std::size_t j = 0; j < nd; ++j) rowp[j] *= row_[i] * col_[j];
    }
  } else {
    for (std::size_t p = 0; p < psi.size(); ++p) psi[p] *= std::polar(1.0, theta_[p] * field);
  }
}

void SplitOperator::potential_and_field(std::span<cplx> psi, double field) const {
  if (field == 0.0) {
    potential(psi);
    return;
  }
  if (separable_) {
    for (std::size_t i = 0; i < row_.size(); ++i) row_[i] = std::polar(1.0, theta_r_[i] * field);
    for (std::size_t j = 0; j < col_.size(); ++j) col_[j] = std::polar(1.0, theta_d_[j] * field);
    const std::size_t nd = col_.size();
    for (std::size_t i = 0; i < row_.size(); ++i) {
      cplx* rowp = psi.data() + i * nd;
      const cplx* potp = pot_.data() + i * nd;
      const cplx ri = row_[i];
      for (std::size_t j = 0; j < nd; ++j) rowp[j] *= potp[j] * (ri * col_[j]);
    }
  } else {
    for (std::size_t p = 0; p < psi.size(); ++p)
      psi[p] *= pot_[p] * std::polar(1.0, theta_[p] * field);
  }
}

void SplitOperator::step(std::span<cplx> psi, double field) const {
  kinetic(psi, true);
  potential_and_field(psi, field);
  kinetic(psi, true);
}

void SplitOperator::steps(std::span<cplx> psi, std::span<const double> fields) const {
  if (fields.empty()) return;
  kinetic(psi, true);
  for (std::size_t j = 0; j < fields.size(); ++j) {
    potential_and_field(psi, fields[j]);
    kinetic(psi, j + 1 == fields.size());
  }
}

SplitOperator::PhaseSums SplitOperator::phase_sums(std::span<const cplx> w, double field) const {
  PhaseSums out{};
  if (separable_) {
    for (std::size_t i = 0; i < row_.size(); ++i) row_[i] = std::polar(1.0, theta_r_[i] * field);
    for (std::size_t j = 0; j < col_.size(); ++j) col_[j] = std::polar(1.0, theta_d_[j] * field);
    const std::size_t nd = col_.size();
    // theta_ij = a_i + b_j, so every sum factors into row reductions.
    for (std::size_t i = 0; i < row_.size(); ++i) {
      const cplx* wp = w.data() + i * nd;
      cplx r0{}, r1{}, r2{};
      for (std::size_t j = 0; j < nd; ++j) {
        const cplx x = wp[j] * col_[j];
        const double b = theta_d_[j];
        r0 += x;
        r1 += b * x;
        r2 += (b * b) * x;
      }
      const double a = theta_r_[i];
      const cplx ai = row_[i];
      out.s0 += ai * r0;
      out.s1 += ai * (a * r0 + r1);
      out.s2 += ai * (a * a * r0 + 2.0 * a * r1 + r2);
    }
  } else {
    for (std::size_t p = 0; p < w.size(); ++p) {
      const cplx x = w[p] * std::polar(1.0, theta_[p] * field);
      out.s0 += x;
      out.s1 += theta_[p] * x;
      out.s2 += theta_[p] * theta_[p] * x;
    }
  }
  return out;
}

PropagationResult propagate(const WaveFunction& psi0, const MolecularSystem& system,
                            const LaserField& field, const PropagationOptions& options) {
  if (!(psi0.grid() == system.grid()))
    throw DimensionError("initial state is not on the system grid");
  field.validate();
  if (field.dt_fs > options.max_dt_fs + 1e-12)
    throw ParameterError("time step " + std::to_string(field.dt_fs) + " fs exceeds the " +
                         std::to_string(options.max_dt_fs) + " fs guard");
  const double norm0 = psi0.norm_squared();
  if (std::abs(norm0 - 1.0) > 1e-6) throw ParameterError("initial state must be normalized");

  const SplitOperator op(system, cplx(units::fs_to_au(field.dt_fs), 0.0),
                         options.polarization);
  const bool backward = options.direction == Direction::backward;
  std::vector<double> fields = field.samples;
  if (backward) std::reverse(fields.begin(), fields.end());

  std::vector<cplx> psi(psi0.amp().begin(), psi0.amp().end());
  // The adjoint of a real-Hamiltonian step is conj . step . conj.
  auto conjugate = [](std::vector<cplx>& v) {
    for (cplx& a : v) a = std::conj(a);
  };
  if (backward) conjugate(psi);

  PropagationResult result{psi0, {}, {}, 0.0};
  const std::size_t n = fields.size();
  const double cell = system.grid().cell();
  auto record = [&](std::size_t done) {
    std::vector<cplx> copy = psi;
    if (backward) conjugate(copy);
    result.trajectory.emplace_back(system.grid(), std::move(copy));
    const double t = static_cast<double>(done) * field.dt_fs;
    result.times_fs.push_back(backward ? field.duration_fs() - t : t);
  };
  if (options.record_stride > 0) record(0);

  const std::size_t chunk =
      options.record_stride > 0 ? options.record_stride : std::max<std::size_t>(options.check_interval, 1);
  std::size_t done = 0;
  std::size_t since_check = 0;
  while (done < n) {
    const std::size_t len = std::min(chunk, n - done);
    op.steps(psi, std::span<const double>(fields).subspan(done, len));
    done += len;
    since_check += len;
    if (since_check >= options.check_interval || done == n) {
      check_state(psi, cell, norm0, options.norm_tolerance, result.norm_drift);
      since_check = 0;
    }
    if (options.record_stride > 0) record(done);
  }
  if (backward) conjugate(psi);
  result.final_state = WaveFunction(system.grid(), std::move(psi));
  return result;
}

WaveFunction free_evolve_spectral(std::span<const cplx> coeffs, const SpectralBasis& basis,
                                  double t_fs) {
  if (coeffs.size() != basis.states.size() || coeffs.size() != basis.energies_hartree.size())
    throw DimensionError("one coefficient and energy per basis state required");
  const double t = units::fs_to_au(t_fs);
  std::vector<cplx> c(coeffs.size());
  for (std::size_t n = 0; n < c.size(); ++n)
    c[n] = coeffs[n] * std::polar(1.0, -basis.energies_hartree[n] * t);
  return superpose(basis.states, c);
}

std::vector<cplx> autocorrelation_amplitude(std::span<const cplx> coeffs,
                                            std::span<const double> energies_hartree,
                                            double t_max_fs, double dt_fs) {
  if (coeffs.size() != energies_hartree.size())
    throw DimensionError("one energy per coefficient required");
  if (!(dt_fs > 0.0) || !(t_max_fs >= 0.0)) throw ParameterError("invalid sampling");
  const auto count = static_cast<std::size_t>(std::floor(t_max_fs / dt_fs + 1e-9)) + 1;
  double total = 0.0;
  for (const cplx& c : coeffs) total += std::norm(c);
  std::vector<cplx> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double t = units::fs_to_au(static_cast<double>(s) * dt_fs);
    cplx a{};
    for (std::size_t n = 0; n < coeffs.size(); ++n)
      a += std::norm(coeffs[n]) * std::polar(1.0, -energies_hartree[n] * t);
    out[s] = a / total;
  }
  return out;
}

std::vector<double> autocorrelation(std::span<const cplx> coeffs,
                                    std::span<const double> energies_hartree, double t_max_fs,
                                    double dt_fs) {
  const auto amp = autocorrelation_amplitude(coeffs, energies_hartree, t_max_fs, dt_fs);
  std::vector<double> out(amp.size());
  for (std::size_t s = 0; s < amp.size(); ++s) out[s] = std::norm(amp[s]);
  if (!out.empty()) out[0] = 1.0;
  return out;
}

std::vector<double> predicted_revivals(std::span<const cplx> coeffs,
                                       std::span<const double> energies_hartree,
                                       double min_weight) {
  std::vector<double> out;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    if (std::norm(coeffs[m]) < min_weight) continue;
    for (std::size_t n = m + 1; n < coeffs.size(); ++n) {
      if (std::norm(coeffs[n]) < min_weight) continue;
      const double gap = std::abs(energies_hartree[n] - energies_hartree[m]);
      if (gap > 0.0) out.push_back(units::au_to_fs(2.0 * std::numbers::pi / gap));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> first_revival(std::span<const double> samples, double dt_fs,
                                    double threshold) {
  bool decayed = false;
  for (std::size_t s = 1; s + 1 < samples.size(); ++s) {
    if (samples[s] < threshold) decayed = true;
    if (decayed && samples[s] >= threshold && samples[s] >= samples[s - 1] &&
        samples[s] >= samples[s + 1])
      return static_cast<double>(s) * dt_fs;
  }
  return std::nullopt;
}

}  // namespace vibgate
