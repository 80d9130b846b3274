#include "vibgate/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vibgate {
namespace {

// The FFTW planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// ESTIMATE keeps plans (and therefore rounding) identical across runs.
constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

fftw_complex* as_fftw(std::span<cplx> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace

Fft2D::Fft2D(std::size_t n_r, std::size_t n_d) : n_r_(n_r), n_d_(n_d) {
  std::vector<cplx> scratch(n_r * n_d);
  std::lock_guard lock(planner_mutex());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fwd_ = fftw_plan_dft_2d(static_cast<int>(n_r), static_cast<int>(n_d), buf, buf, FFTW_FORWARD,
                          kPlanFlags);
  bwd_ = fftw_plan_dft_2d(static_cast<int>(n_r), static_cast<int>(n_d), buf, buf, FFTW_BACKWARD,
                          kPlanFlags);
  if (!fwd_ || !bwd_) throw std::runtime_error("FFTW failed to create a 2D plan");
}

Fft2D::~Fft2D() {
  std::lock_guard lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(fwd_);
  if (bwd_) fftw_destroy_plan(bwd_);
}

Fft2D::Fft2D(Fft2D&& other) noexcept
    : n_r_(other.n_r_), n_d_(other.n_d_),
      fwd_(std::exchange(other.fwd_, nullptr)),
      bwd_(std::exchange(other.bwd_, nullptr)) {}

Fft2D& Fft2D::operator=(Fft2D&& other) noexcept {
  if (this != &other) {
    std::swap(n_r_, other.n_r_);
    std::swap(n_d_, other.n_d_);
    std::swap(fwd_, other.fwd_);
    std::swap(bwd_, other.bwd_);
  }
  return *this;
}

void Fft2D::forward(std::span<cplx> data) const {
  fftw_execute_dft(fwd_, as_fftw(data), as_fftw(data));
}

void Fft2D::backward(std::span<cplx> data) const {
  fftw_execute_dft(bwd_, as_fftw(data), as_fftw(data));
}

Fft1D::Fft1D(std::size_t n) : n_(n) {
  std::vector<cplx> scratch(n);
  std::lock_guard lock(planner_mutex());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, kPlanFlags);
  bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, kPlanFlags);
  if (!fwd_ || !bwd_) throw std::runtime_error("FFTW failed to create a 1D plan");
}

Fft1D::~Fft1D() {
  std::lock_guard lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(fwd_);
  if (bwd_) fftw_destroy_plan(bwd_);
}

void Fft1D::forward(std::span<cplx> data) const {
  fftw_execute_dft(fwd_, as_fftw(data), as_fftw(data));
}

void Fft1D::backward(std::span<cplx> data) const {
  fftw_execute_dft(bwd_, as_fftw(data), as_fftw(data));
}

}  // namespace vibgate
