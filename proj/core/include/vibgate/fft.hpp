#pragma once

#include <cstddef>
#include <span>

#include "vibgate/units.hpp"

typedef struct fftw_plan_s* fftw_plan;

namespace vibgate {

/// In-place unnormalized 2D complex FFT of a row-major n_r x n_d array.
/// backward(forward(x)) == n_r * n_d * x.
class Fft2D {
 public:
  Fft2D(std::size_t n_r, std::size_t n_d);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;
  Fft2D(Fft2D&& other) noexcept;
  Fft2D& operator=(Fft2D&& other) noexcept;

  void forward(std::span<cplx> data) const;
  void backward(std::span<cplx> data) const;
  std::size_t size() const noexcept { return n_r_ * n_d_; }

 private:
  std::size_t n_r_ = 0, n_d_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

/// 1D complex FFT, same conventions.
class Fft1D {
 public:
  explicit Fft1D(std::size_t n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;

  void forward(std::span<cplx> data) const;
  void backward(std::span<cplx> data) const;
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace vibgate
