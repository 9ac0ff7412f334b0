#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "ptrm/grid.hpp"

namespace ptrm {

namespace detail {

// FFTW's planner is not reentrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

}  // namespace detail

/// Out-of-place complex DFT pair (forward unnormalized, inverse scaled by 1/N)
/// of a fixed 1D or 2D shape. Owns its FFTW plans and work buffers.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : FftPlan(std::vector<int>{static_cast<int>(n)}) {}
  FftPlan(std::size_t n0, std::size_t n1)
      : FftPlan(std::vector<int>{static_cast<int>(n0), static_cast<int>(n1)}) {}

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  ~FftPlan() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  std::size_t size() const { return size_; }

  void forward(std::span<const cplx> in, std::span<cplx> out) { run(forward_, in, out, 1.0); }
  void inverse(std::span<const cplx> in, std::span<cplx> out) {
    run(inverse_, in, out, 1.0 / static_cast<double>(size_));
  }

 private:
  explicit FftPlan(std::vector<int> shape) {
    size_ = 1;
    for (int d : shape) size_ *= static_cast<std::size_t>(d);
    in_.reset(fftw_alloc_complex(size_));
    out_.reset(fftw_alloc_complex(size_));
    std::lock_guard lock(detail::fftw_planner_mutex());
    const int rank = static_cast<int>(shape.size());
    forward_ = fftw_plan_dft(rank, shape.data(), in_.get(), out_.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft(rank, shape.data(), in_.get(), out_.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  void run(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out, double scale) {
    auto* buf_in = reinterpret_cast<cplx*>(in_.get());
    auto* buf_out = reinterpret_cast<const cplx*>(out_.get());
    std::copy(in.begin(), in.end(), buf_in);
    fftw_execute(plan);
    for (std::size_t i = 0; i < size_; ++i) out[i] = buf_out[i] * scale;
  }

  std::size_t size_{};
  std::unique_ptr<fftw_complex[], detail::FftwFree> in_;
  std::unique_ptr<fftw_complex[], detail::FftwFree> out_;
  fftw_plan forward_{};
  fftw_plan inverse_{};
};

/// Fourier-collocation derivatives on a periodic 1D grid.
class Spectral1D {
 public:
  explicit Spectral1D(const Grid1D& g) : plan_(static_cast<std::size_t>(g.size())), k_(ptrm::wavenumbers(g)) {}

  const std::vector<double>& wavenumbers() const { return k_; }
  FftPlan& plan() { return plan_; }

  /// d^2/dx^2, multiplying by -k^2 in transform space (Nyquist mode included).
  Field second_derivative(std::span<const cplx> f) {
    Field hat(f.size());
    plan_.forward(f, hat);
    for (std::size_t m = 0; m < hat.size(); ++m) hat[m] *= -k_[m] * k_[m];
    Field out(f.size());
    plan_.inverse(hat, out);
    return out;
  }

  /// d/dx, multiplying by ik; the Nyquist mode is dropped so that real input
  /// stays real.
  Field first_derivative(std::span<const cplx> f) {
    Field hat(f.size());
    plan_.forward(f, hat);
    const std::size_t nyquist = hat.size() / 2;
    for (std::size_t m = 0; m < hat.size(); ++m) {
      hat[m] = m == nyquist ? cplx{} : hat[m] * cplx(0.0, k_[m]);
    }
    Field out(f.size());
    plan_.inverse(hat, out);
    return out;
  }

 private:
  FftPlan plan_;
  std::vector<double> k_;
};

/// Fourier-collocation Laplacian and gradient on a periodic 2D grid.
class Spectral2D {
 public:
  explicit Spectral2D(const Grid2D& g)
      : nx_(g.nx()), ny_(g.ny()), plan_(g.nx(), g.ny()), kx_(ptrm::wavenumbers(g.x())), ky_(ptrm::wavenumbers(g.y())) {}

  const std::vector<double>& kx() const { return kx_; }
  const std::vector<double>& ky() const { return ky_; }
  FftPlan& plan() { return plan_; }

  Field laplacian(std::span<const cplx> f) {
    Field hat(f.size());
    plan_.forward(f, hat);
    for (std::size_t ix = 0; ix < nx_; ++ix) {
      for (std::size_t iy = 0; iy < ny_; ++iy) {
        hat[ix * ny_ + iy] *= -(kx_[ix] * kx_[ix] + ky_[iy] * ky_[iy]);
      }
    }
    Field out(f.size());
    plan_.inverse(hat, out);
    return out;
  }

  /// Returns (d/dx f, d/dy f).
  std::pair<Field, Field> gradient(std::span<const cplx> f) {
    Field hat(f.size());
    plan_.forward(f, hat);
    Field hx(f.size()), hy(f.size());
    for (std::size_t ix = 0; ix < nx_; ++ix) {
      for (std::size_t iy = 0; iy < ny_; ++iy) {
        const std::size_t k = ix * ny_ + iy;
        hx[k] = ix == nx_ / 2 ? cplx{} : hat[k] * cplx(0.0, kx_[ix]);
        hy[k] = iy == ny_ / 2 ? cplx{} : hat[k] * cplx(0.0, ky_[iy]);
      }
    }
    Field dx(f.size()), dy(f.size());
    plan_.inverse(hx, dx);
    plan_.inverse(hy, dy);
    return {std::move(dx), std::move(dy)};
  }

 private:
  std::size_t nx_, ny_;
  FftPlan plan_;
  std::vector<double> kx_, ky_;
};

}  // namespace ptrm
