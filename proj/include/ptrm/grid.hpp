#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "ptrm/error.hpp"

namespace ptrm {

using cplx = std::complex<double>;
using Field = std::vector<cplx>;

/// Uniform periodic grid on [-L, L) with an even number of nodes.
///
/// Nodes are x_j = L (2j - n) / n, which puts x_0 = -L and x_{n/2} = 0
/// exactly and makes x_{n-j} = -x_j bitwise. Node 0 is its own mirror
/// under the periodic identification -L ~ L.
class Grid1D {
 public:
  Grid1D(double half_width, int n) : half_width_(half_width), n_(n) {
    if (!std::isfinite(half_width) || half_width <= 0.0) {
      throw ValidationError(fmt::format("grid half-width must be positive and finite, got {}", half_width));
    }
    if (n < 8) {
      throw ValidationError(fmt::format("grid needs at least 8 points, got {}", n));
    }
    if (n % 2 != 0) {
      throw ValidationError(fmt::format("grid point count must be even, got {}", n));
    }
    dx_ = 2.0 * half_width / n;
    points_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      points_[static_cast<std::size_t>(j)] = half_width * static_cast<double>(2 * j - n) / n;
    }
  }

  double half_width() const { return half_width_; }
  int size() const { return n_; }
  double spacing() const { return dx_; }
  double period() const { return 2.0 * half_width_; }
  double operator[](std::size_t j) const { return points_[j]; }
  std::span<const double> points() const { return points_; }

  /// Index of the node at -x_j modulo the period.
  std::size_t mirror(std::size_t j) const {
    const auto n = static_cast<std::size_t>(n_);
    return (n - j) % n;
  }
  std::size_t origin() const { return static_cast<std::size_t>(n_ / 2); }

 private:
  double half_width_;
  int n_;
  double dx_{};
  std::vector<double> points_;
};

/// Tensor-product grid. Fields on it are stored row-major with y fastest:
/// value(ix, iy) lives at ix * ny + iy.
class Grid2D {
 public:
  Grid2D(Grid1D x_axis, Grid1D y_axis) : x_(std::move(x_axis)), y_(std::move(y_axis)) {}

  const Grid1D& x() const { return x_; }
  const Grid1D& y() const { return y_; }
  std::size_t nx() const { return static_cast<std::size_t>(x_.size()); }
  std::size_t ny() const { return static_cast<std::size_t>(y_.size()); }
  std::size_t size() const { return nx() * ny(); }
  std::size_t index(std::size_t ix, std::size_t iy) const { return ix * ny() + iy; }
  std::size_t mirror(std::size_t k) const {
    return index(x_.mirror(k / ny()), y_.mirror(k % ny()));
  }
  std::size_t origin() const { return index(x_.origin(), y_.origin()); }
  double cell_area() const { return x_.spacing() * y_.spacing(); }

 private:
  Grid1D x_;
  Grid1D y_;
};

inline Grid1D make_grid(double half_width, int n) { return Grid1D(half_width, n); }

inline Grid2D make_grid_2d(double half_width, int n) {
  return Grid2D(Grid1D(half_width, n), Grid1D(half_width, n));
}

/// Angular wavenumbers in FFT order: m * pi / L for m = 0..n/2-1, then m = -n/2..-1.
inline std::vector<double> wavenumbers(const Grid1D& g) {
  const int n = g.size();
  const double dk = std::numbers::pi / g.half_width();
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    const int mm = m < n / 2 ? m : m - n;
    k[static_cast<std::size_t>(m)] = dk * mm;
  }
  return k;
}

/// Largest |f| over the boundary nodes relative to the largest |f| overall.
/// Returns 0 for the zero field.
inline double boundary_fraction(std::span<const cplx> f, const Grid1D& g) {
  double peak = 0.0;
  for (const auto& v : f) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  const auto n = static_cast<std::size_t>(g.size());
  return std::max(std::abs(f[0]), std::abs(f[n - 1])) / peak;
}

inline double boundary_fraction(std::span<const cplx> f, const Grid2D& g) {
  double peak = 0.0;
  for (const auto& v : f) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  const std::size_t nx = g.nx(), ny = g.ny();
  for (std::size_t ix = 0; ix < nx; ++ix) {
    edge = std::max({edge, std::abs(f[g.index(ix, 0)]), std::abs(f[g.index(ix, ny - 1)])});
  }
  for (std::size_t iy = 0; iy < ny; ++iy) {
    edge = std::max({edge, std::abs(f[g.index(0, iy)]), std::abs(f[g.index(nx - 1, iy)])});
  }
  return edge / peak;
}

/// C-infinity cutoff: 1 for |x| <= 0.55 L, 0 for |x| >= 0.95 L, and the
/// e^{-1/t} smooth step in between. Multiplying a decayed field by it before
/// spectral differentiation removes the seam jump of non-periodic phases
/// without touching values on |x| <= L/2.
inline constexpr double kTaperFlat = 0.55;
inline constexpr double kTaperZero = 0.95;

inline double interior_taper(double x, double half_width) {
  const double t = (std::abs(x) / half_width - kTaperFlat) / (kTaperZero - kTaperFlat);
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double rise = std::exp(-1.0 / t);
  const double fall = std::exp(-1.0 / (1.0 - t));
  return fall / (rise + fall);
}

/// Relative boundary level below which a field counts as decayed.
inline constexpr double kDecayThreshold = 1e-6;

template <class G>
void require_decayed(std::span<const cplx> f, const G& g, const char* what) {
  const double frac = boundary_fraction(f, g);
  if (frac > kDecayThreshold) {
    throw DecayError(fmt::format("{}: field is not decayed at the boundary (|f|/max|f| = {:.3e} > {:.0e})",
                                 what, frac, kDecayThreshold));
  }
}

}  // namespace ptrm
