#pragma once

#include <cmath>
#include <concepts>
#include <type_traits>
#include <vector>

#include <fmt/format.h>

#include "ptrm/grid.hpp"

namespace ptrm {

/// Strengths of the real (a) and imaginary (b) parts of the Rosen-Morse well.
/// Any finite pair is admissible.
struct PotentialParams {
  double a{};
  double b{};

  void validate() const {
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw ValidationError(fmt::format("potential parameters must be finite, got a={}, b={}", a, b));
    }
  }
};

/// V is the index-guiding part, W the gain/loss part of V + iW.
struct ComplexPotentialSample {
  double V{};
  double W{};
};

inline double sech2(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

/// V = -a(a+1) sech^2 x,  W = 2b tanh x.
inline ComplexPotentialSample rosen_morse_1d(const PotentialParams& p, double x) {
  return {-p.a * (p.a + 1.0) * sech2(x), 2.0 * p.b * std::tanh(x)};
}

/// Gain/loss prefactor of the 2D well. 4 is the reference literal; 2 is the
/// value compatible with the linear phase b(x + y).
inline void validate_w_scale(double w_scale) {
  if (w_scale != 2.0 && w_scale != 4.0) {
    throw ValidationError(fmt::format("w_scale must be 2 or 4, got {}", w_scale));
  }
}

/// V = 2(sech^2 x + sech^2 y) - (a^2+a+2) sech^2 x sech^2 y,
/// W = w_scale * b * (tanh x + tanh y).
inline ComplexPotentialSample rosen_morse_2d(const PotentialParams& p, double x, double y, double w_scale) {
  validate_w_scale(w_scale);
  const double sx = sech2(x), sy = sech2(y);
  const double q = p.a * p.a + p.a + 2.0;
  return {2.0 * (sx + sy) - q * sx * sy, w_scale * p.b * (std::tanh(x) + std::tanh(y))};
}

template <class F>
concept Sampler1D = std::invocable<F, double> &&
                    std::convertible_to<std::invoke_result_t<F, double>, ComplexPotentialSample>;

template <class F>
concept Sampler2D = std::invocable<F, double, double> &&
                    std::convertible_to<std::invoke_result_t<F, double, double>, ComplexPotentialSample>;

/// max_x |V(x) - V(-x)| + |W(x) + W(-x)| over the grid nodes; zero for a
/// PT-symmetric potential.
template <Sampler1D F>
double check_pt_symmetry(F&& sampler, const Grid1D& g) {
  double worst = 0.0;
  for (double x : g.points()) {
    const ComplexPotentialSample p = sampler(x);
    const ComplexPotentialSample m = sampler(-x);
    worst = std::max(worst, std::abs(p.V - m.V) + std::abs(p.W + m.W));
  }
  return worst;
}

template <Sampler2D F>
double check_pt_symmetry(F&& sampler, const Grid2D& g) {
  double worst = 0.0;
  for (double x : g.x().points()) {
    for (double y : g.y().points()) {
      const ComplexPotentialSample p = sampler(x, y);
      const ComplexPotentialSample m = sampler(-x, -y);
      worst = std::max(worst, std::abs(p.V - m.V) + std::abs(p.W + m.W));
    }
  }
  return worst;
}

/// V + iW at every node.
inline Field sample_potential(const PotentialParams& p, const Grid1D& g) {
  Field out;
  out.reserve(static_cast<std::size_t>(g.size()));
  for (double x : g.points()) {
    const auto s = rosen_morse_1d(p, x);
    out.emplace_back(s.V, s.W);
  }
  return out;
}

inline Field sample_potential(const PotentialParams& p, const Grid2D& g, double w_scale) {
  validate_w_scale(w_scale);
  Field out;
  out.reserve(g.size());
  for (double x : g.x().points()) {
    for (double y : g.y().points()) {
      const auto s = rosen_morse_2d(p, x, y, w_scale);
      out.emplace_back(s.V, s.W);
    }
  }
  return out;
}

}  // namespace ptrm
