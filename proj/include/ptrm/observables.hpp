#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ptrm/grid.hpp"
#include "ptrm/potential.hpp"
#include "ptrm/spectral.hpp"

namespace ptrm {

/// Integral of |f|^2 by the periodic trapezoid rule.
inline double power(std::span<const cplx> field, const Grid1D& g) {
  double sum = 0.0;
  for (const auto& v : field) sum += std::norm(v);
  return sum * g.spacing();
}

inline double power(std::span<const cplx> field, const Grid2D& g) {
  double sum = 0.0;
  for (const auto& v : field) sum += std::norm(v);
  return sum * g.cell_area();
}

/// Transverse power flow S = (i/2)(phi phi*_x - phi* phi_x) = Im(phi* phi_x).
inline std::vector<double> poynting_1d(std::span<const cplx> field, const Grid1D& g) {
  require_decayed(field, g, "poynting_1d");
  Spectral1D ops(g);
  const Field dphi = ops.first_derivative(field);
  std::vector<double> s(field.size());
  for (std::size_t j = 0; j < field.size(); ++j) s[j] = std::imag(std::conj(field[j]) * dphi[j]);
  return s;
}

/// Components of the 2D power-flow vector at every node.
struct FlowField2D {
  std::vector<double> x;
  std::vector<double> y;
};

/// S = (i/2)(Psi grad Psi* - Psi* grad Psi) = Im(Psi* grad Psi).
inline FlowField2D poynting_2d(std::span<const cplx> field, const Grid2D& g) {
  require_decayed(field, g, "poynting_2d");
  Spectral2D ops(g);
  const auto [dx, dy] = ops.gradient(field);
  FlowField2D s{std::vector<double>(field.size()), std::vector<double>(field.size())};
  for (std::size_t k = 0; k < field.size(); ++k) {
    const cplx c = std::conj(field[k]);
    s.x[k] = std::imag(c * dx[k]);
    s.y[k] = std::imag(c * dy[k]);
  }
  return s;
}

/// Closed form of the 1D flow of the focusing mode, b (a^2+a+2) sech^2 x.
inline double poynting_1d_closed_form(const PotentialParams& p, double x) {
  return p.b * (p.a * p.a + p.a + 2.0) * sech2(x);
}

/// Flow of the 2D mode from the general definition, |phi|^2 grad(theta) =
/// b (a^2+a+2) sech^2 x sech^2 y (1, 1). Both components are equal.
inline double poynting_2d_closed_form(const PotentialParams& p, double x, double y) {
  return p.b * (p.a * p.a + p.a + 2.0) * sech2(x) * sech2(y);
}

/// Separable 2D flow b (a^2+a+2) (sech^2 x, sech^2 y), the reference closed form
/// kept for comparison; it agrees with the general definition only where
/// sech^2 y = 1 (resp. x).
inline std::pair<double, double> poynting_2d_separable(const PotentialParams& p, double x, double y) {
  const double q = p.b * (p.a * p.a + p.a + 2.0);
  return {q * sech2(x), q * sech2(y)};
}

}  // namespace ptrm
