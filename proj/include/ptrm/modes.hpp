#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "ptrm/grid.hpp"
#include "ptrm/potential.hpp"
#include "ptrm/spectral.hpp"

namespace ptrm {

/// Sign of the Kerr term: +1 self-focusing, -1 self-defocusing.
enum class Sigma : int { focusing = 1, defocusing = -1 };

inline double sign_of(Sigma s) { return static_cast<double>(static_cast<int>(s)); }

inline Sigma sigma_from_int(int s) {
  if (s == 1) return Sigma::focusing;
  if (s == -1) return Sigma::defocusing;
  throw ValidationError(fmt::format("sigma must be +1 or -1, got {}", s));
}

/// Which (W prefactor, propagation constant) pair a 2D mode uses.
/// `paper` is (4, 2 - 4b^2), kept as the reference literal; `derived` is
/// (2, 2 - 2b^2), the pair for which phase b(x+y) actually solves the
/// stationary system.
enum class ModeVariant { paper, derived };

inline std::string_view to_string(ModeVariant v) { return v == ModeVariant::paper ? "paper" : "derived"; }

inline ModeVariant variant_from_string(std::string_view s) {
  if (s == "paper") return ModeVariant::paper;
  if (s == "derived") return ModeVariant::derived;
  throw ValidationError(fmt::format("unknown mode variant '{}' (expected paper or derived)", s));
}

/// Closed-form stationary solution Psi = phi e^{i lambda z} with
///   1D: phi(x)   = A sech x e^{i k x}
///   2D: phi(x,y) = A sech x sech y e^{i k (x + y)}
/// where k is `phase_slope`.
struct LocalizedMode {
  int dimension{1};
  PotentialParams params;
  Sigma sigma{Sigma::focusing};
  cplx amplitude;
  double phase_slope{};
  double lambda{};
  std::optional<double> w_scale;  // 2D only
  /// Literal reference form that does not solve the stationary equation;
  /// its residual is reported, not hidden.
  bool paper_literal{false};
};

/// a^2 + a + 2, the squared amplitude of every closed-form mode; >= 7/4.
inline double amplitude_squared(double a) { return a * a + a + 2.0; }

/// Self-focusing 1D mode: A = sqrt(a^2+a+2), slope b, lambda = 1 - b^2.
inline LocalizedMode focusing_mode_1d(const PotentialParams& p) {
  p.validate();
  return {1, p, Sigma::focusing, cplx(std::sqrt(amplitude_squared(p.a)), 0.0), p.b, 1.0 - p.b * p.b,
          std::nullopt, false};
}

/// Self-defocusing 1D mode taken literally: A = sqrt(-(a^2+a+2)) = i sqrt(a^2+a+2).
/// This does not satisfy the modulus nonlinearity (the cubic balance needs
/// sigma |A|^2 = a^2+a+2), hence `paper_literal`.
inline LocalizedMode defocusing_mode_1d(const PotentialParams& p) {
  p.validate();
  return {1, p, Sigma::defocusing, cplx(0.0, std::sqrt(amplitude_squared(p.a))), p.b, 1.0 - p.b * p.b,
          std::nullopt, true};
}

inline LocalizedMode mode_1d(const PotentialParams& p, Sigma s) {
  return s == Sigma::focusing ? focusing_mode_1d(p) : defocusing_mode_1d(p);
}

inline LocalizedMode mode_2d(const PotentialParams& p, ModeVariant variant) {
  p.validate();
  LocalizedMode m{2, p, Sigma::focusing, cplx(std::sqrt(amplitude_squared(p.a)), 0.0), p.b, 0.0, 0.0, false};
  if (variant == ModeVariant::paper) {
    m.lambda = 2.0 - 4.0 * p.b * p.b;
    m.w_scale = 4.0;
    m.paper_literal = true;
  } else {
    m.lambda = 2.0 - 2.0 * p.b * p.b;
    m.w_scale = 2.0;
  }
  return m;
}

/// Bound-state levels of the linear well,
///   lambda_n = -(a - n)^2 + b^2 / (a - n)^2,  n = 0, 1, ..., n < a.
struct LinearSpectrum {
  PotentialParams params;
  std::vector<double> levels;

  bool all_positive() const {
    for (double l : levels) {
      if (!(l > 0.0)) return false;
    }
    return true;
  }
};

inline constexpr double kPoleGuard = 1e-12;

inline LinearSpectrum linear_spectrum(const PotentialParams& p) {
  p.validate();
  LinearSpectrum s{p, {}};
  for (int n = 0; static_cast<double>(n) < p.a; ++n) {
    const double d = p.a - n;
    if (std::abs(d) < kPoleGuard) {
      throw PoleError(fmt::format("linear level n={} sits on the pole a - n = 0 (a={})", n, p.a));
    }
    const double d2 = d * d;
    s.levels.push_back(-d2 + p.b * p.b / d2);
  }
  return s;
}

inline Field evaluate_mode(const LocalizedMode& m, const Grid1D& g) {
  if (m.dimension != 1) {
    throw ValidationError(fmt::format("cannot evaluate a {}D mode on a 1D grid", m.dimension));
  }
  Field f;
  f.reserve(static_cast<std::size_t>(g.size()));
  for (double x : g.points()) {
    f.push_back(m.amplitude * (1.0 / std::cosh(x)) * std::polar(1.0, m.phase_slope * x));
  }
  return f;
}

inline Field evaluate_mode(const LocalizedMode& m, const Grid2D& g) {
  if (m.dimension != 2) {
    throw ValidationError(fmt::format("cannot evaluate a {}D mode on a 2D grid", m.dimension));
  }
  Field f;
  f.reserve(g.size());
  for (double x : g.x().points()) {
    for (double y : g.y().points()) {
      const double envelope = 1.0 / (std::cosh(x) * std::cosh(y));
      f.push_back(m.amplitude * envelope * std::polar(1.0, m.phase_slope * (x + y)));
    }
  }
  return f;
}

/// sup over |x| <= L/2 of |phi'' + (V + iW) phi + sigma |phi|^2 phi - lambda phi|,
/// with phi'' taken by Fourier collocation of interior_taper * phi. Throws
/// DecayError if the field is not decayed at the boundary.
///
/// The taper matters for modes with a linear phase: e^{ibx} does not wrap
/// around, and the untapered seam jump (about 2|A| sech L) leaks into every
/// node of the collocation derivative at O(jump / L).
inline double residual_norm(std::span<const cplx> field, const PotentialParams& p, Sigma sigma, double lambda,
                            const Grid1D& g) {
  if (field.size() != static_cast<std::size_t>(g.size())) {
    throw ValidationError("residual_norm: field size does not match the grid");
  }
  require_decayed(field, g, "residual_norm");
  Field tapered(field.begin(), field.end());
  for (std::size_t j = 0; j < tapered.size(); ++j) tapered[j] *= interior_taper(g[j], g.half_width());
  Spectral1D ops(g);
  const Field d2 = ops.second_derivative(tapered);
  const double s = sign_of(sigma);
  const double half = 0.5 * g.half_width();
  double worst = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double x = g[j];
    if (std::abs(x) > half) continue;
    const auto pot = rosen_morse_1d(p, x);
    const cplx phi = field[j];
    const cplx r = d2[j] + cplx(pot.V, pot.W) * phi + s * std::norm(phi) * phi - lambda * phi;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// 2D analogue on the interior square max(|x|,|y|) <= L/2.
inline double residual_norm(std::span<const cplx> field, const PotentialParams& p, Sigma sigma, double lambda,
                            const Grid2D& g, double w_scale) {
  if (field.size() != g.size()) {
    throw ValidationError("residual_norm: field size does not match the grid");
  }
  validate_w_scale(w_scale);
  require_decayed(field, g, "residual_norm");
  Field tapered(field.begin(), field.end());
  for (std::size_t k = 0; k < tapered.size(); ++k) {
    tapered[k] *= interior_taper(g.x()[k / g.ny()], g.x().half_width()) *
                  interior_taper(g.y()[k % g.ny()], g.y().half_width());
  }
  Spectral2D ops(g);
  const Field lap = ops.laplacian(tapered);
  const double s = sign_of(sigma);
  const double hx = 0.5 * g.x().half_width(), hy = 0.5 * g.y().half_width();
  double worst = 0.0;
  for (std::size_t ix = 0; ix < g.nx(); ++ix) {
    const double x = g.x()[ix];
    if (std::abs(x) > hx) continue;
    for (std::size_t iy = 0; iy < g.ny(); ++iy) {
      const double y = g.y()[iy];
      if (std::abs(y) > hy) continue;
      const std::size_t k = g.index(ix, iy);
      const auto pot = rosen_morse_2d(p, x, y, w_scale);
      const cplx phi = field[k];
      const cplx r = lap[k] + cplx(pot.V, pot.W) * phi + s * std::norm(phi) * phi - lambda * phi;
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

inline double residual_norm(const LocalizedMode& m, const Grid1D& g) {
  return residual_norm(evaluate_mode(m, g), m.params, m.sigma, m.lambda, g);
}

inline double residual_norm(const LocalizedMode& m, const Grid2D& g) {
  return residual_norm(evaluate_mode(m, g), m.params, m.sigma, m.lambda, g, m.w_scale.value_or(4.0));
}

/// JSON record {dimension, a, b, sigma, amplitude_re, amplitude_im,
/// phase_slope, lambda, w_scale, paper_literal}; w_scale is null in 1D.
inline nlohmann::json to_json(const LocalizedMode& m) {
  nlohmann::json j;
  j["dimension"] = m.dimension;
  j["a"] = m.params.a;
  j["b"] = m.params.b;
  j["sigma"] = static_cast<int>(m.sigma);
  j["amplitude_re"] = m.amplitude.real();
  j["amplitude_im"] = m.amplitude.imag();
  j["phase_slope"] = m.phase_slope;
  j["lambda"] = m.lambda;
  j["w_scale"] = m.w_scale ? nlohmann::json(*m.w_scale) : nlohmann::json(nullptr);
  j["paper_literal"] = m.paper_literal;
  return j;
}

inline LocalizedMode mode_from_json(const nlohmann::json& j) {
  LocalizedMode m;
  m.dimension = j.at("dimension").get<int>();
  m.params = {j.at("a").get<double>(), j.at("b").get<double>()};
  m.sigma = sigma_from_int(j.at("sigma").get<int>());
  m.amplitude = {j.at("amplitude_re").get<double>(), j.at("amplitude_im").get<double>()};
  m.phase_slope = j.at("phase_slope").get<double>();
  m.lambda = j.at("lambda").get<double>();
  if (!j.at("w_scale").is_null()) m.w_scale = j.at("w_scale").get<double>();
  m.paper_literal = j.at("paper_literal").get<bool>();
  return m;
}

}  // namespace ptrm
