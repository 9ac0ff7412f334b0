#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "ptrm/eig.hpp"
#include "ptrm/grid.hpp"
#include "ptrm/modes.hpp"
#include "ptrm/potential.hpp"
#include "ptrm/spectral.hpp"

namespace ptrm {

/// How d^2/dx^2 is discretized in the linearization.
///  fourier: dense periodic collocation matrix on all n nodes.
///  fd:      second-order central differences on the n-1 interior nodes
///           x_1..x_{n-1}, zero (Dirichlet) at x = +-L.
enum class Discretization { fourier, fd };

inline std::string_view to_string(Discretization d) { return d == Discretization::fourier ? "fourier" : "fd"; }

inline Discretization discretization_from_string(std::string_view s) {
  if (s == "fourier") return Discretization::fourier;
  if (s == "fd") return Discretization::fd;
  throw ValidationError(fmt::format("unknown discretization '{}' (expected fourier or fd)", s));
}

enum class Stability { stable, unstable };

inline std::string_view to_string(Stability s) { return s == Stability::stable ? "stable" : "unstable"; }

inline constexpr int kMaxLinstabPoints = 2048;

/// L1 = D2 + (V+iW) + sigma|phi|^2 - lambda and L2 = D2 + (V+iW) + 3 sigma|phi|^2 - lambda
/// on the discretization's nodes.
struct LinearizationOperators {
  Eigen::MatrixXcd l1;
  Eigen::MatrixXcd l2;
  Discretization disc{Discretization::fourier};
  std::vector<double> nodes;
  double lambda{};
};

/// Dense Fourier-collocation second-derivative matrix on g (real symmetric).
inline Eigen::MatrixXd fourier_second_derivative_matrix(const Grid1D& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Spectral1D ops(g);
  Eigen::MatrixXd d2(n, n);
  Field e(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < n; ++c) {
    std::fill(e.begin(), e.end(), cplx{});
    e[static_cast<std::size_t>(c)] = 1.0;
    const Field col = ops.second_derivative(e);
    for (Eigen::Index r = 0; r < n; ++r) d2(r, c) = col[static_cast<std::size_t>(r)].real();
  }
  return d2;
}

/// Build L1 and L2 around `field` (sampled on g).
///
/// In the fourier discretization node 0 (x = -L) is the periodic seam, where
/// the odd, non-decaying W jumps from 2b tanh L to -2b tanh L. Its W entry is
/// the mean of the two one-sided values (zero for the Rosen-Morse well), which
/// keeps the discrete operator PT-symmetric. All other entries are the
/// pointwise potential.
inline LinearizationOperators build_operators(std::span<const cplx> field, const PotentialParams& p, Sigma sigma,
                                              double lambda, const Grid1D& g, Discretization disc) {
  if (field.size() != static_cast<std::size_t>(g.size())) {
    throw ValidationError(
        fmt::format("build_operators: field has {} samples, grid has {}", field.size(), g.size()));
  }
  if (g.size() > kMaxLinstabPoints) {
    throw ValidationError(
        fmt::format("build_operators: n = {} exceeds the dense solve budget {}", g.size(), kMaxLinstabPoints));
  }
  p.validate();
  if (!std::isfinite(lambda)) throw ValidationError("build_operators: lambda must be finite");

  LinearizationOperators ops;
  ops.disc = disc;
  ops.lambda = lambda;

  const std::size_t first = disc == Discretization::fourier ? 0 : 1;
  const auto m = static_cast<Eigen::Index>(field.size() - first);
  ops.nodes.assign(g.points().begin() + static_cast<std::ptrdiff_t>(first), g.points().end());

  Eigen::MatrixXd d2;
  if (disc == Discretization::fourier) {
    d2 = fourier_second_derivative_matrix(g);
  } else {
    const double h2 = g.spacing() * g.spacing();
    d2 = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      d2(i, i) = -2.0 / h2;
      if (i > 0) d2(i, i - 1) = 1.0 / h2;
      if (i + 1 < m) d2(i, i + 1) = 1.0 / h2;
    }
  }

  const double s = sign_of(sigma);
  ops.l1 = d2.cast<cplx>();
  ops.l2 = ops.l1;
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + first;
    auto pot = rosen_morse_1d(p, g[j]);
    if (disc == Discretization::fourier && j == 0) {
      pot.W = 0.5 * (pot.W + rosen_morse_1d(p, g.half_width()).W);
    }
    const cplx base(pot.V - lambda, pot.W);
    const double intensity = std::norm(field[j]);
    ops.l1(i, i) += base + s * intensity;
    ops.l2(i, i) += base + 3.0 * s * intensity;
  }
  return ops;
}

inline LinearizationOperators build_operators(const LocalizedMode& mode, const Grid1D& g, Discretization disc) {
  return build_operators(evaluate_mode(mode, g), mode.params, mode.sigma, mode.lambda, g, disc);
}

/// Growth rates eta of perturbations ~ e^{eta z}: the block problem
/// [[0, L1], [L2, 0]] (f, g) = -i eta (f, g), i.e. eta = i mu over the
/// eigenvalues mu of the block matrix.
struct StabilitySpectrum {
  std::vector<cplx> etas;  // descending Re, ties ascending Im
  double max_growth{};
  Stability classification{Stability::stable};
  double tolerance{};
};

/// Threshold for "positive real part" when none is given: 1e-6 (1 + |lambda|).
inline double default_tolerance(double lambda) { return 1e-6 * (1.0 + std::abs(lambda)); }

struct GrowthVerdict {
  double max_growth{};
  Stability classification{Stability::stable};
};

inline GrowthVerdict max_growth_rate(std::span<const cplx> etas, double tol) {
  if (!(tol > 0.0)) throw ValidationError(fmt::format("growth tolerance must be positive, got {}", tol));
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : etas) best = std::max(best, e.real());
  if (etas.empty()) best = 0.0;
  return {best, best > tol ? Stability::unstable : Stability::stable};
}

inline GrowthVerdict max_growth_rate(const StabilitySpectrum& s, double tol) { return max_growth_rate(s.etas, tol); }

inline void sort_spectrum(std::vector<cplx>& etas) {
  std::sort(etas.begin(), etas.end(), [](const cplx& l, const cplx& r) {
    if (l.real() != r.real()) return l.real() > r.real();
    return l.imag() < r.imag();
  });
}

inline StabilitySpectrum stability_spectrum(const LinearizationOperators& ops, std::optional<double> tol = {}) {
  const Eigen::Index m = ops.l1.rows();
  if (ops.l1.cols() != m || ops.l2.rows() != m || ops.l2.cols() != m) {
    throw ValidationError("stability_spectrum: L1 and L2 must be square and of equal size");
  }
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
  block.topRightCorner(m, m) = ops.l1;
  block.bottomLeftCorner(m, m) = ops.l2;

  StabilitySpectrum s;
  s.etas = eig_dense(block);
  for (auto& mu : s.etas) mu *= cplx(0.0, 1.0);
  sort_spectrum(s.etas);
  s.tolerance = tol.value_or(default_tolerance(ops.lambda));
  const auto verdict = max_growth_rate(s.etas, s.tolerance);
  s.max_growth = verdict.max_growth;
  s.classification = verdict.classification;
  return s;
}

/// Symmetries the spectrum of the block problem should have.
///  negation:    eta -> -eta, exact for any L1, L2 ((f, g) -> (f, -g)).
///  conjugation: eta -> eta*, for PT-symmetric operators with even |phi|^2.
enum class SpectrumSymmetry { negation, conjugation };

inline constexpr double kClusterRadius = 1e-4;

/// Worst relative distance between an eigenvalue cluster and the image of
/// another cluster under the symmetry: max_c min_c' |c' - S(c)| / max(1, |c|).
///
/// Eigenvalues closer than `cluster_radius` are merged and represented by
/// their mean. The zero eigenvalue of the block problem is defective
/// (L1 phi = 0), so its computed copies scatter by O(sqrt(eps)) while their
/// mean stays accurate to O(eps).
inline double pairing_defect(std::span<const cplx> etas, SpectrumSymmetry sym,
                             double cluster_radius = kClusterRadius) {
  const std::size_t n = etas.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return etas[l].real() < etas[r].real(); });

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const cplx& ea = etas[order[a]];
      const cplx& eb = etas[order[b]];
      if (eb.real() - ea.real() > cluster_radius) break;
      if (std::abs(ea - eb) < cluster_radius) parent[find(order[a])] = find(order[b]);
    }
  }
  std::vector<cplx> sum(n);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    sum[r] += etas[i];
    ++count[r];
  }
  std::vector<cplx> centroids;
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] > 0) centroids.push_back(sum[i] / static_cast<double>(count[i]));
  }

  double worst = 0.0;
  for (const auto& c : centroids) {
    const cplx image = sym == SpectrumSymmetry::negation ? -c : std::conj(c);
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& d : centroids) nearest = std::min(nearest, std::abs(d - image));
    worst = std::max(worst, nearest / std::max(1.0, std::abs(c)));
  }
  return worst;
}

}  // namespace ptrm
