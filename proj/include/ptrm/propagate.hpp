#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "ptrm/grid.hpp"
#include "ptrm/modes.hpp"
#include "ptrm/observables.hpp"
#include "ptrm/potential.hpp"
#include "ptrm/spectral.hpp"

namespace ptrm {

struct PropagationConfig {
  double dz = 1e-3;
  double z_end = 1.0;
  int record_stride = 100;
  /// Absorbing layer thickness as a fraction of L, on both sides.
  double absorber_width = 0.1;
  /// Damping rate at the outer edge; e^{-10} ~ 4.5e-5 per unit z.
  double absorber_strength = 10.0;
  /// Initial noise, relative to max|initial field|.
  double noise_amplitude = 0.0;
  std::uint64_t seed = 1;
  bool keep_snapshots = true;

  void validate() const {
    if (!(dz > 0.0) || !std::isfinite(dz)) throw ValidationError(fmt::format("dz must be positive, got {}", dz));
    if (!(z_end >= dz) || !std::isfinite(z_end)) {
      throw ValidationError(fmt::format("z_end must be at least dz, got z_end={} dz={}", z_end, dz));
    }
    if (record_stride < 1) throw ValidationError(fmt::format("record_stride must be >= 1, got {}", record_stride));
    if (!(absorber_width >= 0.0 && absorber_width < 0.5)) {
      throw ValidationError(fmt::format("absorber_width must lie in [0, 0.5), got {}", absorber_width));
    }
    if (!(absorber_strength >= 0.0) || !std::isfinite(absorber_strength)) {
      throw ValidationError(fmt::format("absorber_strength must be >= 0, got {}", absorber_strength));
    }
    if (!(noise_amplitude >= 0.0) || !std::isfinite(noise_amplitude)) {
      throw ValidationError(fmt::format("noise_amplitude must be >= 0, got {}", noise_amplitude));
    }
  }
};

struct Snapshot {
  double z{};
  Field field;
};

/// Diagnostics recorded every `record_stride` steps (and at z = 0 and the
/// final step). All series have the same length.
struct Trajectory {
  int dimension{1};
  std::vector<double> z;
  std::vector<double> power;
  std::vector<double> peak_intensity;
  std::vector<double> boundary_mass;  // fraction of power inside the absorber
  std::vector<Snapshot> snapshots;
  bool blew_up{false};
  std::optional<double> blowup_z;
  std::uint64_t seed{};
  double cell_measure{};      // dx or dx*dy
  std::size_t origin_index{};
};

/// Peak intensity growth beyond which a run is declared blown up.
inline constexpr double kBlowupFactor = 1e6;

namespace detail {

// Raised-cosine ramp: 0 inside |x| <= L(1-w), rising to 1 at |x| = L.
inline double absorber_ramp(double x, double half_width, double width_fraction) {
  if (width_fraction <= 0.0) return 0.0;
  const double zone = width_fraction * half_width;
  const double depth = std::abs(x) - (half_width - zone);
  if (depth <= 0.0) return 0.0;
  const double t = std::min(depth / zone, 1.0);
  return 0.5 * (1.0 - std::cos(std::numbers::pi * t));
}

inline bool in_absorber(double x, double half_width, double width_fraction) {
  return width_fraction > 0.0 && std::abs(x) > half_width * (1.0 - width_fraction);
}

// Precomputed per-node and per-mode factors of one Strang step.
struct StepTables {
  std::vector<double> potential_real;   // V
  std::vector<double> half_gain;        // e^{-W dz/2}
  std::vector<double> nonlinear_time;   // (1 - e^{-2 W h}) / (2W), -> h as W -> 0
  std::vector<double> mask;             // e^{-strength * ramp * dz}
  std::vector<char> absorber;
  std::vector<cplx> kinetic;            // e^{-i k^2 dz}
};

inline void fill_local(StepTables& t, double V, double W, double h) {
  t.potential_real.push_back(V);
  t.half_gain.push_back(std::exp(-W * h));
  const double wh = W * h;
  t.nonlinear_time.push_back(std::abs(wh) < 1e-12 ? h : -std::expm1(-2.0 * wh) / (2.0 * W));
}

inline Trajectory run_split_step(Field psi, const StepTables& t, FftPlan& fft, double sigma, double h,
                                 const PropagationConfig& cfg, double measure, std::size_t origin) {
  Trajectory traj;
  traj.seed = cfg.seed;
  traj.cell_measure = measure;
  traj.origin_index = origin;

  const std::size_t n = psi.size();
  auto record = [&](double z) {
    double total = 0.0, edge = 0.0, peak = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double I = std::norm(psi[j]);
      total += I;
      peak = std::max(peak, I);
      if (t.absorber[j]) edge += I;
    }
    traj.z.push_back(z);
    traj.power.push_back(total * measure);
    traj.peak_intensity.push_back(peak);
    traj.boundary_mass.push_back(total > 0.0 ? edge / total : 0.0);
    if (cfg.keep_snapshots) traj.snapshots.push_back({z, psi});
  };
  auto local = [&]() {
    for (std::size_t j = 0; j < n; ++j) {
      const double phase = t.potential_real[j] * h + sigma * std::norm(psi[j]) * t.nonlinear_time[j];
      psi[j] *= t.half_gain[j] * std::polar(1.0, phase);
    }
  };

  record(0.0);
  const double initial_peak = traj.peak_intensity.front();
  const auto steps = static_cast<long>(std::llround(cfg.z_end / cfg.dz));
  Field hat(n);
  for (long step = 1; step <= steps; ++step) {
    local();
    fft.forward(psi, hat);
    for (std::size_t m = 0; m < n; ++m) hat[m] *= t.kinetic[m];
    fft.inverse(hat, psi);
    local();
    double peak = 0.0;
    bool finite = true;
    for (std::size_t j = 0; j < n; ++j) {
      psi[j] *= t.mask[j];
      const double I = std::norm(psi[j]);
      finite = finite && std::isfinite(I);
      peak = std::max(peak, I);
    }
    const double z = static_cast<double>(step) * cfg.dz;
    if (!finite || (initial_peak > 0.0 && peak > kBlowupFactor * initial_peak)) {
      traj.blew_up = true;
      traj.blowup_z = z;
      record(z);
      break;
    }
    if (step % cfg.record_stride == 0 || step == steps) record(z);
  }
  return traj;
}

inline void add_noise(Field& psi, double amplitude, std::uint64_t seed) {
  if (amplitude <= 0.0) return;
  double peak = 0.0;
  for (const auto& v : psi) peak = std::max(peak, std::abs(v));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = amplitude * peak / std::numbers::sqrt2;
  for (auto& v : psi) {
    const double re = normal(rng);
    const double im = normal(rng);
    v += scale * cplx(re, im);
  }
}

}  // namespace detail

/// Integrate i Psi_z + Psi_xx + (V + iW) Psi + sigma |Psi|^2 Psi = 0 by Strang
/// splitting: half local step, full kinetic step in Fourier space, half local
/// step, then the absorbing mask. The local sub-problem is solved exactly:
/// |Psi| decays as e^{-W h} while the phase advances by V h + sigma |Psi_0|^2
/// (1 - e^{-2Wh}) / (2W).
inline Trajectory split_step(std::span<const cplx> initial, const PotentialParams& p, Sigma sigma, const Grid1D& g,
                             const PropagationConfig& cfg) {
  cfg.validate();
  p.validate();
  if (initial.size() != static_cast<std::size_t>(g.size())) {
    throw ValidationError("split_step: initial field size does not match the grid");
  }
  require_decayed(initial, g, "split_step");

  const double h = 0.5 * cfg.dz;
  detail::StepTables t;
  const auto k = wavenumbers(g);
  for (std::size_t j = 0; j < initial.size(); ++j) {
    const double x = g[j];
    const auto pot = rosen_morse_1d(p, x);
    detail::fill_local(t, pot.V, pot.W, h);
    t.mask.push_back(std::exp(-cfg.absorber_strength * detail::absorber_ramp(x, g.half_width(), cfg.absorber_width) *
                              cfg.dz));
    t.absorber.push_back(detail::in_absorber(x, g.half_width(), cfg.absorber_width));
    t.kinetic.push_back(std::polar(1.0, -k[j] * k[j] * cfg.dz));
  }

  Field psi(initial.begin(), initial.end());
  detail::add_noise(psi, cfg.noise_amplitude, cfg.seed);
  FftPlan fft(psi.size());
  auto traj = detail::run_split_step(std::move(psi), t, fft, sign_of(sigma), h, cfg, g.spacing(), g.origin());
  traj.dimension = 1;
  return traj;
}

/// 2D version on a tensor grid with the 2D well of gain/loss prefactor w_scale.
inline Trajectory split_step(std::span<const cplx> initial, const PotentialParams& p, Sigma sigma, const Grid2D& g,
                             const PropagationConfig& cfg, double w_scale) {
  cfg.validate();
  p.validate();
  validate_w_scale(w_scale);
  if (initial.size() != g.size()) {
    throw ValidationError("split_step: initial field size does not match the grid");
  }
  require_decayed(initial, g, "split_step");

  const double h = 0.5 * cfg.dz;
  detail::StepTables t;
  const auto kx = wavenumbers(g.x());
  const auto ky = wavenumbers(g.y());
  for (std::size_t ix = 0; ix < g.nx(); ++ix) {
    const double x = g.x()[ix];
    for (std::size_t iy = 0; iy < g.ny(); ++iy) {
      const double y = g.y()[iy];
      const auto pot = rosen_morse_2d(p, x, y, w_scale);
      detail::fill_local(t, pot.V, pot.W, h);
      const double ramp = std::max(detail::absorber_ramp(x, g.x().half_width(), cfg.absorber_width),
                                   detail::absorber_ramp(y, g.y().half_width(), cfg.absorber_width));
      t.mask.push_back(std::exp(-cfg.absorber_strength * ramp * cfg.dz));
      t.absorber.push_back(detail::in_absorber(x, g.x().half_width(), cfg.absorber_width) ||
                           detail::in_absorber(y, g.y().half_width(), cfg.absorber_width));
      t.kinetic.push_back(std::polar(1.0, -(kx[ix] * kx[ix] + ky[iy] * ky[iy]) * cfg.dz));
    }
  }

  Field psi(initial.begin(), initial.end());
  detail::add_noise(psi, cfg.noise_amplitude, cfg.seed);
  FftPlan fft(g.nx(), g.ny());
  auto traj = detail::run_split_step(std::move(psi), t, fft, sign_of(sigma), h, cfg, g.cell_area(), g.origin());
  traj.dimension = 2;
  return traj;
}

/// max over snapshots with z <= z_max of |unwrapped arg(Psi(0,z)/Psi(0,0)) - lambda z|.
inline double phase_rotation_check(const Trajectory& traj, double lambda, double z_max) {
  std::vector<const Snapshot*> window;
  for (const auto& s : traj.snapshots) {
    if (s.z <= z_max) window.push_back(&s);
  }
  if (window.size() < 2) {
    throw InsufficientDataError(
        fmt::format("phase_rotation_check: {} snapshot(s) with z <= {}; need at least 2", window.size(), z_max));
  }
  const std::size_t o = traj.origin_index;
  const cplx ref = window.front()->field.at(o);
  if (std::abs(ref) == 0.0) throw InsufficientDataError("phase_rotation_check: field vanishes at the origin");

  double worst = 0.0;
  double unwrapped = 0.0;
  double previous = 0.0;
  for (const Snapshot* s : window) {
    const cplx v = s->field.at(o);
    if (std::abs(v) == 0.0) throw InsufficientDataError("phase_rotation_check: field vanishes at the origin");
    const double wrapped = std::arg(v / ref);
    double step = wrapped - previous;
    step -= 2.0 * std::numbers::pi * std::round(step / (2.0 * std::numbers::pi));
    unwrapped += step;
    previous = wrapped;
    worst = std::max(worst, std::abs(unwrapped - lambda * (s->z - window.front()->z)));
  }
  return worst;
}

/// || Psi(., z) e^{-i lambda z} - phi ||_2 for every snapshot.
inline std::vector<double> deviation_norms(const Trajectory& traj, std::span<const cplx> reference, double lambda) {
  std::vector<double> d;
  d.reserve(traj.snapshots.size());
  for (const auto& s : traj.snapshots) {
    if (s.field.size() != reference.size()) {
      throw ValidationError("deviation_norms: reference field size does not match the trajectory");
    }
    const cplx rot = std::polar(1.0, -lambda * s.z);
    double sum = 0.0;
    for (std::size_t j = 0; j < reference.size(); ++j) sum += std::norm(s.field[j] * rot - reference[j]);
    d.push_back(std::sqrt(sum * traj.cell_measure));
  }
  return d;
}

inline constexpr std::size_t kMinFitPoints = 10;

/// Exponential growth rate of the deviation from the stationary state.
///
/// The fit is a least-squares line through log ||Psi e^{-i lambda z} - phi||
/// over the first contiguous run of snapshots where that norm lies in
/// [10 * floor, 0.1 * ||phi||]; floor is the deviation at z = 0 (or the first
/// nonzero one).
inline double growth_rate_fit(const Trajectory& traj, std::span<const cplx> reference, double lambda) {
  const auto d = deviation_norms(traj, reference, lambda);
  double floor = 0.0;
  for (double v : d) {
    if (v > 0.0) {
      floor = v;
      break;
    }
  }
  double ref_norm = 0.0;
  for (const auto& v : reference) ref_norm += std::norm(v);
  ref_norm = std::sqrt(ref_norm * traj.cell_measure);
  const double lo = 10.0 * floor, hi = 0.1 * ref_norm;

  std::vector<double> zs, logs;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool inside = floor > 0.0 && d[i] >= lo && d[i] <= hi;
    if (inside) {
      zs.push_back(traj.snapshots[i].z);
      logs.push_back(std::log(d[i]));
    } else if (!zs.empty()) {
      break;
    }
  }
  if (zs.size() < kMinFitPoints) {
    throw InsufficientDataError(fmt::format(
        "growth_rate_fit: {} snapshot(s) in the growth window [{:.3e}, {:.3e}]; need at least {}", zs.size(), lo, hi,
        kMinFitPoints));
  }
  const double nz = static_cast<double>(zs.size());
  double mz = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    mz += zs[i];
    ml += logs[i];
  }
  mz /= nz;
  ml /= nz;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    sxy += (zs[i] - mz) * (logs[i] - ml);
    sxx += (zs[i] - mz) * (zs[i] - mz);
  }
  return sxy / sxx;
}

}  // namespace ptrm
