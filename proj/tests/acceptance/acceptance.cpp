// Acceptance driver: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "ptrm/ptrm.hpp"

using namespace ptrm;

namespace {

constexpr double kL = 20.0;
constexpr int kN = 512;

struct Outcome {
  bool pass;
  std::string detail;
};

struct FigureSet {
  double a, b;
  Sigma sigma;
};

const std::vector<FigureSet> kFigureSets{
    {0.75, 0.8, Sigma::focusing}, {0.1, 0.03, Sigma::focusing}, {0.1, 3.0, Sigma::focusing},
    {1.0, 0.4, Sigma::defocusing}};

std::vector<PotentialParams> sampled_params() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<PotentialParams> out;
  for (int i = 0; i < 25; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    out.push_back({a, b});
  }
  return out;
}

Outcome propagation_constants() {
  struct Case {
    double got, want;
  };
  const std::vector<Case> cases{
      {mode_1d({0.75, 0.8}, Sigma::focusing).lambda, 0.36},
      {mode_1d({0.1, 0.03}, Sigma::focusing).lambda, 0.9991},
      {mode_1d({0.1, 3.0}, Sigma::focusing).lambda, -8.0},
      {mode_1d({1.0, 0.4}, Sigma::defocusing).lambda, 0.84},
      {mode_2d({1.25, 0.5}, ModeVariant::paper).lambda, 1.0},
  };
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, std::abs(c.got - c.want));
  return {worst <= 1e-12, fmt::format("max |lambda - target| = {:.2e}", worst)};
}

Outcome residual_oracle() {
  const Grid1D g(kL, kN);
  double worst = 0.0;
  for (const auto& p : sampled_params()) worst = std::max(worst, residual_norm(mode_1d(p, Sigma::focusing), g));
  const double literal = residual_norm(mode_1d({1.0, 0.4}, Sigma::defocusing), g);
  const auto g2 = make_grid_2d(15.0, 256);
  const double derived = residual_norm(mode_2d({1.25, 0.5}, ModeVariant::derived), g2);
  const double paper = residual_norm(mode_2d({1.25, 0.5}, ModeVariant::paper), g2);
  const bool pass = worst < 1e-8 && literal > 1.0 && derived < 1e-8 && !(paper < 1e-8);
  return {pass, fmt::format("focusing max {:.2e} over 25 samples; literal defocusing {:.3g}; 2D derived {:.2e}, "
                            "2D paper {:.3g}",
                            worst, literal, derived, paper)};
}

Outcome power_checks() {
  const Grid1D g(kL, kN);
  double closed_gap = 0.0;
  for (const auto& p : sampled_params()) {
    const auto f = evaluate_mode(mode_1d(p, Sigma::focusing), g);
    closed_gap = std::max(closed_gap, std::abs(power(f, g) - 2.0 * amplitude_squared(p.a)));
  }
  std::vector<double> by_b;
  for (double b : {0.0, 0.4, 0.8, 3.0}) by_b.push_back(power(evaluate_mode(mode_1d({0.75, b}, Sigma::focusing), g), g));
  const auto [lo, hi] = std::minmax_element(by_b.begin(), by_b.end());
  const double spread = *hi - *lo;

  // Minimum over a in [-3, 3] on a grid of step 1e-3 that contains -0.5.
  double best_a = 0.0, best_p = INFINITY;
  for (int i = 0; i <= 6000; ++i) {
    const double a = -3.0 + 1e-3 * i;
    const double p = power(evaluate_mode(mode_1d({a, 0.4}, Sigma::focusing), g), g);
    if (p < best_p) {
      best_p = p;
      best_a = a;
    }
  }
  const bool pass = closed_gap <= 1e-8 && spread <= 1e-10 && std::abs(best_a + 0.5) < 1e-9 &&
                    std::abs(best_p - 3.5) <= 1e-8;
  return {pass, fmt::format("max |P - 2(a^2+a+2)| = {:.2e}; spread over b = {:.2e}; min at a = {:.4f}, P = {:.12f}",
                            closed_gap, spread, best_a, best_p)};
}

Outcome poynting_checks() {
  const Grid1D g(kL, kN);
  bool positive = true;
  double origin_gap = 0.0;
  int modes = 0;
  for (const auto& p : sampled_params()) {
    if (!(p.b > 0.0)) continue;
    ++modes;
    const auto s = poynting_1d(evaluate_mode(mode_1d(p, Sigma::focusing), g), g);
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (std::abs(g[j]) <= 0.5 * kL && !(s[j] > 0.0)) positive = false;
    }
    origin_gap = std::max(origin_gap, std::abs(s[g.origin()] - p.b * amplitude_squared(p.a)));
  }
  double zero_b = 0.0;
  for (double a : {0.75, 0.1, -1.0, 2.5}) {
    for (double v : poynting_1d(evaluate_mode(mode_1d({a, 0.0}, Sigma::focusing), g), g)) {
      zero_b = std::max(zero_b, std::abs(v));
    }
  }
  const bool pass = positive && origin_gap <= 1e-8 && zero_b < 1e-10;
  return {pass, fmt::format("S > 0 on |x| <= L/2 for {} modes with b > 0: {}; max |S(0) - b(a^2+a+2)| = {:.2e}; "
                            "b = 0 sup|S| = {:.2e}",
                            modes, positive ? "yes" : "no", origin_gap, zero_b)};
}

Outcome stability_claim() {
  const Grid1D g(kL, kN);
  int unstable = 0, total = 0;
  double neg = 0.0, conj = 0.0, smallest = INFINITY;
  std::string worst_point;
  auto check = [&](const LocalizedMode& m) {
    const auto s = stability_spectrum(build_operators(m, g, Discretization::fourier));
    ++total;
    if (s.classification == Stability::unstable) ++unstable;
    if (s.max_growth < smallest) {
      smallest = s.max_growth;
      worst_point = fmt::format("({:.4g}, {:.4g})", m.params.a, m.params.b);
    }
    neg = std::max(neg, pairing_defect(s.etas, SpectrumSymmetry::negation));
    conj = std::max(conj, pairing_defect(s.etas, SpectrumSymmetry::conjugation));
  };
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double a = -2.0 + 4.0 * i / 9.0;
      const double b = 0.01 + (3.0 - 0.01) * j / 9.0;
      check(mode_1d({a, b}, Sigma::focusing));
    }
  }
  for (const auto& f : kFigureSets) check(mode_1d({f.a, f.b}, f.sigma));
  const bool pass = unstable == total && neg <= 1e-6 && conj <= 1e-6;
  return {pass, fmt::format("{}/{} unstable (smallest max Re eta {:.3e} at {}); pairing defects: negation {:.2e}, "
                            "conjugation {:.2e}",
                            unstable, total, smallest, worst_point, neg, conj)};
}

Outcome discretization_robustness() {
  const Grid1D g(kL, kN);
  double worst = 0.0;
  std::string detail;
  for (auto [a, b] : {std::pair{0.1, 0.03}, {0.1, 3.0}}) {
    const auto m = mode_1d({a, b}, Sigma::focusing);
    const double f = stability_spectrum(build_operators(m, g, Discretization::fourier)).max_growth;
    const double d = stability_spectrum(build_operators(m, g, Discretization::fd)).max_growth;
    const double rel = std::abs(f - d) / std::max(std::abs(f), std::abs(d));
    worst = std::max(worst, rel);
    if (!detail.empty()) detail += "; ";
    detail += fmt::format("({}, {}): fourier {:.6f}, fd {:.6f}, rel {:.2e}", a, b, f, d, rel);
  }
  return {worst <= 0.1, detail};
}

Outcome cross_validation() {
  const Grid1D g(kL, kN);
  const auto m = mode_1d({0.1, 0.03}, Sigma::focusing);
  const auto phi = evaluate_mode(m, g);
  PropagationConfig c;
  c.dz = 1e-3;
  c.z_end = 45.0;
  c.record_stride = 250;
  c.noise_amplitude = 1e-6;
  c.seed = 1;
  const auto traj = split_step(phi, m.params, m.sigma, g, c);
  const double fit = growth_rate_fit(traj, phi, m.lambda);
  const double eta = stability_spectrum(build_operators(m, g, Discretization::fourier)).max_growth;
  const double rel = std::abs(fit - eta) / eta;
  return {rel <= 0.2, fmt::format("fitted {:.6f} vs linearized {:.6f}, rel {:.2e}", fit, eta, rel)};
}

Outcome hermitian_conservation() {
  const Grid1D g(kL, kN);
  const auto m = mode_1d({0.75, 0.0}, Sigma::focusing);
  const auto phi = evaluate_mode(m, g);
  auto run = [&](double dz) {
    PropagationConfig c;
    c.dz = dz;
    c.z_end = 10.0;
    c.record_stride = static_cast<int>(std::lround(1.0 / dz));
    return split_step(phi, m.params, m.sigma, g, c);
  };
  const auto coarse = run(1e-3);
  const auto fine = run(5e-4);
  double power_drift = 0.0;
  for (double p : coarse.power) power_drift = std::max(power_drift, std::abs(p - coarse.power.front()));
  const auto dc = deviation_norms(coarse, phi, m.lambda);
  const auto df = deviation_norms(fine, phi, m.lambda);
  const double ratio = *std::max_element(dc.begin(), dc.end()) / *std::max_element(df.begin(), df.end());
  const bool pass = power_drift <= 1e-6 && ratio >= 3.0 && ratio <= 5.0 && !coarse.blew_up;
  return {pass, fmt::format("power drift {:.2e} over z = 10; drift ratio dz 1e-3 / 5e-4 = {:.4f}", power_drift, ratio)};
}

Outcome eigensolver_backend() {
  std::mt19937 rng(9);
  std::normal_distribution<double> d;
  const int n = 64;
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
  std::vector<cplx> diag(n);
  for (int i = 0; i < n; ++i) D(i, i) = diag[static_cast<std::size_t>(i)] = {d(rng), d(rng)};
  auto ev = eig_dense(D);
  double diag_err = 0.0;
  for (const auto& v : diag) {
    double best = INFINITY;
    for (const auto& e : ev) best = std::min(best, std::abs(e - v));
    diag_err = std::max(diag_err, best / D.norm());
  }

  // Companion matrix: backward error |p(z)| / sum |c_k||z|^k.
  const std::vector<cplx> roots{{1, 0}, {-2, 0}, {0.5, 1.5}, {0.5, -1.5}, {0, 3}, {-1, -0.25}, {2, 2}, {-0.3, 0.7}};
  std::vector<cplx> c{1.0};
  for (const auto& r : roots) {
    std::vector<cplx> next(c.size() + 1);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= r * c[i];
    }
    c = next;
  }
  const auto m = static_cast<Eigen::Index>(roots.size());
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) comp(0, j) = -c[static_cast<std::size_t>(j) + 1];
  for (Eigen::Index i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
  double comp_err = 0.0;
  for (const auto& z : eig_dense(comp)) {
    cplx p = 0.0;
    double scale = 0.0;
    for (const auto& ci : c) {
      p = p * z + ci;
      scale = scale * std::abs(z) + std::abs(ci);
    }
    comp_err = std::max(comp_err, std::abs(p) / scale);
  }
  return {diag_err <= 1e-8 && comp_err <= 1e-8,
          fmt::format("diagonal backward error {:.2e}; companion backward error {:.2e}", diag_err, comp_err)};
}

Outcome determinism() {
  const auto base = std::filesystem::temp_directory_path() / fmt::format("ptrm_acceptance_{}", ::getpid());
  SweepSpec s;
  s.a_values = {-1.0, 0.1, 0.75};
  s.b_values = {0.03, 0.8, 3.0};
  s.n = 256;
  s.half_width = kL;
  s.output_dir = base / "first";
  run_sweep(s);
  s.output_dir = base / "second";
  run_sweep(s);
  const auto first = io::read_text(base / "first" / "results.csv");
  const auto second = io::read_text(base / "second" / "results.csv");
  const bool verified = verify_manifest(base / "first").empty() && verify_manifest(base / "second").empty();
  std::filesystem::remove_all(base);
  return {first == second && verified,
          fmt::format("results.csv {} ({} bytes, sha256 {}); manifests verify: {}",
                      first == second ? "byte-identical" : "differs", first.size(), io::sha256_hex(first).substr(0, 16),
                      verified ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"propagation constants", propagation_constants},
      {"residual oracle", residual_oracle},
      {"power", power_checks},
      {"poynting flow", poynting_checks},
      {"instability of all modes and spectrum pairing", stability_claim},
      {"discretization robustness", discretization_robustness},
      {"propagation vs linearization growth rate", cross_validation},
      {"hermitian-limit conservation", hermitian_conservation},
      {"eigensolver backend", eigensolver_backend},
      {"sweep determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    fmt::print("[{}] criterion {:2d} {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail,
               secs);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
