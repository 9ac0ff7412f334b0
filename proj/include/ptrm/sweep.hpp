#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "ptrm/grid.hpp"
#include "ptrm/io.hpp"
#include "ptrm/linstab.hpp"
#include "ptrm/modes.hpp"
#include "ptrm/observables.hpp"
#include "ptrm/version.hpp"

namespace ptrm {

struct SweepSpec {
  std::vector<double> a_values;
  std::vector<double> b_values;
  Sigma sigma{Sigma::focusing};
  double half_width{20.0};
  int n{512};
  Discretization disc{Discretization::fourier};
  std::optional<double> tol;  // default_tolerance(lambda) per point when unset
  std::filesystem::path output_dir;
  unsigned workers{0};        // 0: hardware concurrency

  void validate() const {
    if (a_values.empty()) throw ValidationError("sweep: the list of a values is empty");
    if (b_values.empty()) throw ValidationError("sweep: the list of b values is empty");
    for (double v : a_values) PotentialParams{v, 0.0}.validate();
    for (double v : b_values) PotentialParams{0.0, v}.validate();
    Grid1D(half_width, n);
    if (n > kMaxLinstabPoints) {
      throw ValidationError(fmt::format("sweep: n = {} exceeds the dense solve budget {}", n, kMaxLinstabPoints));
    }
    if (tol && !(*tol > 0.0)) throw ValidationError(fmt::format("sweep: tolerance must be positive, got {}", *tol));
    if (output_dir.empty()) throw ValidationError("sweep: output directory is not set");
  }
};

/// One row of results.csv. `error` is set when the point failed; the numeric
/// fields computed before the failure are kept, the rest are NaN.
struct SweepPoint {
  double a{};
  double b{};
  double lambda{std::numeric_limits<double>::quiet_NaN()};
  double power{std::numeric_limits<double>::quiet_NaN()};
  double residual{std::numeric_limits<double>::quiet_NaN()};
  double max_growth{std::numeric_limits<double>::quiet_NaN()};
  double tolerance{std::numeric_limits<double>::quiet_NaN()};
  std::string classification{"error"};
  std::optional<std::string> error;
};

struct SweepManifest {
  SweepSpec spec;
  std::vector<SweepPoint> points;  // ordered by (a index, b index)
  std::string tool_version;
  std::string started_utc;
  std::string finished_utc;
  std::map<std::string, std::string> file_sha256;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const SweepPoint& p) {
      return p.error.has_value();
    }));
  }
};

inline constexpr std::string_view kResultsHeader = "a,b,sigma,lambda,power,residual,max_growth,classification";

/// Mode, propagation constant, power, residual and stability verdict at one (a, b).
inline SweepPoint evaluate_sweep_point(double a, double b, const SweepSpec& spec) {
  SweepPoint pt;
  pt.a = a;
  pt.b = b;
  try {
    const PotentialParams p{a, b};
    const auto mode = mode_1d(p, spec.sigma);
    const Grid1D g(spec.half_width, spec.n);
    const Field field = evaluate_mode(mode, g);
    pt.lambda = mode.lambda;
    pt.power = power(field, g);
    pt.residual = residual_norm(field, p, mode.sigma, mode.lambda, g);
    const auto ops = build_operators(field, p, mode.sigma, mode.lambda, g, spec.disc);
    const auto spectrum = stability_spectrum(ops, spec.tol);
    pt.max_growth = spectrum.max_growth;
    pt.tolerance = spectrum.tolerance;
    pt.classification = std::string(to_string(spectrum.classification));
  } catch (const std::exception& e) {
    pt.classification = "error";
    pt.error = e.what();
  }
  return pt;
}

inline std::string results_csv(const std::vector<SweepPoint>& points, Sigma sigma) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& p : points) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", io::num(p.a), io::num(p.b), static_cast<int>(sigma),
                       io::num(p.lambda), io::num(p.power), io::num(p.residual), io::num(p.max_growth),
                       p.classification);
  }
  return out;
}

inline nlohmann::json to_json(const SweepSpec& s) {
  nlohmann::json j;
  j["a_values"] = s.a_values;
  j["b_values"] = s.b_values;
  j["sigma"] = static_cast<int>(s.sigma);
  j["L"] = s.half_width;
  j["n"] = s.n;
  j["disc"] = std::string(to_string(s.disc));
  j["tol"] = s.tol ? nlohmann::json(*s.tol) : nlohmann::json("1e-6*(1+|lambda|)");
  j["output_dir"] = s.output_dir.string();
  return j;
}

inline nlohmann::json to_json(const SweepManifest& m) {
  nlohmann::json j;
  j["tool"] = std::string(kToolName);
  j["tool_version"] = m.tool_version;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  j["spec"] = to_json(m.spec);
  auto& pts = j["points"] = nlohmann::json::array();
  for (const auto& p : m.points) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json r{{"a", p.a},
                     {"b", p.b},
                     {"lambda", finite_or_null(p.lambda)},
                     {"power", finite_or_null(p.power)},
                     {"residual", finite_or_null(p.residual)},
                     {"max_growth", finite_or_null(p.max_growth)},
                     {"tolerance", finite_or_null(p.tolerance)},
                     {"classification", p.classification}};
    r["error"] = p.error ? nlohmann::json(*p.error) : nlohmann::json(nullptr);
    pts.push_back(std::move(r));
  }
  auto& files = j["files"] = nlohmann::json::object();
  for (const auto& [name, hash] : m.file_sha256) files[name] = {{"sha256", hash}};
  return j;
}

/// Evaluate every (a, b) pair, concurrently, and write results.csv and
/// manifest.json into spec.output_dir. Per-point failures are recorded, not
/// thrown.
inline SweepManifest run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.output_dir);

  SweepManifest m;
  m.spec = spec;
  m.tool_version = std::string(kVersion);
  m.started_utc = io::utc_timestamp();

  const std::size_t na = spec.a_values.size(), nb = spec.b_values.size();
  const std::size_t total = na * nb;
  m.points.resize(total);

  unsigned workers = spec.workers != 0 ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) {
          m.points[i] = evaluate_sweep_point(spec.a_values[i / nb], spec.b_values[i % nb], spec);
        }
      });
    }
  }

  const auto results = spec.output_dir / "results.csv";
  io::write_text(results, results_csv(m.points, spec.sigma));
  m.file_sha256["results.csv"] = io::sha256_file(results);
  m.finished_utc = io::utc_timestamp();
  io::write_text(spec.output_dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

/// Names of files listed in dir/manifest.json whose SHA-256 no longer
/// matches (missing files included). Empty means the outputs verify.
inline std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  const auto manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  std::vector<std::string> bad;
  for (const auto& [name, entry] : manifest.at("files").items()) {
    const auto path = dir / name;
    if (!std::filesystem::exists(path) || io::sha256_file(path) != entry.at("sha256").get<std::string>()) {
      bad.push_back(name);
    }
  }
  return bad;
}

}  // namespace ptrm
