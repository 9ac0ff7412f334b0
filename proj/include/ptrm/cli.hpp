#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ptrm/ptrm.hpp"

namespace ptrm::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2 };

inline constexpr std::string_view kOutputDirEnv = "PTRM_OUTPUT_DIR";

/// Every parameter any subcommand accepts; each subcommand binds the subset it uses.
struct RunConfig {
  double a = 0.75;
  double b = 0.8;
  int sigma = 1;
  int dim = 1;
  std::string variant = "derived";
  std::optional<double> w_scale;
  double L = 20.0;
  int n = 512;
  std::string disc = "fourier";
  std::optional<double> tol;
  PropagationConfig prop;
  std::vector<double> a_values;
  std::vector<double> b_values;
  unsigned workers = 0;
  std::string out = ".";
};

inline nlohmann::json defaults_json() {
  return {{"L", 20.0}, {"n", 512}, {"dz", 1e-3}, {"tol", "1e-6*(1+|lambda|)"}};
}

/// Flat `key = value` file; '#' starts a comment, values may be quoted.
/// Keys may use '_' or '-'.
inline std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot read config file {}", path.string()));
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') continue;  // section headers are tolerated and ignored
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(fmt::format("{}:{}: expected key = value", path.string(), lineno));
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    kv[key] = value;
  }
  return kv;
}

namespace detail {

inline std::string point_row(std::initializer_list<double> values) {
  std::string row;
  for (double v : values) {
    if (!row.empty()) row += ',';
    row += io::num(v);
  }
  row += '\n';
  return row;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  io::write_text(path, j.dump(2) + "\n");
}

inline std::filesystem::path out_dir(const RunConfig& c) {
  std::filesystem::path p(c.out);
  std::filesystem::create_directories(p);
  return p;
}

inline nlohmann::json grid_json(const RunConfig& c) { return {{"L", c.L}, {"n", c.n}}; }

inline double w_scale_for(const RunConfig& c) {
  if (c.w_scale) {
    validate_w_scale(*c.w_scale);
    return *c.w_scale;
  }
  return variant_from_string(c.variant) == ModeVariant::paper ? 4.0 : 2.0;
}

inline LocalizedMode selected_mode(const RunConfig& c) {
  const PotentialParams p{c.a, c.b};
  if (c.dim == 1) return mode_1d(p, sigma_from_int(c.sigma));
  if (c.sigma != 1) throw ValidationError("2D modes exist only for sigma = +1");
  return mode_2d(p, variant_from_string(c.variant));
}

inline void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw ValidationError(fmt::format("--dim must be 1 or 2, got {}", dim));
}

inline int cmd_potential(const RunConfig& c, std::ostream& out) {
  check_dim(c.dim);
  const PotentialParams p{c.a, c.b};
  p.validate();
  const auto dir = out_dir(c);
  std::string csv;
  double violation = 0.0;
  nlohmann::json meta{{"a", c.a}, {"b", c.b}, {"dim", c.dim}, {"grid", grid_json(c)}, {"defaults", defaults_json()}};
  if (c.dim == 1) {
    const auto g = make_grid(c.L, c.n);
    csv = "x,V,W\n";
    for (double x : g.points()) {
      const auto s = rosen_morse_1d(p, x);
      csv += point_row({x, s.V, s.W});
    }
    violation = check_pt_symmetry([&](double x) { return rosen_morse_1d(p, x); }, g);
    meta["w_scale"] = nullptr;
  } else {
    const double ws = w_scale_for(c);
    const auto g = make_grid_2d(c.L, c.n);
    csv = "x,y,V,W\n";
    for (double x : g.x().points()) {
      for (double y : g.y().points()) {
        const auto s = rosen_morse_2d(p, x, y, ws);
        csv += point_row({x, y, s.V, s.W});
      }
    }
    violation = check_pt_symmetry([&](double x, double y) { return rosen_morse_2d(p, x, y, ws); }, g);
    meta["w_scale"] = ws;
  }
  meta["pt_violation"] = violation;
  io::write_text(dir / "potential.csv", csv);
  write_json(dir / "potential.json", meta);
  out << meta.dump(2) << "\n";
  return kOk;
}

inline int cmd_mode(const RunConfig& c, std::ostream& out) {
  check_dim(c.dim);
  const auto mode = selected_mode(c);
  const auto dir = out_dir(c);
  auto meta = to_json(mode);
  meta["grid"] = grid_json(c);
  meta["defaults"] = defaults_json();
  std::string csv;
  if (c.dim == 1) {
    const auto g = make_grid(c.L, c.n);
    const auto f = evaluate_mode(mode, g);
    csv = "x,re,im,|phi|^2\n";
    for (std::size_t j = 0; j < f.size(); ++j) csv += point_row({g[j], f[j].real(), f[j].imag(), std::norm(f[j])});
    meta["residual"] = residual_norm(f, mode.params, mode.sigma, mode.lambda, g);
    meta["power"] = power(f, g);
  } else {
    const auto g = make_grid_2d(c.L, c.n);
    const auto f = evaluate_mode(mode, g);
    csv = "x,y,re,im,|phi|^2\n";
    for (std::size_t k = 0; k < f.size(); ++k) {
      csv += point_row({g.x()[k / g.ny()], g.y()[k % g.ny()], f[k].real(), f[k].imag(), std::norm(f[k])});
    }
    meta["residual"] = residual_norm(f, mode.params, mode.sigma, mode.lambda, g, *mode.w_scale);
    meta["power"] = power(f, g);
  }
  io::write_text(dir / "mode.csv", csv);
  write_json(dir / "mode.json", meta);
  out << meta.dump(2) << "\n";
  return kOk;
}

inline int cmd_spectrum_linear(const RunConfig& c, std::ostream& out) {
  const PotentialParams p{c.a, c.b};
  const auto spec = linear_spectrum(p);
  const auto dir = out_dir(c);
  std::string csv = "n,lambda\n";
  for (std::size_t i = 0; i < spec.levels.size(); ++i) csv += fmt::format("{},{}\n", i, io::num(spec.levels[i]));
  nlohmann::json meta{{"a", c.a},
                      {"b", c.b},
                      {"levels", spec.levels},
                      {"all_positive", spec.all_positive()},
                      {"abs_b_exceeds_a_squared", std::abs(c.b) > c.a * c.a},
                      {"defaults", defaults_json()}};
  io::write_text(dir / "spectrum_linear.csv", csv);
  write_json(dir / "spectrum_linear.json", meta);
  out << csv;
  return kOk;
}

inline int cmd_observables(const RunConfig& c, std::ostream& out) {
  check_dim(c.dim);
  const auto mode = selected_mode(c);
  const auto dir = out_dir(c);
  nlohmann::json meta = to_json(mode);
  meta["grid"] = grid_json(c);
  meta["defaults"] = defaults_json();
  std::string csv;
  const double q = amplitude_squared(c.a);
  if (c.dim == 1) {
    const auto g = make_grid(c.L, c.n);
    const auto f = evaluate_mode(mode, g);
    const auto s = poynting_1d(f, g);
    csv = "x,S,|phi|^2\n";
    double gap = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      csv += point_row({g[j], s[j], std::norm(f[j])});
      if (std::abs(g[j]) <= 0.5 * c.L) gap = std::max(gap, std::abs(s[j] - poynting_1d_closed_form(mode.params, g[j])));
    }
    meta["power"] = power(f, g);
    meta["power_closed_form"] = 2.0 * q;
    meta["S_origin"] = s[g.origin()];
    meta["S_closed_form_origin"] = c.b * q;
    meta["S_closed_form_max_gap_interior"] = gap;
  } else {
    const auto g = make_grid_2d(c.L, c.n);
    const auto f = evaluate_mode(mode, g);
    const auto s = poynting_2d(f, g);
    csv = "x,y,S_x,S_y,|phi|^2\n";
    double gap_general = 0.0, gap_separable = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double x = g.x()[k / g.ny()], y = g.y()[k % g.ny()];
      csv += point_row({x, y, s.x[k], s.y[k], std::norm(f[k])});
      if (std::abs(x) <= 0.5 * c.L && std::abs(y) <= 0.5 * c.L) {
        const double general = poynting_2d_closed_form(mode.params, x, y);
        const auto [px, py] = poynting_2d_separable(mode.params, x, y);
        gap_general = std::max({gap_general, std::abs(s.x[k] - general), std::abs(s.y[k] - general)});
        gap_separable = std::max({gap_separable, std::abs(s.x[k] - px), std::abs(s.y[k] - py)});
      }
    }
    meta["power"] = power(f, g);
    meta["power_closed_form"] = 4.0 * q;
    meta["S_origin"] = {s.x[g.origin()], s.y[g.origin()]};
    meta["S_general_max_gap_interior"] = gap_general;
    meta["S_separable_max_gap_interior"] = gap_separable;
  }
  io::write_text(dir / "observables.csv", csv);
  write_json(dir / "observables.json", meta);
  out << meta.dump(2) << "\n";
  return kOk;
}

inline int cmd_stability(const RunConfig& c, std::ostream& out) {
  const auto mode = mode_1d({c.a, c.b}, sigma_from_int(c.sigma));
  const auto disc = discretization_from_string(c.disc);
  const auto g = make_grid(c.L, c.n);
  if (c.tol && !(*c.tol > 0.0)) throw ValidationError(fmt::format("--tol must be positive, got {}", *c.tol));
  const auto dir = out_dir(c);
  const auto ops = build_operators(mode, g, disc);
  const auto spec = stability_spectrum(ops, c.tol);
  std::string csv = "re_eta,im_eta\n";
  for (const auto& e : spec.etas) csv += point_row({e.real(), e.imag()});
  nlohmann::json meta{{"a", c.a},
                      {"b", c.b},
                      {"sigma", c.sigma},
                      {"lambda", mode.lambda},
                      {"disc", std::string(to_string(disc))},
                      {"n", c.n},
                      {"L", c.L},
                      {"max_growth", spec.max_growth},
                      {"classification", std::string(to_string(spec.classification))},
                      {"tolerance", spec.tolerance},
                      {"eigenvalue_count", spec.etas.size()},
                      {"negation_pairing_defect", pairing_defect(spec.etas, SpectrumSymmetry::negation)},
                      {"conjugation_pairing_defect", pairing_defect(spec.etas, SpectrumSymmetry::conjugation)},
                      {"paper_literal_mode", mode.paper_literal},
                      {"defaults", defaults_json()}};
  io::write_text(dir / "spectrum.csv", csv);
  write_json(dir / "stability.json", meta);
  out << meta.dump(2) << "\n";
  return kOk;
}

inline int cmd_propagate(const RunConfig& c, std::ostream& out) {
  check_dim(c.dim);
  c.prop.validate();
  const auto mode = selected_mode(c);
  const auto dir = out_dir(c);
  Trajectory traj;
  std::vector<std::pair<double, double>> coords;
  if (c.dim == 1) {
    const auto g = make_grid(c.L, c.n);
    traj = split_step(evaluate_mode(mode, g), mode.params, mode.sigma, g, c.prop);
    for (double x : g.points()) coords.emplace_back(x, 0.0);
  } else {
    const auto g = make_grid_2d(c.L, c.n);
    const double ws = w_scale_for(c);
    traj = split_step(evaluate_mode(mode, g), mode.params, mode.sigma, g, c.prop, ws);
    for (double x : g.x().points()) {
      for (double y : g.y().points()) coords.emplace_back(x, y);
    }
  }

  std::string csv = "z,power,peak_intensity,boundary_mass\n";
  for (std::size_t i = 0; i < traj.z.size(); ++i) {
    csv += point_row({traj.z[i], traj.power[i], traj.peak_intensity[i], traj.boundary_mass[i]});
  }
  io::write_text(dir / "trajectory.csv", csv);

  nlohmann::json snaps = nlohmann::json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const auto& s = traj.snapshots[i];
    std::string rows = c.dim == 1 ? "x,re,im\n" : "x,y,re,im\n";
    for (std::size_t k = 0; k < s.field.size(); ++k) {
      rows += c.dim == 1 ? point_row({coords[k].first, s.field[k].real(), s.field[k].imag()})
                         : point_row({coords[k].first, coords[k].second, s.field[k].real(), s.field[k].imag()});
    }
    const std::string name = fmt::format("snapshots/snapshot_{:05d}.csv", i);
    io::write_text(dir / name, rows);
    snaps.push_back({{"z", s.z}, {"file", name}});
  }

  nlohmann::json meta = to_json(mode);
  meta["grid"] = grid_json(c);
  meta["config"] = {{"dz", c.prop.dz},
                    {"z_end", c.prop.z_end},
                    {"record_stride", c.prop.record_stride},
                    {"absorber_width", c.prop.absorber_width},
                    {"absorber_strength", c.prop.absorber_strength},
                    {"noise_amplitude", c.prop.noise_amplitude},
                    {"keep_snapshots", c.prop.keep_snapshots}};
  meta["seed"] = traj.seed;
  if (c.dim == 2) meta["propagation_w_scale"] = w_scale_for(c);
  meta["blew_up"] = traj.blew_up;
  meta["blowup_z"] = traj.blowup_z ? nlohmann::json(*traj.blowup_z) : nlohmann::json(nullptr);
  meta["records"] = traj.z.size();
  meta["snapshots"] = snaps;
  meta["defaults"] = defaults_json();
  write_json(dir / "propagate.json", meta);
  out << meta.dump(2) << "\n";
  return traj.blew_up ? kNumerical : kOk;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out) {
  SweepSpec spec;
  spec.a_values = c.a_values;
  spec.b_values = c.b_values;
  spec.sigma = sigma_from_int(c.sigma);
  spec.half_width = c.L;
  spec.n = c.n;
  spec.disc = discretization_from_string(c.disc);
  spec.tol = c.tol;
  spec.output_dir = c.out;
  spec.workers = c.workers;
  const auto manifest = run_sweep(spec);
  nlohmann::json summary{{"points", manifest.points.size()},
                         {"failures", manifest.failures()},
                         {"results", (spec.output_dir / "results.csv").string()},
                         {"manifest", (spec.output_dir / "manifest.json").string()},
                         {"defaults", defaults_json()}};
  out << summary.dump(2) << "\n";
  return manifest.failures() == 0 ? kOk : kNumerical;
}

// Insert `--key=value` for every config-file key the subcommand defines and
// the command line does not already set. Injected values precede the user's
// flags, so flags win.
inline std::vector<std::string> apply_config(const std::vector<std::string>& args, CLI::App& app,
                                             const std::map<std::string, std::string>& kv) {
  std::size_t sub_pos = args.size();
  CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (auto* s = app.get_subcommand_no_throw(args[i])) {
      sub = s;
      sub_pos = i;
      break;
    }
  }
  if (sub == nullptr) return args;

  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto known_anywhere = [&](const std::string& key) {
    for (const auto* s : app.get_subcommands({})) {
      if (s->get_option_no_throw("--" + key) != nullptr) return true;
    }
    return key == "config";
  };

  std::vector<std::string> injected;
  for (const auto& [key, value] : kv) {
    if (!known_anywhere(key)) throw ValidationError(fmt::format("config file: unknown key '{}'", key));
    if (sub->get_option_no_throw("--" + key) == nullptr || given(key)) continue;
    injected.push_back(fmt::format("--{}={}", key, value));
  }
  std::vector<std::string> result(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1));
  result.insert(result.end(), injected.begin(), injected.end());
  result.insert(result.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1), args.end());
  return result;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig c;
  if (const char* env = std::getenv(std::string(kOutputDirEnv).c_str()); env != nullptr && *env != '\0') c.out = env;

  CLI::App app{"Localized modes of the NLS equation with a PT-symmetric Rosen-Morse well", "ptrm"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  app.add_option("--config", config_path, "Flat key = value file mirroring the flags; flags override it");
  app.set_version_flag("--version", std::string(kVersion));

  auto add_params = [&](CLI::App* s, bool with_sigma) {
    s->add_option("--a", c.a, "Real-part strength a")->capture_default_str();
    s->add_option("--b", c.b, "Gain/loss strength b")->capture_default_str();
    if (with_sigma) s->add_option("--sigma", c.sigma, "Kerr sign: 1 focusing, -1 defocusing")->capture_default_str();
  };
  auto add_grid = [&](CLI::App* s) {
    s->add_option("--L", c.L, "Grid half-width")->capture_default_str();
    s->add_option("--n", c.n, "Grid points per axis (even, >= 8)")->capture_default_str();
  };
  auto add_out = [&](CLI::App* s) {
    s->add_option("--out", c.out, fmt::format("Output directory (default ${} or .)", kOutputDirEnv));
  };
  auto add_dim = [&](CLI::App* s) {
    s->add_option("--dim", c.dim, "Dimension, 1 or 2")->capture_default_str();
    s->add_option("--variant", c.variant, "2D mode variant: paper or derived")->capture_default_str();
  };

  auto* potential = app.add_subcommand("potential", "Sample V and W on a grid and check PT symmetry");
  add_params(potential, false);
  add_grid(potential);
  add_dim(potential);
  potential->add_option("--w-scale", c.w_scale, "2D gain/loss prefactor, 2 or 4 (default from --variant)");
  add_out(potential);

  auto* mode = app.add_subcommand("mode", "Construct a closed-form mode, evaluate it, report its residual");
  add_params(mode, true);
  add_grid(mode);
  add_dim(mode);
  add_out(mode);

  auto* linear = app.add_subcommand("spectrum-linear", "Bound-state levels of the linear well");
  add_params(linear, false);
  add_out(linear);

  auto* obs = app.add_subcommand("observables", "Power and transverse power flow of a mode");
  add_params(obs, true);
  add_grid(obs);
  add_dim(obs);
  add_out(obs);

  auto* stab = app.add_subcommand("stability", "Linear-stability spectrum of a 1D mode");
  add_params(stab, true);
  add_grid(stab);
  stab->add_option("--disc", c.disc, "fourier or fd")->capture_default_str();
  stab->add_option("--tol", c.tol, "Growth threshold (default 1e-6*(1+|lambda|))");
  add_out(stab);

  auto* prop = app.add_subcommand("propagate", "Split-step propagation starting from a mode");
  add_params(prop, true);
  add_grid(prop);
  add_dim(prop);
  prop->add_option("--w-scale", c.w_scale, "2D gain/loss prefactor, 2 or 4 (default from --variant)");
  prop->add_option("--dz", c.prop.dz, "Step size")->capture_default_str();
  prop->add_option("--z-end", c.prop.z_end, "Propagation distance")->capture_default_str();
  prop->add_option("--stride", c.prop.record_stride, "Record every this many steps")->capture_default_str();
  prop->add_option("--absorber-width", c.prop.absorber_width, "Absorber thickness, fraction of L")
      ->capture_default_str();
  prop->add_option("--absorber-strength", c.prop.absorber_strength, "Absorber damping rate")->capture_default_str();
  prop->add_option("--noise", c.prop.noise_amplitude, "Initial noise relative to max|phi|")->capture_default_str();
  prop->add_option("--seed", c.prop.seed, "Noise seed")->capture_default_str();
  prop->add_option("--snapshots", c.prop.keep_snapshots, "Write field snapshots (true/false)")
      ->capture_default_str();
  add_out(prop);

  auto* sweep = app.add_subcommand("sweep", "Stability and observables over an (a, b) grid");
  sweep->add_option("--a-values", c.a_values, "Comma-separated a values")->delimiter(',')->required();
  sweep->add_option("--b-values", c.b_values, "Comma-separated b values")->delimiter(',')->required();
  sweep->add_option("--sigma", c.sigma, "Kerr sign: 1 focusing, -1 defocusing")->capture_default_str();
  add_grid(sweep);
  sweep->add_option("--disc", c.disc, "fourier or fd")->capture_default_str();
  sweep->add_option("--tol", c.tol, "Growth threshold (default 1e-6*(1+|lambda|) per point)");
  sweep->add_option("--workers", c.workers, "Concurrent points (0: all cores)")->capture_default_str();
  add_out(sweep);

  try {
    // --config is resolved before parsing so its values can be spliced in
    // ahead of the explicit flags.
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        config_path = args[i + 1];
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_path = args[i].substr(9);
      }
    }
    if (!config_path.empty()) args = detail::apply_config(args, app, parse_config_file(config_path));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::Success& e) {
      std::ostringstream o, eo;
      const int code = app.exit(e, o, eo);
      out << o.str();
      err << eo.str();
      return code;
    } catch (const CLI::ParseError& e) {
      std::ostringstream o, eo;
      app.exit(e, o, eo);
      err << eo.str() << o.str() << app.help();
      return kValidation;
    }

    if (*potential) return detail::cmd_potential(c, out);
    if (*mode) return detail::cmd_mode(c, out);
    if (*linear) return detail::cmd_spectrum_linear(c, out);
    if (*obs) return detail::cmd_observables(c, out);
    if (*stab) return detail::cmd_stability(c, out);
    if (*prop) return detail::cmd_propagate(c, out);
    if (*sweep) return detail::cmd_sweep(c, out);
    err << app.help();
    return kValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace ptrm::cli
