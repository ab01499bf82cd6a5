// rosefract command line. Exit codes: 0 ok / within tolerance, 2 outside
// tolerance, 1 execution error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "rosefract/rosefract.hpp"

namespace rf = rosefract;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kOutside = 2;

std::pair<double, double> parse_range(const std::string &s, const char *flag) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    throw CLI::ValidationError(flag, "expected lo:hi, got '" + s + "'");
  }
  try {
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
  } catch (const std::exception &) {
    throw CLI::ValidationError(flag, "expected lo:hi, got '" + s + "'");
  }
}

std::vector<double> parse_rho_grid(const std::string &s) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception &) {
      parts.clear();
      break;
    }
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw CLI::ValidationError("--rho-grid", "expected lo:hi:step with step > 0, got '" + s + "'");
  }
  std::vector<double> grid;
  for (int k = 0; parts[0] + k * parts[2] <= parts[1] + 1e-9; ++k) {
    grid.push_back(parts[0] + k * parts[2]);
  }
  return grid;
}

std::string sidecar_for(const std::string &csv) {
  return std::filesystem::path(csv).replace_extension(".json").string();
}

// Path CSV plus its sidecar; --H overrides the sidecar.
rf::SamplePath load_path(const std::string &file, double hurst_override) {
  double hurst = hurst_override;
  if (!(hurst > 0.0)) {
    const auto side = sidecar_for(file);
    if (!std::filesystem::exists(side)) {
      throw std::runtime_error("no sidecar " + side + "; pass --H");
    }
    auto in = rf::open_input(side);
    hurst = rf::json::parse(in).at("H").get<double>();
  }
  auto in = rf::open_input(file);
  return rf::read_path_csv(in, hurst);
}

template <class Writer>
void emit(const std::string &out, Writer write) {
  if (out.empty() || out == "-") {
    write(std::cout);
    return;
  }
  auto os = rf::open_output(out);
  write(os);
}

std::string header_of(const std::string &file) {
  auto in = rf::open_input(file);
  std::string line;
  std::getline(in, line);
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  return line;
}

// Fails before any simulation when the output directory cannot be created.
void prepare_output(const std::string &out_dir) {
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
  }
}

int finish(const rf::ResultBundle &bundle, const std::string &out_dir) {
  if (!out_dir.empty()) {
    bundle.write(out_dir);
  }
  std::cout << bundle.summary();
  for (const auto &c : bundle.checks) {
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value
              << " target=" << c.target << " tol=" << c.tolerance << '\n';
  }
  return bundle.passed() ? kOk : kOutside;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Rosenblatt process simulator and fractal dimension estimators"};
  app.set_version_flag("--version", std::string(rf::kVersionTag));
  app.require_subcommand(1);

  // simulate
  auto *sim = app.add_subcommand("simulate", "simulate one path, write t,z CSV and JSON sidecar");
  double sim_h = 0.7;
  std::size_t sim_n = 1 << 14;
  double sim_t = 1.0;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  sim->add_option("--H", sim_h, "Hurst index in (1/2, 1)")->required();
  sim->add_option("--n", sim_n, "number of steps")->capture_default_str();
  sim->add_option("--T", sim_t, "horizon")->capture_default_str();
  sim->add_option("--seed", sim_seed, "seed")->capture_default_str();
  sim->add_option("--out", sim_out, "output CSV; sidecar written next to it")->required();

  // sojourn
  auto *soj = app.add_subcommand("sojourn", "sojourn set {t : |Z(t)| <= scale t^gamma} of a path");
  std::string soj_path, soj_out;
  double soj_gamma = 0.0, soj_scale = 1.0, soj_h = 0.0;
  bool soj_pixels = false;
  soj->add_option("--path", soj_path, "path CSV")->required()->check(CLI::ExistingFile);
  soj->add_option("--gamma", soj_gamma, "exponent gamma")->required();
  soj->add_option("--scale", soj_scale, "threshold multiplier")->capture_default_str();
  soj->add_option("--H", soj_h, "Hurst index (default: from sidecar)");
  soj->add_flag("--pixels", soj_pixels, "write unit cells (header cell) instead of intervals");
  soj->add_option("--out", soj_out, "output CSV (default stdout)");

  // levelset
  auto *lev = app.add_subcommand("levelset", "delta-band level set {t : |Z(t) - x| <= delta}");
  std::string lev_path, lev_out, lev_window;
  double lev_x = 0.0, lev_delta = 0.0, lev_lambda = 1.0, lev_h = 0.0;
  lev->add_option("--path", lev_path, "path CSV")->required()->check(CLI::ExistingFile);
  lev->add_option("--x", lev_x, "level")->capture_default_str();
  lev->add_option("--delta", lev_delta, "band half-width (default: lambda * increment std)");
  lev->add_option("--lambda", lev_lambda, "band multiplier when --delta is absent")
      ->capture_default_str();
  lev->add_option("--window", lev_window, "restrict to lo:hi");
  lev->add_option("--H", lev_h, "Hurst index (default: from sidecar)");
  lev->add_option("--out", lev_out, "output CSV (default stdout)");

  // dims
  auto *dims = app.add_subcommand("dims", "dimension estimate of an interval or point set");
  std::string dims_in, dims_scales = "0.0009765625:0.125", dims_method = "box";
  double dims_theta = 1.0, dims_m = 1.0;
  dims->add_option("input", dims_in, "IntervalSet CSV (a,b) or points CSV (x)")
      ->required()
      ->check(CLI::ExistingFile);
  dims->add_option("--theta", dims_theta, "theta in (0, 1]")->capture_default_str();
  dims->add_option("--m", dims_m, "profile parameter m in (0, 1]")->capture_default_str();
  dims->add_option("--scales", dims_scales, "scale window lo:hi")->capture_default_str();
  dims->add_option("--method", dims_method, "estimator")
      ->check(CLI::IsMember({"box", "intermediate", "profile", "packing"}))
      ->capture_default_str();

  // macro
  auto *mac = app.add_subcommand("macro", "macroscopic Hausdorff dimension of a pixel set");
  std::string mac_in, mac_rho = "0:1.2:0.05", mac_shells = "1:20";
  double mac_tol = 1e-9;
  mac->add_option("input", mac_in, "PixelSet CSV (cell) or IntervalSet CSV (a,b)")
      ->required()
      ->check(CLI::ExistingFile);
  mac->add_option("--rho-grid", mac_rho, "lo:hi:step")->capture_default_str();
  mac->add_option("--shells", mac_shells, "lo:hi")->capture_default_str();
  mac->add_option("--slope-tolerance", mac_tol, "slope root tolerance")->capture_default_str();

  // verify
  auto *ver = app.add_subcommand("verify", "process law checks: covariance, scaling, inversion");
  double ver_h = 0.7;
  std::size_t ver_n = 1 << 14, ver_r = 2000;
  std::uint64_t ver_seed = 1;
  std::string ver_out;
  ver->add_option("--H", ver_h, "Hurst index")->capture_default_str();
  ver->add_option("--n", ver_n, "steps per unit time")->capture_default_str();
  ver->add_option("--replicas", ver_r, "replicas")->capture_default_str();
  ver->add_option("--seed", ver_seed, "master seed")->capture_default_str();
  ver->add_option("--out", ver_out, "output directory");

  // experiment
  auto *exp = app.add_subcommand("experiment", "run an experiment config");
  std::string exp_config, exp_out;
  exp->add_option("--config", exp_config, "config JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", exp_out, "output directory (overrides output_dir)");

  // selftest
  auto *self = app.add_subcommand("selftest", "exact optimisers against brute-force oracles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kError;
  }

  try {
    if (*sim) {
      const auto path = rf::simulate_path(rf::RosenblattParams{rf::HurstParam(sim_h), sim_n, sim_t},
                                          sim_seed);
      {
        auto os = rf::open_output(sim_out);
        rf::write_path_csv(os, path);
      }
      auto os = rf::open_output(sidecar_for(sim_out));
      os << rf::path_sidecar(path, sim_t).dump(2) << '\n';
      return kOk;
    }
    if (*soj) {
      const auto path = load_path(soj_path, soj_h);
      const auto set = rf::sojourn_set(path, rf::SojournParams{soj_gamma, soj_scale});
      emit(soj_out, [&](std::ostream &os) {
        if (soj_pixels) {
          rf::write_pixel_csv(os, rf::pixelize(set));
        } else {
          rf::write_interval_csv(os, set);
        }
      });
      return kOk;
    }
    if (*lev) {
      const auto path = load_path(lev_path, lev_h);
      const double delta = lev_delta > 0.0 ? lev_delta : rf::default_level_band(path, lev_lambda);
      auto set = rf::level_set(path, rf::LevelParams{lev_x, delta});
      if (!lev_window.empty()) {
        const auto [lo, hi] = parse_range(lev_window, "--window");
        set = rf::restrict(set, lo, hi);
      }
      emit(lev_out, [&](std::ostream &os) { rf::write_interval_csv(os, set); });
      return kOk;
    }
    if (*dims) {
      const auto [lo, hi] = parse_range(dims_scales, "--scales");
      const auto header = header_of(dims_in);
      auto estimate = [&](const auto &set) {
        if (dims_method == "box") {
          return rf::box_dim_estimate(set, lo, hi);
        }
        if (dims_method == "packing") {
          return rf::packing_predim_estimate(set, lo, hi);
        }
        if (dims_method == "intermediate") {
          return rf::intermediate_dim_estimate(set, dims_theta, lo, hi);
        }
        return rf::profile_dim_estimate(set, dims_theta, dims_m, lo, hi);
      };
      rf::DimensionEstimate est;
      auto in = rf::open_input(dims_in);
      if (header == "a,b") {
        est = estimate(rf::read_interval_csv(in));
      } else if (header == "x") {
        const auto pts = rf::read_points_csv(in);
        est = estimate(std::span<const double>(pts));
      } else {
        throw rf::FormatError("dims: expected header a,b or x, got '" + header + "'");
      }
      std::cout << rf::to_json(est).dump(2) << '\n';
      return kOk;
    }
    if (*mac) {
      const auto [slo, shi] = parse_range(mac_shells, "--shells");
      rf::MacroParams p;
      p.rho_grid = parse_rho_grid(mac_rho);
      p.shell_lo = static_cast<int>(slo);
      p.shell_hi = static_cast<int>(shi);
      p.slope_tolerance = mac_tol;
      const auto header = header_of(mac_in);
      auto in = rf::open_input(mac_in);
      rf::PixelSet pixels;
      if (header == "cell") {
        pixels = rf::read_pixel_csv(in);
      } else if (header == "a,b") {
        pixels = rf::pixelize(rf::read_interval_csv(in));
      } else {
        throw rf::FormatError("macro: expected header cell or a,b, got '" + header + "'");
      }
      const auto table = rf::macro_table(pixels, p);
      rf::json shells = rf::json::array();
      for (std::size_t j = 0; j < table.shells.size(); ++j) {
        rf::json nu = rf::json::array();
        for (std::size_t k = 0; k < table.rho_grid.size(); ++k) {
          nu.push_back(table.log2_nu[k][j]);
        }
        shells.push_back({{"shell", table.shells[j]}, {"log2_nu", nu}});
      }
      rf::json out{{"rho_grid", table.rho_grid}, {"shells", shells}};
      out["slopes"] = table.slopes;
      out["estimate"] = rf::to_json(rf::dimh_estimate(pixels, p));
      std::cout << out.dump(2) << '\n';
      return kOk;
    }
    if (*ver) {
      rf::json cfg{{"kind", "verify-process"},
                   {"H", ver_h},
                   {"n", ver_n},
                   {"replicas", ver_r},
                   {"seed", ver_seed}};
      prepare_output(ver_out);
      return finish(rf::run(cfg), ver_out);
    }
    if (*exp) {
      auto in = rf::open_input(exp_config);
      const auto cfg = rf::parse_config(rf::json::parse(in));
      const auto out_dir = exp_out.empty() ? cfg.output_dir : exp_out;
      prepare_output(out_dir);
      return finish(rf::run(cfg), out_dir);
    }
    if (*self) {
      return finish(rf::run(rf::json{{"kind", "oracle-selftest"}}), "");
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
