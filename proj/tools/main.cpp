// Command-line front end: simulate, rh-wave, solve-steady, distance, probe, stability.
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vortsphere/coeff_io.hpp"
#include "vortsphere/diagnostics.hpp"
#include "vortsphere/dynamics.hpp"
#include "vortsphere/elliptic.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/rearrange.hpp"
#include "vortsphere/stability.hpp"
#include "vortsphere/transform.hpp"
#include "vortsphere/version.hpp"
#include "vortsphere/waves.hpp"

namespace fs = std::filesystem;
using namespace vortsphere;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON configuration file");
  sub->add_option("--seed", c.seed, "random seed (overrides the config)");
  sub->add_option("--output", c.output, "output directory (overrides output_path)");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? experiment_config_from_json("{}") : load_experiment_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.output.empty()) cfg.output_path = c.output;
  cfg.validate();
  return cfg;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name);
  if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
  return out;
}

int run_simulate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const BaseState base = build_base_state(cfg.base_state, cfg.sim.J, cfg.sim.Omega, cfg.seed);
  const PerturbedState start = perturb(base.zeta, cfg.perturbation, cfg.seed);
  const std::string dir = cfg.output_path.empty() ? "." : cfg.output_path;
  std::ofstream csv = open_out(dir, "diagnostics.csv");
  csv << diagnostics_csv_header(cfg.sim) << "\n";
  SpectralField last = start.zeta;
  std::string status = "ok";
  int code = kOk;
  try {
    simulate(start.zeta, cfg.sim, [&](const TrajectoryRecord& r) {
      csv << diagnostics_csv_row(r) << "\n";
      last = r.zeta;
    });
  } catch (const BlowUpError& e) {
    status = std::string("blow-up: ") + e.what();
    code = kNumerical;
  }
  csv.close();
  save_coeffs((fs::path(dir) / "final.txt").string(), last);
  write_manifest(dir, "simulate", experiment_config_to_json(cfg), cfg.seed, {"diagnostics.csv", "final.txt"}, status);
  std::cout << status << "\n";
  return code;
}

int run_rh_wave(const Common& c, std::optional<std::size_t> degree, std::optional<double> alpha) {
  ExperimentConfig cfg = load(c);
  if (cfg.base_state.kind != BaseStateSpec::Kind::rh_wave) throw ConfigError("rh-wave needs an rh-wave base_state");
  if (degree) cfg.base_state.degree = *degree;
  if (alpha) cfg.base_state.alpha = *alpha;
  cfg.validate();
  RHWaveSpec w = rh_preset("rh-j" + std::to_string(cfg.base_state.degree), cfg.sim.J, cfg.base_state.alpha,
                           cfg.sim.Omega, cfg.base_state.coeffs);
  w.Y *= cfg.base_state.amplitude;
  const double residual = rh_residual(w, simulation_grid(cfg.sim));
  const std::string dir = cfg.output_path.empty() ? "." : cfg.output_path;
  std::ofstream csv = open_out(dir, "rh_wave.csv");
  csv << "t,error_L2,E,enstrophy\n";
  double worst = 0.0;
  std::string status = "ok";
  int code = kOk;
  try {
    simulate(exact_rh_solution(w, 0.0), cfg.sim, [&](const TrajectoryRecord& r) {
      const double err = l2_norm(r.zeta - exact_rh_solution(w, r.t));
      worst = std::max(worst, err);
      csv << fmt(r.t) << "," << fmt(err) << "," << fmt(r.diag.energy) << "," << fmt(r.diag.enstrophy) << "\n";
    });
  } catch (const BlowUpError& e) {
    status = std::string("blow-up: ") + e.what();
    code = kNumerical;
  }
  csv.close();
  write_manifest(dir, "rh-wave", experiment_config_to_json(cfg), cfg.seed, {"rh_wave.csv"}, status);
  std::cout << "rotation_rate," << fmt(w.beta + w.Omega) << "\nresidual," << fmt(residual) << "\nmax_error_L2,"
            << fmt(worst) << "\n";
  return code;
}

int run_solve_steady(const Common& c) {
  ExperimentConfig cfg = load(c);
  if (cfg.base_state.kind != BaseStateSpec::Kind::steady_solve)
    throw ConfigError("solve-steady needs a steady-solve base_state");
  const std::string dir = cfg.output_path.empty() ? "." : cfg.output_path;
  fs::create_directories(dir);
  BaseState base;
  try {
    base = build_base_state(cfg.base_state, cfg.sim.J, 0.0, cfg.seed);
  } catch (const NumericalFailure& e) {
    write_manifest(dir, "solve-steady", experiment_config_to_json(cfg), cfg.seed, {}, e.what());
    throw;
  }
  const SteadyState& s = *base.steady;
  const Vec3 p = normalized(cfg.base_state.p);
  const NonlinearitySpec g = cfg.base_state.table_path.empty() ? nonlinearity_preset(cfg.base_state.nonlinearity)
                                                               : nonlinearity_from_table(cfg.base_state.table_path);
  const double defect = l2_norm(s.zeta) > 0 ? zonality_defect(s.zeta, p) : 0.0;
  const double gap = spectral_gap(g, s.beta, p, s.zeta);
  save_coeffs((fs::path(dir) / "steady.txt").string(), s.zeta);
  std::ofstream csv = open_out(dir, "steady_summary.csv");
  csv << "iterations,converged,residual,zonality_defect,spectral_gap,E,mean_shift\n";
  csv << s.iterations << "," << (s.converged ? 1 : 0) << "," << fmt(s.residual) << "," << fmt(defect) << ","
      << fmt(gap) << "," << fmt(energy(s.zeta)) << "," << fmt(s.max_mean_shift) << "\n";
  csv.close();
  write_manifest(dir, "solve-steady", experiment_config_to_json(cfg), cfg.seed, {"steady.txt", "steady_summary.csv"},
                 "ok");
  std::cout << "residual," << fmt(s.residual) << "\nzonality_defect," << fmt(defect) << "\n";
  return kOk;
}

int run_distance(const Common& c, const std::string& a_path, const std::string& b_path, const std::string& task,
                 double p, double kappa) {
  const SpectralField a = load_coeffs(a_path), b = load_coeffs(b_path);
  std::string header = "task,p,distance,class_violation";
  std::string row;
  if (task == "class") {
    const std::size_t J = std::max(a.truncation(), b.truncation());
    const Grid g = class_grid(J);
    row = fmt(class_distance(synthesize(a.resized(J), g), synthesize(b.resized(J), g), p)) + ",0";
  } else if (task == "plain-Lp") {
    row = fmt(lp_distance(a, b, p)) + ",0";
  } else if (task == "orbit-H" || task == "orbit-SO3") {
    const OrbitDistanceReport r = orbit_distance(a, b, task == "orbit-H" ? RotationGroup::H : RotationGroup::SO3, p);
    row = fmt(r.distance) + ",0";
  } else if (task == "e2-orbit") {
    E2SearchOptions o;
    o.kappa = kappa;
    const OrbitDistanceReport r = e2_orbit_distance(a, b, p, o);
    row = fmt(r.distance) + "," + fmt(r.class_violation);
  } else {
    throw ConfigError("unknown distance task '" + task + "'");
  }
  row = task + "," + fmt(p) + "," + row;
  std::cout << header << "\n" << row << "\n";
  if (!c.output.empty()) {
    std::ofstream csv = open_out(c.output, "distance.csv");
    csv << header << "\n" << row << "\n";
    csv.close();
    const std::string args = "{\"a\":\"" + a_path + "\",\"b\":\"" + b_path + "\",\"task\":\"" + task +
                             "\",\"p\":" + fmt(p) + ",\"kappa\":" + fmt(kappa) + "}";
    write_manifest(c.output, "distance", args, c.seed.value_or(0), {"distance.csv"}, "ok");
  }
  return kOk;
}

int run_probe(const Common& c, const std::string& state, const std::string& mode, std::size_t samples, double eps,
              double allowance) {
  ExperimentConfig cfg = load(c);
  SpectralField zeta = state.empty() ? build_base_state(cfg.base_state, cfg.sim.J, 0.0, cfg.seed).zeta
                                     : load_coeffs(state).resized(cfg.sim.J);
  if (mode != "min" && mode != "max") throw ConfigError("--mode must be min or max");
  ProbeOptions opts;
  opts.seed = cfg.seed;
  opts.allowance = allowance;
  const ProbeReport r = extremality_probe(zeta, mode == "min" ? ProbeMode::min : ProbeMode::max, samples, eps, opts);
  const std::string dir = cfg.output_path.empty() ? "." : cfg.output_path;
  std::ofstream csv = open_out(dir, "probe.csv");
  csv << "sample,energy_change,augmented_change\n";
  for (std::size_t k = 0; k < r.energy_changes.size(); ++k)
    csv << k << "," << fmt(r.energy_changes[k]) << "," << fmt(r.augmented_changes[k]) << "\n";
  csv.close();
  write_manifest(dir, "probe", experiment_config_to_json(cfg), cfg.seed, {"probe.csv"},
                 r.passed() ? "pass" : "fail");
  std::cout << "samples," << r.samples << "\nskipped," << r.skipped << "\nviolations," << r.violations
            << "\nworst_signed_change," << fmt(r.worst_signed_change) << "\nworst_signed_augmented,"
            << fmt(r.worst_signed_augmented) << "\ntolerance," << fmt(r.tolerance) << "\nresult,"
            << (r.passed() ? "pass" : "fail") << "\n";
  return kOk;
}

int run_stability(const Common& c) {
  ExperimentConfig cfg = load(c);
  if (cfg.output_path.empty()) cfg.output_path = ".";
  const StabilityTimeSeries s = run_stability_experiment(cfg);
  for (std::size_t k = 0; k < s.columns.size(); ++k)
    std::cout << "max_" << s.columns[k] << "," << fmt(s.max_distance(k)) << "\n";
  if (s.blew_up) {
    std::cerr << "numerical failure: " << s.failure << "\n";
    return kNumerical;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barotropic vorticity on the sphere: simulation, steady states and stability experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  auto* simulate_cmd = app.add_subcommand("simulate", "integrate a base state and write diagnostics");
  add_common(simulate_cmd, common);

  std::optional<std::size_t> degree;
  std::optional<double> alpha;
  auto* rh_cmd = app.add_subcommand("rh-wave", "compare a simulated Rossby-Haurwitz wave with its exact motion");
  add_common(rh_cmd, common);
  rh_cmd->add_option("--degree", degree, "wave degree");
  rh_cmd->add_option("--alpha", alpha, "coefficient of x3");

  auto* steady_cmd = app.add_subcommand("solve-steady", "solve zeta = g(G zeta + beta p.x) by damped iteration");
  add_common(steady_cmd, common);

  std::string a_path, b_path, task = "plain-Lp";
  double p = 2.0, kappa = 10.0;
  auto* dist_cmd = app.add_subcommand("distance", "distance between two coefficient files");
  add_common(dist_cmd, common);
  dist_cmd->add_option("a", a_path, "first coefficient file")->required()->check(CLI::ExistingFile);
  dist_cmd->add_option("b", b_path, "second coefficient file")->required()->check(CLI::ExistingFile);
  dist_cmd->add_option("--task", task, "class | plain-Lp | orbit-H | orbit-SO3 | e2-orbit");
  dist_cmd->add_option("--p", p, "exponent in (1, inf)");
  dist_cmd->add_option("--kappa", kappa, "class weight for e2-orbit");

  std::string state, mode = "min";
  std::size_t samples = 64;
  double eps = 1e-2, allowance = ProbeOptions{}.allowance;
  auto* probe_cmd = app.add_subcommand("probe", "energy extremality probe along area-preserving flows");
  add_common(probe_cmd, common);
  probe_cmd->add_option("--state", state, "coefficient file (default: base_state of the config)");
  probe_cmd->add_option("--mode", mode, "min | max");
  probe_cmd->add_option("--samples", samples, "number of random directions");
  probe_cmd->add_option("--eps", eps, "flow time");
  probe_cmd->add_option("--allowance", allowance, "second-order tolerance constant");

  auto* stab_cmd = app.add_subcommand("stability", "perturb, evolve and record orbit distances");
  add_common(stab_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate_cmd) return run_simulate(common);
    if (*rh_cmd) return run_rh_wave(common, degree, alpha);
    if (*steady_cmd) return run_solve_steady(common);
    if (*dist_cmd) return run_distance(common, a_path, b_path, task, p, kappa);
    if (*probe_cmd) return run_probe(common, state, mode, samples, eps, allowance);
    if (*stab_cmd) return run_stability(common);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n\n" << experiment_config_schema();
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
