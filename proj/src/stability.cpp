#include "vortsphere/stability.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "vortsphere/coeff_io.hpp"
#include "vortsphere/diagnostics.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/rotation.hpp"
#include "vortsphere/version.hpp"

namespace vortsphere {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Object reader that rejects unknown keys and wrong types.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  // Call after reading: rejects keys nobody asked for.
  void done() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return where_ + "." + key; }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + ": wrong type");
    }
  }
  void read_number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_number()) throw ConfigError(path(key) + ": expected a number");
    out = j_.at(key).get<double>();
  }
  void read_count(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
    out = j_.at(key).get<std::size_t>();
  }
  void read_vec3(const std::string& key, Vec3& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 3) throw ConfigError(path(key) + ": expected [x, y, z]");
    for (int k = 0; k < 3; ++k) {
      if (!v[k].is_number()) throw ConfigError(path(key) + ": expected numbers");
      out[k] = v[k].get<double>();
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string kind_name(BaseStateSpec::Kind k) {
  switch (k) {
    case BaseStateSpec::Kind::rh_wave: return "rh-wave";
    case BaseStateSpec::Kind::steady_solve: return "steady-solve";
    case BaseStateSpec::Kind::coefficient_file: return "coefficient-file";
  }
  return "";
}

std::string kind_name(PerturbationSpec::Kind k) {
  switch (k) {
    case PerturbationSpec::Kind::none: return "none";
    case PerturbationSpec::Kind::spectral_noise: return "spectral-noise";
    case PerturbationSpec::Kind::flow: return "flow";
  }
  return "";
}

std::string kind_name(DistanceTask::Kind k) {
  switch (k) {
    case DistanceTask::Kind::plain_lp: return "plain-Lp";
    case DistanceTask::Kind::orbit_h: return "orbit-H";
    case DistanceTask::Kind::orbit_so3: return "orbit-SO3";
    case DistanceTask::Kind::e2_orbit: return "e2-orbit";
  }
  return "";
}

BaseStateSpec parse_base(const json& j) {
  Fields f(j, "base_state");
  BaseStateSpec b;
  std::string kind = "rh-wave";
  f.read("kind", kind);
  if (kind == "rh-wave") {
    b.kind = BaseStateSpec::Kind::rh_wave;
  } else if (kind == "steady-solve") {
    b.kind = BaseStateSpec::Kind::steady_solve;
  } else if (kind == "coefficient-file") {
    b.kind = BaseStateSpec::Kind::coefficient_file;
  } else {
    throw ConfigError("base_state.kind: expected rh-wave, steady-solve or coefficient-file");
  }
  f.read_count("degree", b.degree);
  f.read_number("alpha", b.alpha);
  f.read_number("amplitude", b.amplitude);
  if (f.has("coeffs")) {
    const json& list = f.at("coeffs");
    if (!list.is_array()) throw ConfigError("base_state.coeffs: expected a list");
    for (const json& c : list) {
      Fields cf(c, "base_state.coeffs[]");
      YCoefficient y;
      double m = 0;
      cf.read_number("m", m);
      if (m < 0 || m != std::floor(m)) throw ConfigError("base_state.coeffs[].m: expected an integer >= 0");
      y.m = static_cast<int>(m);
      cf.read_number("re", y.re);
      cf.read_number("im", y.im);
      cf.done();
      b.coeffs.push_back(y);
    }
  }
  f.read("nonlinearity", b.nonlinearity);
  f.read("table", b.table_path);
  f.read_number("beta", b.beta);
  f.read_vec3("p", b.p);
  f.read_count("init_J_max", b.init_J_max);
  f.read_number("relax", b.solver.relax);
  f.read_number("tol", b.solver.tol);
  f.read_count("max_iter", b.solver.max_iter);
  f.read("path", b.path);
  f.read_vec3("rotation", b.rotation);
  f.done();
  return b;
}

PerturbationSpec parse_perturbation(const json& j) {
  Fields f(j, "perturbation");
  PerturbationSpec p;
  std::string kind = "spectral-noise";
  f.read("kind", kind);
  if (kind == "none") {
    p.kind = PerturbationSpec::Kind::none;
  } else if (kind == "spectral-noise") {
    p.kind = PerturbationSpec::Kind::spectral_noise;
  } else if (kind == "flow") {
    p.kind = PerturbationSpec::Kind::flow;
  } else {
    throw ConfigError("perturbation.kind: expected none, spectral-noise or flow");
  }
  f.read_number("delta", p.delta);
  f.read_count("J_max", p.J_max);
  f.read_number("p", p.p);
  f.read_number("eps", p.eps);
  if (f.has("seed")) {
    if (!f.at("seed").is_number_unsigned()) throw ConfigError("perturbation.seed: expected a non-negative integer");
    p.seed = f.at("seed").get<std::uint64_t>();
  }
  f.done();
  return p;
}

SimConfig parse_sim(const json& j) {
  Fields f(j, "sim");
  SimConfig s;
  f.read_count("J", s.J);
  f.read_number("Omega", s.Omega);
  f.read_number("dt", s.dt);
  f.read_number("t_end", s.t_end);
  f.read_count("diag_every", s.diag_every);
  f.read("dealias", s.dealias);
  f.read("p_list", s.p_list);
  f.read_count("casimir_order", s.casimir_order);
  f.read_number("damping", s.damping);
  f.done();
  return s;
}

DistanceTask parse_task(const json& j) {
  DistanceTask t;
  std::string kind;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else {
    Fields f(j, "distance_tasks[]");
    f.read("kind", kind);
    f.read_number("p", t.p);
    f.done();
  }
  if (kind == "plain-Lp") {
    t.kind = DistanceTask::Kind::plain_lp;
  } else if (kind == "orbit-H") {
    t.kind = DistanceTask::Kind::orbit_h;
  } else if (kind == "orbit-SO3") {
    t.kind = DistanceTask::Kind::orbit_so3;
  } else if (kind == "e2-orbit") {
    t.kind = DistanceTask::Kind::e2_orbit;
  } else {
    throw ConfigError("distance_tasks: unknown task '" + kind + "'");
  }
  return t;
}

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

std::string fnv1a64_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

SpectralField rotate_by(const SpectralField& a, const Vec3& omega, double t) {
  const double rate = norm(omega);
  if (rate == 0.0 || t == 0.0) return a;
  if (omega[0] == 0.0 && omega[1] == 0.0) return rotate_about_e3(a, omega[2] * t);
  return rotate(a, RotationSpec(normalized(omega), rate * t));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string DistanceTask::name() const {
  std::string base;
  switch (kind) {
    case Kind::plain_lp: base = "plain"; break;
    case Kind::orbit_h: base = "orbit_H"; break;
    case Kind::orbit_so3: base = "orbit_SO3"; break;
    case Kind::e2_orbit: base = "e2_orbit"; break;
  }
  return base + "_L" + format_p(p);
}

void ExperimentConfig::validate() const {
  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("sim: ") + e.what());
  }
  if (distance_every == 0) throw ConfigError("distance_every must be >= 1");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
  for (const DistanceTask& t : distance_tasks)
    if (!(t.p > 1.0) || !std::isfinite(t.p)) throw ConfigError("distance_tasks: p must lie in (1, inf)");
  if (!(perturbation.delta >= 0.0)) throw ConfigError("perturbation.delta must be >= 0");
  if (!(perturbation.p > 1.0) || !std::isfinite(perturbation.p)) throw ConfigError("perturbation.p must lie in (1, inf)");
  if (!std::isfinite(perturbation.eps)) throw ConfigError("perturbation.eps must be finite");
  if (perturbation.J_max == 0) throw ConfigError("perturbation.J_max must be >= 1");
  const BaseStateSpec& b = base_state;
  switch (b.kind) {
    case BaseStateSpec::Kind::rh_wave:
      if (b.degree == 0 || b.degree > sim.J) throw ConfigError("base_state.degree must lie in 1..J");
      break;
    case BaseStateSpec::Kind::steady_solve:
      if (norm(b.p) == 0.0) throw ConfigError("base_state.p must be nonzero");
      if (b.init_J_max == 0) throw ConfigError("base_state.init_J_max must be >= 1");
      break;
    case BaseStateSpec::Kind::coefficient_file:
      if (b.path.empty()) throw ConfigError("base_state.path is required for coefficient-file");
      break;
  }
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  {
    Fields f(j, "config");
    if (f.has("base_state")) cfg.base_state = parse_base(f.at("base_state"));
    if (f.has("perturbation")) cfg.perturbation = parse_perturbation(f.at("perturbation"));
    if (f.has("sim")) cfg.sim = parse_sim(f.at("sim"));
    if (f.has("distance_tasks")) {
      const json& list = f.at("distance_tasks");
      if (!list.is_array()) throw ConfigError("distance_tasks: expected a list");
      cfg.distance_tasks.clear();
      for (const json& t : list) cfg.distance_tasks.push_back(parse_task(t));
    }
    f.read_count("distance_every", cfg.distance_every);
    f.read_number("kappa", cfg.kappa);
    if (f.has("seed")) {
      if (!f.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
      cfg.seed = f.at("seed").get<std::uint64_t>();
    }
    f.read("snapshots", cfg.snapshots);
    f.read("output_path", cfg.output_path);
    f.done();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_config_from_json(ss.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  const BaseStateSpec& b = cfg.base_state;
  json base = {{"kind", kind_name(b.kind)}};
  switch (b.kind) {
    case BaseStateSpec::Kind::rh_wave: {
      json coeffs = json::array();
      for (const YCoefficient& c : b.coeffs) coeffs.push_back({{"m", c.m}, {"re", c.re}, {"im", c.im}});
      base.update({{"degree", b.degree}, {"alpha", b.alpha}, {"amplitude", b.amplitude}, {"coeffs", coeffs}});
      break;
    }
    case BaseStateSpec::Kind::steady_solve:
      base.update({{"nonlinearity", b.nonlinearity},
                   {"table", b.table_path},
                   {"beta", b.beta},
                   {"p", b.p},
                   {"init_J_max", b.init_J_max},
                   {"relax", b.solver.relax},
                   {"tol", b.solver.tol},
                   {"max_iter", b.solver.max_iter}});
      break;
    case BaseStateSpec::Kind::coefficient_file:
      base.update({{"path", b.path}, {"rotation", b.rotation}});
      break;
  }
  const PerturbationSpec& p = cfg.perturbation;
  json pert = {{"kind", kind_name(p.kind)}, {"delta", p.delta}, {"J_max", p.J_max}, {"p", p.p}, {"eps", p.eps}};
  if (p.seed) pert["seed"] = *p.seed;
  const SimConfig& s = cfg.sim;
  json sim = {{"J", s.J},
              {"Omega", s.Omega},
              {"dt", s.dt},
              {"t_end", s.t_end},
              {"diag_every", s.diag_every},
              {"dealias", s.dealias},
              {"p_list", s.p_list},
              {"casimir_order", s.casimir_order},
              {"damping", s.damping}};
  json tasks = json::array();
  for (const DistanceTask& t : cfg.distance_tasks) tasks.push_back({{"kind", kind_name(t.kind)}, {"p", t.p}});
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  const json out = {{"base_state", base},         {"perturbation", pert},     {"sim", sim},
                    {"distance_tasks", tasks},    {"distance_every", cfg.distance_every},
                    {"kappa", cfg.kappa},         {"seed", cfg.seed},         {"snapshots", cfg.snapshots},
                    {"output_path", cfg.output_path}};
  return out.dump();
}

std::string experiment_config_schema() {
  return R"(Experiment configuration (JSON object; all keys optional unless noted):
  base_state:
    kind: "rh-wave" | "steady-solve" | "coefficient-file"
    rh-wave:          degree (1..J), alpha, amplitude, coeffs [{m, re, im}]
    steady-solve:     nonlinearity (preset: zero, linear:c, cubic, cubic:a:b, tanh:a:b),
                      table (two-column file, overrides nonlinearity), beta, p [x,y,z],
                      init_J_max, relax, tol, max_iter
    coefficient-file: path (required), rotation [wx,wy,wz]
  perturbation:
    kind: "none" | "spectral-noise" | "flow"
    delta (noise size in L^p), J_max, p, eps (flow time), seed
  sim: J, Omega, dt, t_end, diag_every, dealias, p_list, casimir_order, damping
  distance_tasks: list of "plain-Lp" | "orbit-H" | "orbit-SO3" | "e2-orbit"
                  or {kind, p}
  distance_every: diagnostic records between distance evaluations
  kappa: class weight of the e2-orbit proxy
  seed: random seed
  snapshots: write coefficient dumps at distance records
  output_path: output directory
)";
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a64_hex(experiment_config_to_json(cfg)); }

SpectralField BaseState::reference(double t) const { return rotate_by(zeta, rotation, t); }

BaseState build_base_state(const BaseStateSpec& spec, std::size_t J, double Omega, std::uint64_t seed) {
  BaseState out;
  switch (spec.kind) {
    case BaseStateSpec::Kind::rh_wave: {
      RHWaveSpec w;
      try {
        w = rh_preset("rh-j" + std::to_string(spec.degree), J, spec.alpha, Omega, spec.coeffs);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("base_state: ") + e.what());
      }
      w.Y *= spec.amplitude;
      out.zeta = exact_rh_solution(w, 0.0);
      out.rotation = {0.0, 0.0, w.beta + Omega};
      out.description = "rh-wave degree " + std::to_string(spec.degree);
      break;
    }
    case BaseStateSpec::Kind::steady_solve: {
      NonlinearitySpec g;
      try {
        g = spec.table_path.empty() ? nonlinearity_preset(spec.nonlinearity) : nonlinearity_from_table(spec.table_path);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("base_state: ") + e.what());
      }
      std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
      SpectralField init = random_band_limited(J, 1, spec.init_J_max, rng);
      init *= 1.0 / l2_norm(init);
      const Vec3 p = normalized(spec.p);
      SteadyState s = solve_fixed_point(g, spec.beta, p, init, spec.solver);
      if (!s.converged)
        throw NumericalFailure("steady solve did not converge (residual " + fmt(s.residual) + ")");
      out.zeta = s.zeta;
      for (int k = 0; k < 3; ++k) out.rotation[k] = spec.beta * p[k];
      out.rotation[2] += Omega;
      out.description = "steady state of " + g.name;
      out.steady = std::move(s);
      break;
    }
    case BaseStateSpec::Kind::coefficient_file: {
      try {
        out.zeta = load_coeffs(spec.path);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("base_state: ") + e.what());
      }
      out.zeta = out.zeta.resized(J);
      out.rotation = spec.rotation;
      out.description = "coefficients from " + spec.path;
      break;
    }
  }
  if (std::abs(out.zeta(0, 0)) > 1e-12 * std::max(1.0, l2_norm(out.zeta)))
    throw ConfigError("base_state: the base state must have zero mean");
  out.zeta(0, 0) = 0.0;
  return out;
}

PerturbedState perturb(const SpectralField& zeta, const PerturbationSpec& spec, std::uint64_t seed) {
  PerturbedState out{zeta, 0.0};
  const std::size_t J = zeta.truncation();
  std::mt19937_64 rng(spec.seed.value_or(seed));
  switch (spec.kind) {
    case PerturbationSpec::Kind::none:
      return out;
    case PerturbationSpec::Kind::spectral_noise: {
      if (spec.delta < 0.0) throw std::invalid_argument("perturb: delta must be >= 0");
      if (spec.delta == 0.0) return out;
      SpectralField eta = random_band_limited(J, 1, spec.J_max, rng);
      eta *= 1.0 / lp_distance(eta, SpectralField(J), spec.p);
      out.zeta = zeta + spec.delta * eta;
      break;
    }
    case PerturbationSpec::Kind::flow: {
      if (spec.eps == 0.0) return out;
      SpectralField chi = random_band_limited(J, 2, std::max<std::size_t>(spec.J_max, 2), rng);
      chi *= 1.0 / l2_norm(chi);
      out.zeta = flow_perturbation(zeta, chi, spec.eps);
      break;
    }
  }
  out.offset = lp_distance(out.zeta, zeta, spec.p);
  return out;
}

double StabilityTimeSeries::max_distance(std::size_t task) const {
  double worst = 0.0;
  for (const StabilityRecord& r : records) worst = std::max(worst, r.distances.at(task));
  return worst;
}

std::string stability_csv_header(const StabilityTimeSeries& series) {
  std::string h = "t";
  for (const std::string& c : series.columns) h += "," + c;
  h += ",class_violation,E_drift,m_drift,enstrophy_drift";
  return h;
}

std::string stability_csv_row(const StabilityRecord& rec) {
  std::string row = fmt(rec.t);
  for (double d : rec.distances) row += "," + fmt(d);
  row += "," + fmt(rec.class_violation) + "," + fmt(rec.energy_drift) + "," + fmt(rec.moment_drift) + "," +
         fmt(rec.enstrophy_drift);
  return row;
}

void write_manifest(const std::string& dir, const std::string& command, const std::string& config_json,
                    std::uint64_t seed, const std::vector<std::string>& outputs, const std::string& status) {
  json config;
  try {
    config = json::parse(config_json);
  } catch (const json::parse_error&) {
    config = config_json;
  }
  const json m = {{"command", command},
                  {"version", kVersion},
                  {"seed", seed},
                  {"config_hash", "fnv1a64:" + fnv1a64_hex(config_json)},
                  {"config", config},
                  {"outputs", outputs},
                  {"status", status}};
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << m.dump(2) << "\n";
}

StabilityTimeSeries run_stability_experiment(const ExperimentConfig& cfg, const StabilityCallback& on_record) {
  cfg.validate();
  const SimConfig& sim = cfg.sim;
  const BaseState base = build_base_state(cfg.base_state, sim.J, sim.Omega, cfg.seed);
  const PerturbedState start = perturb(base.zeta, cfg.perturbation, cfg.seed);

  StabilityTimeSeries series;
  for (const DistanceTask& t : cfg.distance_tasks) series.columns.push_back(t.name());
  series.initial_offset = start.offset;

  const bool writing = !cfg.output_path.empty();
  const fs::path dir(cfg.output_path);
  std::ofstream stab_csv, diag_csv;
  std::vector<std::string> outputs;
  if (writing) {
    fs::create_directories(dir);
    if (cfg.snapshots) fs::create_directories(dir / "snapshots");
    save_coeffs((dir / "base_state.txt").string(), base.zeta);
    stab_csv.open(dir / "stability.csv");
    diag_csv.open(dir / "diagnostics.csv");
    if (!stab_csv || !diag_csv) throw std::runtime_error("cannot write into " + cfg.output_path);
    stab_csv << stability_csv_header(series) << "\n";
    diag_csv << diagnostics_csv_header(sim) << "\n";
    outputs = {"base_state.txt", "stability.csv", "diagnostics.csv"};
  }

  const Diagnostics d0 = diagnostics(start.zeta, {}, 2);
  const double m0_norm = norm(d0.moment);
  const double m_scale = m0_norm > 1e-12 * l2_norm(start.zeta) ? m0_norm
                                                                : std::sqrt(4.0 * std::numbers::pi / 3.0) *
                                                                      std::max(l2_norm(start.zeta), 1e-300);
  const auto n_steps = static_cast<long long>(std::llround(sim.t_end / sim.dt));
  const double t_final = static_cast<double>(n_steps) * sim.dt;
  E2SearchOptions e2_opts;
  e2_opts.kappa = cfg.kappa;

  std::size_t index = 0;
  auto on_traj = [&](const TrajectoryRecord& rec) {
    if (writing) diag_csv << diagnostics_csv_row(rec) << "\n";
    const bool due = index % cfg.distance_every == 0 || rec.t == t_final;
    ++index;
    if (!due) return;
    StabilityRecord out;
    out.t = rec.t;
    bool have_class = false;
    for (const DistanceTask& task : cfg.distance_tasks) {
      double d = 0.0;
      switch (task.kind) {
        case DistanceTask::Kind::plain_lp:
          d = sim.Omega == 0.0 ? lp_distance(rec.zeta, base.reference(rec.t), task.p)
                               : orbit_distance(rec.zeta, base.reference(rec.t), RotationGroup::H, task.p).distance;
          break;
        case DistanceTask::Kind::orbit_h:
          d = orbit_distance(rec.zeta, base.zeta, RotationGroup::H, task.p).distance;
          break;
        case DistanceTask::Kind::orbit_so3:
          d = orbit_distance(rec.zeta, base.zeta, RotationGroup::SO3, task.p).distance;
          break;
        case DistanceTask::Kind::e2_orbit: {
          const OrbitDistanceReport r = e2_orbit_distance(rec.zeta, base.zeta, task.p, e2_opts);
          d = r.distance;
          if (!have_class) out.class_violation = r.class_violation;
          have_class = true;
          break;
        }
      }
      out.distances.push_back(d);
    }
    const Vec3 expected = RotationSpec({0.0, 0.0, 1.0}, -sim.Omega * rec.t).apply(d0.moment);
    const Vec3& m = rec.diag.moment;
    out.energy_drift = (rec.diag.energy - d0.energy) / std::max(std::abs(d0.energy), 1e-300);
    out.enstrophy_drift = (rec.diag.enstrophy - d0.enstrophy) / std::max(std::abs(d0.enstrophy), 1e-300);
    out.moment_drift = norm({m[0] - expected[0], m[1] - expected[1], m[2] - expected[2]}) / m_scale;
    if (writing) {
      stab_csv << stability_csv_row(out) << "\n";
      if (cfg.snapshots) {
        char name[40];
        std::snprintf(name, sizeof name, "zeta_%06zu.txt", series.records.size());
        save_coeffs((dir / "snapshots" / name).string(), rec.zeta);
      }
    }
    series.records.push_back(out);
    if (on_record) on_record(series.records.back());
  };

  try {
    simulate(start.zeta, sim, on_traj);
  } catch (const BlowUpError& e) {
    series.blew_up = true;
    series.failure = e.what();
  }

  if (writing) {
    stab_csv.close();
    diag_csv.close();
    if (cfg.snapshots) outputs.push_back("snapshots/");
    write_manifest(cfg.output_path, "stability", experiment_config_to_json(cfg), cfg.seed, outputs,
                   series.blew_up ? "blow-up: " + series.failure : "ok");
  }
  return series;
}

}  // namespace vortsphere
