#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/rearrange.hpp"
#include "vortsphere/stability.hpp"
#include "vortsphere/transform.hpp"

using namespace vortsphere;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("vortsphere_test_" + name);
  fs::remove_all(d);
  return d;
}

// Small, quick experiment on the degree-2 wave.
ExperimentConfig small_rh(double delta) {
  return experiment_config_from_json(R"({"base_state":{"kind":"rh-wave","degree":2,"alpha":1},
    "perturbation":{"delta":)" + std::to_string(delta) + R"(},
    "sim":{"J":10,"dt":1e-2,"t_end":0.5},"distance_tasks":["plain-Lp","orbit-H"],"distance_every":5})");
}

}  // namespace

TEST_CASE("config: defaults parse from an empty object") {
  const ExperimentConfig cfg = experiment_config_from_json("{}");
  CHECK(cfg.base_state.kind == BaseStateSpec::Kind::rh_wave);
  CHECK(cfg.distance_tasks.size() == 1);
  CHECK(cfg.distance_tasks[0].name() == "plain_L2");
  CHECK(cfg.seed == 1);
}

TEST_CASE("config: unknown keys and wrong types are rejected") {
  CHECK_THROWS_AS(experiment_config_from_json(R"({"bogus":1})"), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(R"({"sim":{"dtt":1e-3}})"), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(R"({"sim":{"dt":"small"}})"), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(R"({"base_state":{"kind":"vortex"}})"), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(R"({"distance_tasks":["orbit-Q"]})"), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(R"({"distance_tasks":[{"kind":"plain-Lp","p":1}]})"), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(R"({"seed":-3})"), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("config: canonical JSON round-trips and the hash tracks content") {
  ExperimentConfig cfg = experiment_config_from_json(R"({"base_state":{"kind":"steady-solve","beta":0.3,
    "nonlinearity":"cubic","p":[0,0,1]},"perturbation":{"kind":"flow","eps":0.05},
    "distance_tasks":[{"kind":"orbit-SO3","p":3},"e2-orbit"],"seed":7,"kappa":4})");
  const std::string text = experiment_config_to_json(cfg);
  const ExperimentConfig again = experiment_config_from_json(text);
  CHECK(experiment_config_to_json(again) == text);
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
  cfg.seed = 8;
  CHECK(config_hash(cfg) != config_hash(again));
  CHECK(again.distance_tasks[0].name() == "orbit_SO3_L3");
  CHECK(!experiment_config_schema().empty());
}

TEST_CASE("base state: reference motion of the degree-2 wave") {
  const ExperimentConfig cfg = small_rh(0.0);
  const BaseState b = build_base_state(cfg.base_state, cfg.sim.J, 0.0, 1);
  CHECK(b.rotation[2] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(l2_norm(b.reference(0.0) - b.zeta) < 1e-14);
  // A full turn returns the state.
  const double period = 2.0 * std::numbers::pi / std::abs(b.rotation[2]);
  CHECK(l2_norm(b.reference(period) - b.zeta) < 1e-12);
}

TEST_CASE("perturb: zero size is the identity and noise has the requested norm") {
  const SpectralField z = vortsphere::testing::random_field(12, 3, 4);
  PerturbationSpec spec;
  spec.delta = 0.0;
  PerturbedState none = perturb(z, spec, 1);
  CHECK(vortsphere::testing::max_abs_diff(none.zeta, z) == 0.0);
  CHECK(none.offset == 0.0);

  for (double p : {2.0, 3.0}) {
    spec.delta = 1e-2;
    spec.p = p;
    const PerturbedState s = perturb(z, spec, 5);
    CHECK(s.offset == doctest::Approx(1e-2).epsilon(1e-10));
    CHECK(std::abs(s.zeta(0, 0)) < 1e-15);
    // Same seed, same perturbation.
    CHECK(vortsphere::testing::max_abs_diff(perturb(z, spec, 5).zeta, s.zeta) == 0.0);
    CHECK(vortsphere::testing::max_abs_diff(perturb(z, spec, 6).zeta, s.zeta) > 0.0);
  }
}

TEST_CASE("perturb: flow perturbations stay near the rearrangement class") {
  const SpectralField z = vortsphere::testing::random_field(12, 4, 4);
  PerturbationSpec spec;
  spec.kind = PerturbationSpec::Kind::flow;
  spec.eps = 0.05;
  spec.J_max = 4;
  const PerturbedState s = perturb(z, spec, 2);
  CHECK(s.offset > 1e-3);
  const Grid g = class_grid(12);
  const double cls = class_distance(synthesize(z, g), synthesize(s.zeta, g), 2.0);
  CHECK(cls < 0.1 * s.offset);
}

TEST_CASE("stability: unperturbed wave stays at distance zero") {
  const StabilityTimeSeries s = run_stability_experiment(small_rh(0.0));
  REQUIRE(!s.blew_up);
  REQUIRE(s.records.size() >= 2);
  CHECK(s.records.back().t == doctest::Approx(0.5));
  for (std::size_t k = 0; k < s.columns.size(); ++k) CHECK(s.max_distance(k) < 1e-10);
}

TEST_CASE("stability: small noise gives distances near the initial offset") {
  const StabilityTimeSeries s = run_stability_experiment(small_rh(1e-3));
  REQUIRE(!s.blew_up);
  CHECK(s.initial_offset == doctest::Approx(1e-3).epsilon(1e-10));
  CHECK(s.records.front().distances[0] == doctest::Approx(1e-3).epsilon(1e-8));
  // The orbit distance never exceeds the distance to one orbit member.
  for (const StabilityRecord& r : s.records) CHECK(r.distances[1] <= r.distances[0] + 1e-12);
  CHECK(s.max_distance(0) < 2e-3);
  for (const StabilityRecord& r : s.records) {
    CHECK(std::abs(r.energy_drift) < 1e-10);
    CHECK(r.moment_drift < 1e-10);
  }
}

TEST_CASE("stability: rotating frame reduces to the orbit about the axis") {
  // With Omega != 0 the plain column measures distance to the e3-orbit of the
  // reference; the Omega = 0 run of the same data gives the same numbers.
  const char* common = R"("base_state":{"kind":"rh-wave","degree":1,"alpha":0.5},"perturbation":{"delta":1e-3},
    "distance_every":2,)";
  const ExperimentConfig rotating = experiment_config_from_json(
      std::string("{") + common + R"("sim":{"J":10,"dt":1e-2,"t_end":1,"Omega":0.5},"distance_tasks":["plain-Lp"]})");
  const ExperimentConfig still = experiment_config_from_json(
      std::string("{") + common + R"("sim":{"J":10,"dt":1e-2,"t_end":1},"distance_tasks":["orbit-H"]})");
  const StabilityTimeSeries a = run_stability_experiment(rotating);
  const StabilityTimeSeries b = run_stability_experiment(still);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i)
    CHECK(a.records[i].distances[0] == doctest::Approx(b.records[i].distances[0]).epsilon(1e-6));
  CHECK(a.records.back().moment_drift < 1e-10);
}

TEST_CASE("stability: outputs are deterministic and carry a manifest") {
  ExperimentConfig cfg = small_rh(1e-3);
  cfg.snapshots = true;
  const fs::path d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
  cfg.output_path = d1.string();
  run_stability_experiment(cfg);
  cfg.output_path = d2.string();
  run_stability_experiment(cfg);
  for (const char* f : {"stability.csv", "diagnostics.csv", "base_state.txt"}) {
    REQUIRE(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(!fs::is_empty(d1 / "snapshots"));

  const nlohmann::json m = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  CHECK(m.at("status") == "ok");
  CHECK(m.at("seed") == 1);
  CHECK(m.at("version").get<std::string>().size() > 0);
  CHECK(m.at("config_hash").get<std::string>().rfind("fnv1a64:", 0) == 0);
  // The embedded configuration is the canonical JSON of the run.
  CHECK(experiment_config_from_json(m.at("config").dump()).base_state.degree == 2);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("stability: a blow-up ends the series and keeps the partial record") {
  const fs::path d = scratch_dir("blowup");
  ExperimentConfig cfg = experiment_config_from_json(R"({"base_state":{"kind":"rh-wave","degree":3,"alpha":1,
    "amplitude":50},"perturbation":{"delta":1},"sim":{"J":16,"dt":0.5,"t_end":400,"diag_every":1},
    "distance_every":1})");
  cfg.output_path = d.string();
  const StabilityTimeSeries s = run_stability_experiment(cfg);
  CHECK(s.blew_up);
  CHECK(!s.failure.empty());
  CHECK(s.records.size() >= 1);
  CHECK(s.records.back().t < 400.0);
  const nlohmann::json m = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(m.at("status").get<std::string>().rfind("blow-up", 0) == 0);
  fs::remove_all(d);
}

TEST_CASE("stability: steady solve base state") {
  const ExperimentConfig cfg = experiment_config_from_json(R"({"base_state":{"kind":"steady-solve",
    "nonlinearity":"cubic","beta":0.3},"perturbation":{"delta":0},"sim":{"J":12,"dt":1e-2,"t_end":0.2},
    "distance_tasks":["plain-Lp"],"distance_every":5})");
  const BaseState b = build_base_state(cfg.base_state, cfg.sim.J, 0.0, cfg.seed);
  REQUIRE(b.steady.has_value());
  CHECK(b.steady->converged);
  const StabilityTimeSeries s = run_stability_experiment(cfg);
  CHECK(s.max_distance(0) < 1e-8);
}
