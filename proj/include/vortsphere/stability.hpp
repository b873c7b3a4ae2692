#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortsphere/dynamics.hpp"
#include "vortsphere/elliptic.hpp"
#include "vortsphere/rearrange.hpp"
#include "vortsphere/spectral_field.hpp"
#include "vortsphere/waves.hpp"

namespace vortsphere {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BaseStateSpec {
  enum class Kind { rh_wave, steady_solve, coefficient_file };
  Kind kind = Kind::rh_wave;

  // rh-wave: alpha x3 + amplitude * Y, Y of one degree (default harmonic of
  // rh_preset unless coefficients are given).
  std::size_t degree = 2;
  double alpha = 1.0;
  double amplitude = 1.0;
  std::vector<YCoefficient> coeffs;

  // steady-solve: fixed point of zeta = g(G zeta + beta p.x) from a random
  // start of degrees 1..init_J_max.
  std::string nonlinearity = "cubic";  // preset name
  std::string table_path;              // two-column table; overrides the preset
  double beta = 0.0;
  Vec3 p{0.0, 0.0, 1.0};
  std::size_t init_J_max = 4;
  FixedPointOptions solver;

  // coefficient-file: spharm dump; `rotation` is the angular velocity of its
  // rigid motion (zero: steady).
  std::string path;
  Vec3 rotation{0.0, 0.0, 0.0};
};

struct PerturbationSpec {
  enum class Kind { none, spectral_noise, flow };
  Kind kind = Kind::spectral_noise;
  double delta = 0.0;       // spectral noise: L^p size of the offset
  std::size_t J_max = 8;    // degrees of the noise / of the generator chi
  double p = 2.0;           // norm used to scale the noise
  double eps = 0.0;         // flow: time of the area-preserving flow
  std::optional<std::uint64_t> seed;  // defaults to the experiment seed
};

struct DistanceTask {
  enum class Kind { plain_lp, orbit_h, orbit_so3, e2_orbit };
  Kind kind = Kind::plain_lp;
  double p = 2.0;
  /// Column name, e.g. "orbit_H_L2".
  std::string name() const;
};

struct ExperimentConfig {
  BaseStateSpec base_state;
  PerturbationSpec perturbation;
  SimConfig sim;
  std::vector<DistanceTask> distance_tasks{DistanceTask{}};
  std::size_t distance_every = 10;  // diagnostic records between distance evaluations
  double kappa = 10.0;              // class weight of the e2 proxy
  std::uint64_t seed = 1;
  bool snapshots = false;           // coefficient dumps at distance records
  std::string output_path;          // directory; empty: nothing written

  void validate() const;
};

/// Parses the JSON form. Unknown keys and wrong types raise ConfigError.
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
/// Canonical JSON of the configuration (sorted keys, every field present).
std::string experiment_config_to_json(const ExperimentConfig& cfg);
/// Human-readable description of the configuration schema.
std::string experiment_config_schema();
/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Base state with its reference motion: an exact solution rotates rigidly
/// with angular velocity `rotation` (absolute, including the frame).
struct BaseState {
  SpectralField zeta;
  Vec3 rotation{0.0, 0.0, 0.0};
  std::string description;
  std::optional<SteadyState> steady;  // steady-solve only

  /// The exact solution from this state at time t.
  SpectralField reference(double t) const;
};

/// Throws ConfigError for invalid specs and NumericalFailure when the
/// steady solve does not converge.
BaseState build_base_state(const BaseStateSpec& spec, std::size_t J, double Omega, std::uint64_t seed);

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PerturbedState {
  SpectralField zeta;
  double offset = 0.0;  // || result - zeta ||_{L^p}
};

/// Spectral noise: zeta + delta * eta with eta random of degrees 1..J_max,
/// mean zero and unit L^p norm. Flow: flow_perturbation(zeta, chi, eps) with
/// chi random of degrees 2..J_max and unit L2 norm. delta = 0 (or eps = 0)
/// returns zeta.
PerturbedState perturb(const SpectralField& zeta, const PerturbationSpec& spec, std::uint64_t seed);

struct StabilityRecord {
  double t = 0.0;
  std::vector<double> distances;   // one per task
  double class_violation = 0.0;    // of the first e2 task (0 without one)
  double energy_drift = 0.0;       // relative to t = 0
  double moment_drift = 0.0;       // |m - m_expected| / |m(0)|, m_expected rotated by the frame
  double enstrophy_drift = 0.0;
};

struct StabilityTimeSeries {
  std::vector<std::string> columns;  // task columns
  std::vector<StabilityRecord> records;
  double initial_offset = 0.0;
  bool blew_up = false;
  std::string failure;

  /// max over records of the given task column.
  double max_distance(std::size_t task) const;
};

/// Called after each distance record.
using StabilityCallback = std::function<void(const StabilityRecord&)>;

/// Builds the base state, perturbs it, simulates and evaluates the distance
/// tasks every `distance_every` diagnostic records (and at the end). Plain
/// distances compare with the reference solution of the base state; when
/// Omega != 0 they compare with its orbit under rotations about e3. Writes
/// stability.csv, diagnostics.csv, manifest.json (and snapshots) under
/// output_path when it is set. A blow-up ends the series early with
/// blew_up = true; the partial series is still written.
StabilityTimeSeries run_stability_experiment(const ExperimentConfig& cfg, const StabilityCallback& on_record = {});

std::string stability_csv_header(const StabilityTimeSeries& series);
std::string stability_csv_row(const StabilityRecord& rec);

/// Writes manifest.json into `dir`.
void write_manifest(const std::string& dir, const std::string& command, const std::string& config_json,
                    std::uint64_t seed, const std::vector<std::string>& outputs, const std::string& status);

}  // namespace vortsphere
