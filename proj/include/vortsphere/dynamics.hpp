#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortsphere/diagnostics.hpp"
#include "vortsphere/grid.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

struct SimConfig {
  std::size_t J = 21;
  double Omega = 0.0;
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t diag_every = 10;  // steps between records
  bool dealias = true;
  std::vector<double> p_list{2.0, 4.0};
  std::size_t casimir_order = 4;
  /// Scale-selective damping rate applied as exp(-damping * dt * (lambda_j / lambda_J)^4)
  /// after every step. Zero disables it.
  double damping = 0.0;

  void validate() const;
};

struct TrajectoryRecord {
  double t = 0.0;
  SpectralField zeta;
  Diagnostics diag;
};

/// Non-finite values appeared during integration. Carries everything
/// recorded before the failure; the last entry is the last good state.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::vector<TrajectoryRecord> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<TrajectoryRecord>& partial() const { return partial_; }
  const TrajectoryRecord& last_good() const { return partial_.back(); }

 private:
  std::vector<TrajectoryRecord> partial_;
};

/// Grid used by the time stepper for the given configuration.
Grid simulation_grid(const SimConfig& cfg);

/// Time derivative of absolute vorticity in a frame rotating at rate Omega:
///   d(zeta)/dt = -grad_perp(G zeta - Omega x3) . grad(zeta).
SpectralField rhs(const SpectralField& zeta, double Omega, const Grid& grid, bool allow_aliasing = false);

/// One classical Runge-Kutta step. Throws BlowUpError (with an empty
/// history) if the result is not finite.
SpectralField step_rk4(const SpectralField& zeta, double dt, double Omega, const Grid& grid,
                       bool allow_aliasing = false);

/// Called with each record as it is produced.
using RecordCallback = std::function<void(const TrajectoryRecord&)>;

/// Integrates from t = 0 with fixed steps. Records are taken at step 0, every
/// diag_every steps and at the final step; the final time is
/// round(t_end / dt) * dt.
std::vector<TrajectoryRecord> simulate(const SpectralField& zeta0, const SimConfig& cfg,
                                       const RecordCallback& on_record = {});

/// Runs the non-rotating and rotating problems from zeta0 and returns
/// max over record times of || zeta_Omega(t) - zeta_0(t) o R_{Omega t} ||_L2,
/// R being the rotation about e3.
double verify_rotation_relation(const SpectralField& zeta0, double Omega, const SimConfig& cfg);

/// Column header for the diagnostics CSV.
std::string diagnostics_csv_header(const SimConfig& cfg);
std::string diagnostics_csv_row(const TrajectoryRecord& rec);
void write_diagnostics_csv(std::ostream& os, const SimConfig& cfg, const std::vector<TrajectoryRecord>& records);

bool all_finite(const SpectralField& a);

}  // namespace vortsphere
