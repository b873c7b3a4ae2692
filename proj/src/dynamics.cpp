#include "vortsphere/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "vortsphere/operators.hpp"
#include "vortsphere/rotation.hpp"

namespace vortsphere {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SimConfig: dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("SimConfig: t_end must be >= 0");
  if (J < 1) throw std::invalid_argument("SimConfig: J must be >= 1");
  if (diag_every < 1) throw std::invalid_argument("SimConfig: diag_every must be >= 1");
  if (damping < 0.0) throw std::invalid_argument("SimConfig: damping must be >= 0");
  for (double p : p_list)
    if (!(p >= 1.0)) throw std::invalid_argument("SimConfig: L^p exponents must be >= 1");
}

Grid simulation_grid(const SimConfig& cfg) {
  return cfg.dealias ? dealiased_grid(cfg.J) : transform_grid(cfg.J);
}

bool all_finite(const SpectralField& a) {
  for (const Complex& c : a.coeffs())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

SpectralField rhs(const SpectralField& zeta, double Omega, const Grid& grid, bool allow_aliasing) {
  SpectralField psi = green(zeta, 1e-10 * std::max(1.0, l2_norm(zeta)));
  if (Omega != 0.0) psi -= Omega * coordinate_field(zeta.truncation(), 2);
  SpectralField out = jacobian(psi, zeta, grid, allow_aliasing);
  out *= -1.0;
  out(0, 0) = 0.0;
  return out;
}

SpectralField step_rk4(const SpectralField& zeta, double dt, double Omega, const Grid& grid, bool allow_aliasing) {
  if (dt == 0.0) return zeta;
  const SpectralField k1 = rhs(zeta, Omega, grid, allow_aliasing);
  const SpectralField k2 = rhs(zeta + (0.5 * dt) * k1, Omega, grid, allow_aliasing);
  const SpectralField k3 = rhs(zeta + (0.5 * dt) * k2, Omega, grid, allow_aliasing);
  const SpectralField k4 = rhs(zeta + dt * k3, Omega, grid, allow_aliasing);
  SpectralField out = zeta;
  const std::size_t n = out.size();
  auto& c = out.coeffs();
  for (std::size_t i = 0; i < n; ++i)
    c[i] += dt / 6.0 * (k1.coeffs()[i] + 2.0 * k2.coeffs()[i] + 2.0 * k3.coeffs()[i] + k4.coeffs()[i]);
  out(0, 0) = 0.0;
  if (!all_finite(out)) throw BlowUpError("step_rk4: non-finite coefficients", {});
  return out;
}

namespace {

void apply_damping(SpectralField& a, double rate, double dt) {
  const std::size_t J = a.truncation();
  const double top = static_cast<double>(J * (J + 1));
  for (std::size_t j = 1; j <= J; ++j) {
    const double r = static_cast<double>(j * (j + 1)) / top;
    const double factor = std::exp(-rate * dt * r * r * r * r);
    for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) a(j, m) *= factor;
  }
}

}  // namespace

std::vector<TrajectoryRecord> simulate(const SpectralField& zeta0, const SimConfig& cfg,
                                       const RecordCallback& on_record) {
  cfg.validate();
  const Grid grid = simulation_grid(cfg);
  const bool aliased = !cfg.dealias;
  SpectralField zeta = zeta0.resized(cfg.J);
  const double removed = std::abs(zeta(0, 0));
  if (removed > 1e-10 * std::max(1.0, l2_norm(zeta)))
    throw MeanError("simulate: initial vorticity must have zero mean");
  zeta(0, 0) = 0.0;

  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  std::vector<TrajectoryRecord> records;
  auto record = [&](std::size_t step) {
    TrajectoryRecord rec{static_cast<double>(step) * cfg.dt, zeta, diagnostics(zeta, cfg.p_list, cfg.casimir_order)};
    if (on_record) on_record(rec);
    records.push_back(std::move(rec));
  };

  record(0);
  for (std::size_t step = 1; step <= n_steps; ++step) {
    try {
      zeta = step_rk4(zeta, cfg.dt, cfg.Omega, grid, aliased);
    } catch (const BlowUpError&) {
      throw BlowUpError("simulate: blow-up at t=" + std::to_string(static_cast<double>(step) * cfg.dt),
                        std::move(records));
    }
    if (cfg.damping > 0.0) apply_damping(zeta, cfg.damping, cfg.dt);
    if (step % cfg.diag_every == 0 || step == n_steps) record(step);
  }
  return records;
}

double verify_rotation_relation(const SpectralField& zeta0, double Omega, const SimConfig& cfg) {
  SimConfig still = cfg;
  still.Omega = 0.0;
  SimConfig spinning = cfg;
  spinning.Omega = Omega;
  const auto base = simulate(zeta0, still);
  const auto rotating = simulate(zeta0, spinning);
  double worst = 0.0;
  for (std::size_t n = 0; n < base.size(); ++n) {
    const SpectralField expected = rotate_about_e3(base[n].zeta, Omega * base[n].t);
    worst = std::max(worst, l2_norm(rotating[n].zeta - expected));
  }
  return worst;
}

namespace {

std::string format_exponent(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

void put(std::ostringstream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << ',' << buf;
}

}  // namespace

std::string diagnostics_csv_header(const SimConfig& cfg) {
  std::string h = "t,E,mx,my,mz,enstrophy";
  for (double p : cfg.p_list) h += ",l" + format_exponent(p);
  for (std::size_t k = 3; k <= cfg.casimir_order; ++k) h += ",casimir" + std::to_string(k);
  return h;
}

std::string diagnostics_csv_row(const TrajectoryRecord& rec) {
  std::ostringstream os;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", rec.t);
  os << buf;
  put(os, rec.diag.energy);
  for (double m : rec.diag.moment) put(os, m);
  put(os, rec.diag.enstrophy);
  for (const auto& lp : rec.diag.lp_norms) put(os, lp.value);
  for (std::size_t k = 3; k <= rec.diag.casimir_moments.size(); ++k) put(os, rec.diag.casimir_moments[k - 1]);
  return os.str();
}

void write_diagnostics_csv(std::ostream& os, const SimConfig& cfg, const std::vector<TrajectoryRecord>& records) {
  os << diagnostics_csv_header(cfg) << '\n';
  for (const auto& rec : records) os << diagnostics_csv_row(rec) << '\n';
}

}  // namespace vortsphere
