// Acceptance runner: one PASS/FAIL line per item, exit status 1 if any fails.
// Thresholds are fixed here and never adjusted to the measured values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "vortsphere/diagnostics.hpp"
#include "vortsphere/dynamics.hpp"
#include "vortsphere/elliptic.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/rearrange.hpp"
#include "vortsphere/stability.hpp"
#include "vortsphere/transform.hpp"
#include "vortsphere/waves.hpp"

using namespace vortsphere;
using vortsphere::testing::max_abs_diff;
using vortsphere::testing::random_field;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what, double value) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s=%.3g", detail.empty() ? "" : " ", what.c_str(), value);
    detail += buf;
    if (!ok) {
      pass = false;
      detail += "(!)";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double abs_power_integral(const SpectralField& z, int k) {
  GridField f = synthesize(z, power_grid(z.truncation(), static_cast<std::size_t>(k)));
  for (double& v : f.values) v = std::pow(std::abs(v), k);
  return integrate(f);
}

Outcome spectral_core() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t J = 21;
  double roundtrip = 0.0, inverse = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SpectralField a = random_field(J, seed);
    roundtrip = std::max(roundtrip, max_abs_diff(analyze(synthesize(a, transform_grid(J)), J), a));
    inverse = std::max(inverse, max_abs_diff(-1.0 * laplacian(green(a)), a));
  }
  const SpectralField x3 = coordinate_field(J, 2);
  const double gx3 = max_abs_diff(green(x3), 0.5 * x3);
  const SpectralField e2 = degree_part(random_field(J, 9), 2);
  const double ge2 = max_abs_diff(green(e2), (1.0 / 6.0) * e2);
  const double elapsed = seconds_since(t0);
  o.require(roundtrip < 1e-12, "roundtrip", roundtrip);
  o.require(inverse < 1e-15, "inverse", inverse);
  o.require(gx3 < 1e-16, "G(x3)", gx3);
  o.require(ge2 < 1e-16, "G|E2", ge2);
  o.require(elapsed < 1.0, "seconds", elapsed);
  return o;
}

Outcome jacobian_orthogonality() {
  Outcome o;
  const std::size_t J = 21;
  const Grid g = dealiased_grid(J);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SpectralField zeta = random_field(J, 300 + seed), psi = random_field(J, 400 + seed);
    const SpectralField jp = jacobian(psi, zeta, g);
    const double scale = l2_norm(psi) * l2_norm(zeta) * l2_norm(zeta);
    worst = std::max({worst, std::abs(inner(zeta, jp)) / scale, std::abs(inner(psi, jp)) / scale});
  }
  o.require(worst < 1e-11, "relative", worst);
  return o;
}

Outcome conservation() {
  Outcome o;
  SimConfig cfg;
  cfg.J = 21;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.diag_every = 100;
  // Smooth data: degrees up to 8 with amplitudes decaying like exp(-j/2).
  const SpectralField z0 = random_field(cfg.J, 77, 8, 0.5);
  {
    const auto recs = simulate(z0, cfg);
    const Diagnostics& a = recs.front().diag;
    const double mscale = norm(a.moment);
    const double c3 = abs_power_integral(z0, 3), c4 = abs_power_integral(z0, 4);
    double e = 0, m = 0, s = 0, k3 = 0, k4 = 0;
    for (const auto& r : recs) {
      const Diagnostics& b = r.diag;
      e = std::max(e, std::abs(b.energy - a.energy) / a.energy);
      for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(b.moment[c] - a.moment[c]) / mscale);
      s = std::max(s, std::abs(b.enstrophy - a.enstrophy) / a.enstrophy);
      k3 = std::max(k3, std::abs(b.casimir_moments[2] - a.casimir_moments[2]) / c3);
      k4 = std::max(k4, std::abs(b.casimir_moments[3] - a.casimir_moments[3]) / c4);
    }
    o.require(e < 1e-8, "E", e);
    o.require(m < 1e-8, "m", m);
    o.require(s < 1e-8, "enstrophy", s);
    o.require(k3 < 1e-8, "C3", k3);
    o.require(k4 < 1e-8, "C4", k4);
  }
  {
    cfg.Omega = 0.5;
    const auto recs = simulate(z0, cfg);
    const Vec3 m0 = recs.front().diag.moment;
    const double mm = norm(m0);
    double axial = 0, planar = 0;
    for (const auto& r : recs) {
      const Vec3 m = r.diag.moment;
      axial = std::max(axial, std::abs(m[2] - m0[2]) / mm);
      planar = std::max(planar, std::abs(m[0] * m[0] + m[1] * m[1] - m0[0] * m0[0] - m0[1] * m0[1]) / (mm * mm));
    }
    o.require(axial < 1e-8, "m3(Omega)", axial);
    o.require(planar < 1e-8, "m12^2(Omega)", planar);
  }
  return o;
}

Outcome degree_one_steady() {
  Outcome o;
  SimConfig cfg;
  cfg.t_end = 1.0;
  const SpectralField z0 = linear_field(cfg.J, {1.0, 0.0, 0.5});
  const auto recs = simulate(z0, cfg);
  const double err = l2_norm(recs.back().zeta - z0);
  o.require(err < 1e-8, "L2", err);
  return o;
}

Outcome wave_exactness() {
  Outcome o;
  SimConfig cfg;
  cfg.J = 21;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.diag_every = 50;
  const RHWaveSpec w = make_rh_wave(2, unit_x1x3(cfg.J), 1.0);
  const auto recs = simulate(exact_rh_solution(w, 0.0), cfg);
  double err = 0.0;
  for (const auto& r : recs) err = std::max(err, l2_norm(r.zeta - exact_rh_solution(w, r.t)));
  const double dphase = std::remainder(std::arg(recs.back().zeta(2, 1)) - std::arg(recs.front().zeta(2, 1)),
                                       2 * std::numbers::pi);
  const double rate = dphase / recs.back().t;

  const Grid grid = dealiased_grid(cfg.J);
  auto error_with = [&](int steps) {
    SpectralField z = exact_rh_solution(w, 0.0);
    const double t_end = 4.0, dt = t_end / steps;
    for (int n = 0; n < steps; ++n) z = step_rk4(z, dt, 0.0, grid);
    return l2_norm(z - exact_rh_solution(w, t_end));
  };
  const double factor = error_with(10) / error_with(20);
  o.require(err < 1e-6, "L2", err);
  o.require(std::abs(std::abs(rate) - 1.0 / 3.0) < 1e-4, "rate", rate);
  o.require(factor >= 12.0 && factor <= 20.0, "order_factor", factor);
  return o;
}

Outcome rotation_relation() {
  Outcome o;
  SimConfig cfg;
  cfg.J = 21;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.diag_every = 50;
  const double d = verify_rotation_relation(random_field(cfg.J, 55, 8, 0.2), 0.5, cfg);
  o.require(d < 1e-6, "max_L2", d);
  return o;
}

Outcome rearrangement_oracle() {
  Outcome o;
  constexpr std::size_t n = 8;
  const double w = 4.0 * std::numbers::pi / n;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int pair = 0; pair < 50; ++pair) {
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = normal(rng);
    for (auto& v : b) v = normal(rng);
    for (double p : {1.5, 2.0, 3.0}) {
      std::vector<double> perm = a;
      std::sort(perm.begin(), perm.end());
      double best = INFINITY;
      do {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += w * std::pow(std::abs(perm[i] - b[i]), p);
        best = std::min(best, acc);
      } while (std::next_permutation(perm.begin(), perm.end()));
      const WeightedSample sa = make_sample(a, std::vector<double>(n, w));
      const WeightedSample sb = make_sample(b, std::vector<double>(n, w));
      const double d = class_distance(sa, sb, p);
      worst = std::max(worst, std::abs(d - std::pow(best, 1.0 / p)) / std::pow(best, 1.0 / p));
    }
  }
  o.require(worst < 1e-13, "relative", worst);
  return o;
}

Outcome rigidity() {
  Outcome o;
  FixedPointOptions opts;
  opts.tol = 1e-13;
  const Vec3 e3{0.0, 0.0, 1.0};
  const SteadyState st = solve_fixed_point(nonlinearity_preset("cubic"), 0.3, e3, random_field(21, 8, 4), opts);
  const double defect = zonality_defect(st.zeta, e3);
  o.require(st.converged && st.residual < 1e-8, "residual", st.residual);
  o.require(defect < 1e-6, "zonality_defect", defect);
  return o;
}

Outcome extremality() {
  Outcome o;
  const std::size_t J = 21;
  const ProbeReport low = extremality_probe(linear_field(J, {1.0, 0.0, 0.5}), ProbeMode::min, 64, 1e-2);
  const SpectralField rh = unit_x1x3(J) + coordinate_field(J, 2);
  const ProbeReport high = extremality_probe(rh, ProbeMode::max, 64, 1e-2);
  const double neutral = std::abs(probe_direction(rh, coordinate_field(J, 2), 1e-2).energy_change);
  o.require(low.violations == 0 && low.samples >= 48, "min_violations", static_cast<double>(low.violations));
  o.require(high.violations == 0 && high.samples >= 48, "max_violations", static_cast<double>(high.violations));
  o.require(neutral < 1e-9, "neutral_dE", neutral);
  return o;
}

Outcome stability() {
  Outcome o;
  const char* sim = R"("sim":{"J":21,"dt":1e-3,"t_end":5,"diag_every":10},"distance_every":25)";
  const ExperimentConfig one = experiment_config_from_json(
      std::string(R"({"base_state":{"kind":"rh-wave","degree":1,"alpha":0.5,"amplitude":1},)") +
      R"("perturbation":{"delta":1e-3},"distance_tasks":["plain-Lp"],)" + sim + "}");
  const StabilityTimeSeries s1 = run_stability_experiment(one);
  o.require(!s1.blew_up && s1.max_distance(0) < 1e-2, "deg1_plain", s1.max_distance(0));

  std::vector<double> maxima;
  for (double delta : {1e-2, 5e-3, 2.5e-3}) {
    const ExperimentConfig cfg = experiment_config_from_json(
        std::string(R"({"base_state":{"kind":"rh-wave","degree":2,"alpha":1},"perturbation":{"delta":)") +
        std::to_string(delta) + R"(},"distance_tasks":["e2-orbit"],)" + sim + "}");
    const StabilityTimeSeries s = run_stability_experiment(cfg);
    if (s.blew_up) o.require(false, "blew_up", delta);
    maxima.push_back(s.max_distance(0));
  }
  o.require(maxima[0] < 0.1, "rh_e2", maxima[0]);
  o.require(maxima[0] > maxima[1] && maxima[1] > maxima[2], "halved_ratio", maxima[1] / maxima[2]);
  return o;
}

Outcome legendre() {
  Outcome o;
  const NonlinearitySpec g = extend_nonlinearity(nonlinearity_preset("tanh:0.5:2"), -1.5, 1.5);
  const LegendreTransform h = legendre_transform([&](double t) { return g.G(t); }, {});
  double equality = 0.0;
  for (double tau = -3.0; tau <= 3.0; tau += 0.25)
    equality = std::max(equality, std::abs(h(g(tau)) + g.G(tau) - tau * g(tau)));
  double slope = 0.0;
  for (const NonlinearitySpec& e : {g, extend_nonlinearity(nonlinearity_preset("cubic"), -1.2, 0.7)})
    for (double s : {e.m1, e.m2})
      slope = std::max(slope, std::abs(e.derivative(std::nextafter(s, -1e300)) - e.derivative(std::nextafter(s, 1e300))));
  o.require(equality < 1e-8, "fenchel_young", equality);
  o.require(slope < 1e-10, "slope_jump", slope);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> items{
      {"spectral core", spectral_core},
      {"jacobian orthogonality", jacobian_orthogonality},
      {"conservation", conservation},
      {"degree-one steadiness", degree_one_steady},
      {"degree-two wave exactness", wave_exactness},
      {"rotation relation", rotation_relation},
      {"rearrangement distance oracle", rearrangement_oracle},
      {"rigidity", rigidity},
      {"extremality probes", extremality},
      {"stability experiments", stability},
      {"legendre machinery", legendre},
  };
  int failures = 0;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = items[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", k + 1, items[k].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
