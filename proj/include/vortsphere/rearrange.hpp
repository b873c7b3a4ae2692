#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vortsphere/grid.hpp"
#include "vortsphere/rotation.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

/// Discrete distribution of a field: values with the areas carrying them.
/// Produced sorted ascending with equal values merged.
struct WeightedSample {
  std::vector<double> values;
  std::vector<double> weights;

  double total() const;
};

/// Sorts (value, weight) pairs ascending and merges equal values. Weights
/// must be positive.
WeightedSample make_sample(std::vector<double> values, std::vector<double> weights);

/// The sorted weighted sample of grid values (the discrete quantile function).
WeightedSample quantile(const GridField& u);

/// (integral_0^W |q_a(w) - q_b(w)|^p dw)^(1/p) over the common weight
/// coordinate, by merging the breakpoints of the two step functions. This is
/// the least L^p distance between the rearrangement classes. The totals must
/// agree to 1e-12 relative; p must lie in (1, inf).
double class_distance(const WeightedSample& a, const WeightedSample& b, double p);
double class_distance(const GridField& u, const GridField& v, double p);

/// class_distance(u, v, 2) < tol.
bool in_class(const GridField& u, const GridField& v, double tol);

/// Grid used for distribution comparisons of degree-J fields.
Grid class_grid(std::size_t J);

enum class RotationGroup { SO3, H };

struct OrbitDistanceReport {
  double distance = 0.0;
  Mat3 rotation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  RotationSpec argmin;                 // axis-angle form of `rotation`
  std::array<double, 5> e2_coeffs{};   // E2 shift (e2 search only)
  double class_violation = 0.0;        // 0 for rotation orbits, which preserve the class
  double objective = 0.0;
  bool converged = true;
  bool rotated_member = false;         // e2 search: the optimum is a rotation of zeta
};

/// L^p distance between band-limited fields, by quadrature (exact for p = 2).
double lp_distance(const SpectralField& a, const SpectralField& b, double p);

/// min over R in the group of || w - zeta o R ||_{L^p}. H is the rotations
/// about e3. Coarse angle scan followed by bracketed line searches; the SO3
/// search is seeded with the H optimum so its result never exceeds it.
OrbitDistanceReport orbit_distance(const SpectralField& w, const SpectralField& zeta, RotationGroup group,
                                   double p = 2.0);

/// Real orthonormal basis of degree 2: Y_{2,0}, then the cosine and sine
/// combinations for m = 1, 2.
SpectralField e2_element(std::size_t J, const std::array<double, 5>& c);
std::array<double, 5> e2_coordinates(const SpectralField& a);

struct E2SearchOptions {
  double kappa = 10.0;
  double size_tol = 1e-9;
  std::size_t max_iter = 2000;
  /// Grid for the class term; defaults to class_grid(J).
  std::size_t class_nlat = 0;
};

/// Proxy distance from w to (zeta + E2) within the class of zeta: minimizes
///   || w - (zeta + Y_c) ||_p + kappa * class_distance(zeta + Y_c, zeta, p)
/// over the five E2 coordinates c by simplex search started from c = 0 and
/// from the E2 projection of w - zeta. `distance` is the first term at the
/// optimum, `class_violation` the second without kappa. The class term is
/// sampled on class_grid(J) and carries its quadrature error. When zeta has
/// only degrees 1 and 2 with the degree-1 part along e3 (or none), the
/// rotations about e3 (or all rotations) of zeta are exact members of
/// (zeta + E2) in the class of zeta; the best one from orbit_distance is
/// also a candidate, with class term exactly zero.
OrbitDistanceReport e2_orbit_distance(const SpectralField& w, const SpectralField& zeta, double p = 2.0,
                                      const E2SearchOptions& opts = {});

/// Advects zeta for time eps along the frozen velocity grad_perp(chi):
/// d(zeta)/ds = -grad_perp(chi) . grad(zeta), classical Runge-Kutta with
/// `steps` steps (0: chosen from the velocity size).
SpectralField flow_perturbation(const SpectralField& zeta, const SpectralField& chi, double eps,
                                std::size_t steps = 0);

enum class ProbeMode { min, max };

struct ProbeOptions {
  std::size_t chi_degree = 6;      // random generators use degrees 2..chi_degree
  double allowance = 0.1;          // C in the C * eps^2 tolerance term
  double moment_tol = 0.01;        // admissible |dm| / (eps * ||zeta||)
  std::uint64_t seed = 1;
};

struct ProbeReport {
  std::size_t samples = 0;
  std::size_t skipped = 0;           // constraint projection failed
  std::size_t violations = 0;
  double worst_signed_change = 0.0;     // min over samples of sign * (E(perturbed) - E(zeta))
  double worst_signed_augmented = 0.0;  // same for E - lambda . m, which decides pass/fail
  double worst_moment_violation = 0.0;
  double tolerance = 0.0;
  std::vector<double> energy_changes;
  std::vector<double> augmented_changes;
  bool passed() const { return violations == 0; }
};

/// Energy change along one area-preserving deformation.
struct DirectionResult {
  double energy_change = 0.0;
  Vec3 moment_change{0.0, 0.0, 0.0};
  SpectralField perturbed;
};
DirectionResult probe_direction(const SpectralField& zeta, const SpectralField& chi, double eps);

/// Drops the degree-1 part of chi, then subtracts the least-squares
/// combination of the generators J(x_k, zeta) (k = 1..3) so that the flow of
/// the result leaves m(zeta) unchanged to first order.
SpectralField project_moment_preserving(const SpectralField& chi, const SpectralField& zeta);

/// Multiplier lambda with J(psi - lambda . x, zeta) ~ 0 in the least-squares
/// sense over the generators J(x_k, zeta); directions without a generator
/// take the degree-1 part of psi. For a steady state E - lambda . m is
/// stationary along every area-preserving flow.
Vec3 moment_multiplier(const SpectralField& zeta);

/// Samples random moment-preserving deformations and checks that the energy
/// does not drop (min) or rise (max) beyond 1e-8 |E| + allowance * eps^2.
/// The flows keep m only to first order, so the comparison uses
/// E - lambda . m, which removes the energy carried by the residual moment
/// change; the raw energy changes are reported alongside.
ProbeReport extremality_probe(const SpectralField& zeta, ProbeMode mode, std::size_t n_samples, double eps,
                              const ProbeOptions& opts = {});

}  // namespace vortsphere
