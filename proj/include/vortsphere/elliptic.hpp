#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortsphere/grid.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

enum class Monotonicity { decreasing, increasing };

using ScalarFn = std::function<double(double)>;

/// Scalar nonlinearity g of the steady relation zeta = g(G zeta + beta p.x).
/// `antiderivative` is G(s) = integral_0^s g; when left empty it is computed
/// by quadrature.
struct NonlinearitySpec {
  std::string name;
  ScalarFn g;
  ScalarFn g_prime;
  ScalarFn antiderivative;
  Monotonicity monotonicity = Monotonicity::increasing;
  double slope_min = -std::numeric_limits<double>::infinity();
  double slope_max = std::numeric_limits<double>::infinity();
  double m1 = -std::numeric_limits<double>::infinity();
  double m2 = std::numeric_limits<double>::infinity();
  /// g values are clipped to [-saturation, saturation].
  double saturation = 1e12;

  double operator()(double s) const;
  double derivative(double s) const { return g_prime(s); }
  double G(double s) const;
};

/// g(s) = slope * s.
NonlinearitySpec linear_nonlinearity(double slope);

/// Named presets: "zero", "linear:<slope>", "cubic" (-2s - 0.1s^3),
/// "cubic:<a>:<b>" (a s + b s^3), "tanh:<a>:<b>" (a s + b tanh s).
NonlinearitySpec nonlinearity_preset(const std::string& name);

/// Monotone cubic (PCHIP) through tabulated (s, g) pairs, continued linearly
/// with the end slopes. Text file, two whitespace-separated columns, '#'
/// comments; s strictly increasing.
NonlinearitySpec nonlinearity_from_table(const std::string& path);
NonlinearitySpec nonlinearity_from_points(std::vector<double> s, std::vector<double> g, std::string name = "table");

/// Samples g' on [m1, m2] and fills slope_min / slope_max and the
/// monotonicity class. Throws if g' changes sign on the interval.
NonlinearitySpec with_measured_bounds(NonlinearitySpec g, double m1, double m2, std::size_t samples = 2001);

/// Replaces g outside [m1, m2] so that it is C^1 and grows linearly:
/// beyond an end with nonzero slope, continue linearly with that slope;
/// at an end with zero slope (|g'| <= flat_tol) attach a quadratic of unit
/// curvature over one unit of s, then continue with slope 2 (sign chosen to
/// keep the monotonicity class).
NonlinearitySpec extend_nonlinearity(const NonlinearitySpec& g, double m1, double m2, double flat_tol = 1e-12);

/// Raised when sup_tau (s tau - G(tau)) is not attained inside the search range.
class UnboundedTransformError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Convex conjugate H(s) = sup_tau (s tau - G(tau)), evaluated by scanning a
/// uniform tau grid and refining the best bracket with a bracketed 1-D
/// minimizer. Tabulated on the s grid given at construction; other s values
/// are computed on demand.
class LegendreTransform {
 public:
  LegendreTransform(ScalarFn G, std::vector<double> s_grid, double tau_min = -100.0, double tau_max = 100.0,
                    std::size_t tau_points = 4001);

  double operator()(double s) const;
  /// Maximizing tau for s.
  double argmax(double s) const;

  const std::vector<double>& s_grid() const { return s_grid_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::pair<double, double> solve(double s) const;

  ScalarFn G_;
  std::vector<double> s_grid_;
  std::vector<double> values_;
  std::vector<double> tau_;
  std::vector<double> G_tau_;
};

LegendreTransform legendre_transform(ScalarFn G, std::vector<double> s_grid);

struct SteadyState {
  SpectralField zeta;
  double beta = 0.0;
  Vec3 p{0.0, 0.0, 1.0};
  double residual = 0.0;       // || zeta - P g(G zeta + beta p.x) ||_L2 (P: band limit, zero mean)
  std::size_t iterations = 0;
  bool converged = false;
  double mean_shift = 0.0;     // |integral of g(...)| removed at the last iterate
  double max_mean_shift = 0.0; // largest such value over the iteration
};

struct FixedPointOptions {
  double relax = 0.5;
  double tol = 1e-12;
  std::size_t max_iter = 10000;
  /// Power of degree-J fields the quadrature grid integrates exactly.
  std::size_t quadrature_order = 4;
};

/// Damped iteration zeta <- (1 - relax) zeta + relax P[g(G zeta + beta p.x)],
/// P truncating to the degree of `init` and removing the mean. Stops when the
/// L2 size of an update drops below tol; on max_iter returns the iterate with
/// the smallest residual and converged = false.
SteadyState solve_fixed_point(const NonlinearitySpec& g, double beta, const Vec3& p, const SpectralField& init,
                              const FixedPointOptions& opts = {});

/// The band-limited, mean-removed image P[g(G zeta + beta p.x)] and the
/// integral that was removed.
SpectralField steady_map(const NonlinearitySpec& g, double beta, const Vec3& p, const SpectralField& zeta,
                         std::size_t quadrature_order, double* removed_mean = nullptr);

/// || zeta - avg_theta zeta o R^q_theta || / || zeta ||: the share of zeta that
/// is not rotationally invariant about q. Throws on the zero field.
double zonality_defect(const SpectralField& zeta, const Vec3& q);

struct AxisEstimate {
  Vec3 axis{0.0, 0.0, 1.0};
  bool fallback = false;  // moment too small, axis found by search
  double defect = 0.0;    // zonality_defect about the returned axis
};

/// m(zeta)/|m(zeta)| when |m| > moment_tol * ||zeta||; otherwise the axis
/// minimizing zonality_defect over a spherical point set with local
/// refinement. Throws on the zero field.
AxisEstimate best_axis(const SpectralField& zeta, double moment_tol = 1e-8);

/// Smallest value of (integral |grad phi|^2 - w phi^2) over unit-L2 phi of
/// degrees 2..J (zero mean, zero moment), where w = g'(G zeta + beta p.x).
double spectral_gap(const NonlinearitySpec& g, double beta, const Vec3& p, const SpectralField& zeta);

/// Relative L2 size of the part of (zeta o R^p_theta - zeta) outside degree 2.
double rotation_defect_outside_e2(const SpectralField& zeta, const Vec3& p, double theta);

}  // namespace vortsphere
