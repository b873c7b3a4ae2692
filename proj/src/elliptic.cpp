#include "vortsphere/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "optimize.hpp"
#include "vortsphere/diagnostics.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/rotation.hpp"
#include "vortsphere/transform.hpp"

namespace vortsphere {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double integrate_g(const ScalarFn& g, double a, double b) {
  if (a == b) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(b - a))));
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k)
    acc += boost::math::quadrature::gauss<double, 20>::integrate(g, a + k * h, a + (k + 1) * h);
  return acc;
}

double log_cosh(double s) {
  const double a = std::abs(s);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double parse_number(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty())
    throw std::invalid_argument(context + ": cannot parse number '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

NonlinearitySpec polynomial_nonlinearity(double a, double b, std::string name) {
  NonlinearitySpec n;
  n.name = std::move(name);
  n.g = [a, b](double s) { return a * s + b * s * s * s; };
  n.g_prime = [a, b](double s) { return a + 3.0 * b * s * s; };
  n.antiderivative = [a, b](double s) { return 0.5 * a * s * s + 0.25 * b * s * s * s * s; };
  if (a <= 0 && b <= 0) {
    n.monotonicity = Monotonicity::decreasing;
    n.slope_max = a;
    n.slope_min = b == 0 ? a : -kInf;
  } else {
    n.monotonicity = Monotonicity::increasing;
    n.slope_min = a;
    n.slope_max = b == 0 ? a : kInf;
    if (a < 0 || b < 0) {
      n.slope_min = -kInf;
      n.slope_max = kInf;
    }
  }
  return n;
}

}  // namespace

double NonlinearitySpec::operator()(double s) const {
  const double v = g(s);
  if (std::isnan(v)) return v;
  return std::clamp(v, -saturation, saturation);
}

double NonlinearitySpec::G(double s) const {
  if (antiderivative) return antiderivative(s);
  return integrate_g(g, 0.0, s);
}

NonlinearitySpec linear_nonlinearity(double slope) {
  NonlinearitySpec n = polynomial_nonlinearity(slope, 0.0, "linear:" + std::to_string(slope));
  n.slope_min = n.slope_max = slope;
  return n;
}

NonlinearitySpec nonlinearity_preset(const std::string& name) {
  const auto parts = split(name, ':');
  if (parts.empty()) throw std::invalid_argument("empty nonlinearity preset");
  const std::string& kind = parts[0];
  if (kind == "zero" && parts.size() == 1) {
    NonlinearitySpec n = linear_nonlinearity(0.0);
    n.name = "zero";
    return n;
  }
  if (kind == "linear" && parts.size() == 2) return linear_nonlinearity(parse_number(parts[1], name));
  if (kind == "cubic" && parts.size() == 1) return polynomial_nonlinearity(-2.0, -0.1, "cubic");
  if (kind == "cubic" && parts.size() == 3)
    return polynomial_nonlinearity(parse_number(parts[1], name), parse_number(parts[2], name), name);
  if (kind == "tanh" && parts.size() == 3) {
    const double a = parse_number(parts[1], name), b = parse_number(parts[2], name);
    NonlinearitySpec n;
    n.name = name;
    n.g = [a, b](double s) { return a * s + b * std::tanh(s); };
    n.g_prime = [a, b](double s) {
      const double c = std::cosh(s);
      return a + b / (c * c);
    };
    n.antiderivative = [a, b](double s) { return 0.5 * a * s * s + b * log_cosh(s); };
    n.slope_min = a + std::min(b, 0.0);
    n.slope_max = a + std::max(b, 0.0);
    if (n.slope_max <= 0) {
      n.monotonicity = Monotonicity::decreasing;
    } else if (n.slope_min < 0) {
      throw std::invalid_argument("nonlinearity '" + name + "' is not monotone");
    }
    return n;
  }
  throw std::invalid_argument("unknown nonlinearity preset '" + name +
                              "' (zero, linear:<c>, cubic, cubic:<a>:<b>, tanh:<a>:<b>)");
}

NonlinearitySpec nonlinearity_from_points(std::vector<double> s, std::vector<double> g, std::string name) {
  if (s.size() != g.size() || s.size() < 4)
    throw std::invalid_argument("nonlinearity table needs at least 4 (s, g) pairs");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw std::invalid_argument("nonlinearity table: s must be strictly increasing");

  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  const std::vector<double> knots = s;
  auto spline = std::make_shared<Pchip>(std::move(s), std::move(g));
  const double lo = knots.front(), hi = knots.back();
  const double g_lo = (*spline)(lo), g_hi = (*spline)(hi);
  const double d_lo = spline->prime(lo), d_hi = spline->prime(hi);

  auto value = [spline, lo, hi, g_lo, g_hi, d_lo, d_hi](double x) {
    if (x < lo) return g_lo + d_lo * (x - lo);
    if (x > hi) return g_hi + d_hi * (x - hi);
    return (*spline)(x);
  };
  auto slope = [spline, lo, hi, d_lo, d_hi](double x) {
    if (x < lo) return d_lo;
    if (x > hi) return d_hi;
    return spline->prime(x);
  };

  // Cumulative integral at the knots; cubic pieces integrate exactly with 3 Gauss nodes.
  auto cumulative = std::make_shared<std::vector<double>>(knots.size(), 0.0);
  for (std::size_t i = 1; i < knots.size(); ++i)
    (*cumulative)[i] = (*cumulative)[i - 1] +
                       boost::math::quadrature::gauss<double, 3>::integrate(value, knots[i - 1], knots[i]);
  auto primitive = [value, knots, cumulative, lo, hi, g_lo, g_hi, d_lo, d_hi](double x) {
    if (x <= lo) return g_lo * (x - lo) + 0.5 * d_lo * (x - lo) * (x - lo);
    if (x >= hi) return cumulative->back() + g_hi * (x - hi) + 0.5 * d_hi * (x - hi) * (x - hi);
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
    return (*cumulative)[k] + boost::math::quadrature::gauss<double, 3>::integrate(value, knots[k], x);
  };
  const double offset = primitive(0.0);

  NonlinearitySpec n;
  n.name = std::move(name);
  n.g = value;
  n.g_prime = slope;
  n.antiderivative = [primitive, offset](double x) { return primitive(x) - offset; };
  double dmin = std::min(d_lo, d_hi), dmax = std::max(d_lo, d_hi);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    for (int q = 0; q <= 8; ++q) {
      const double d = slope(knots[i] + (knots[i + 1] - knots[i]) * q / 8.0);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  n.slope_min = dmin;
  n.slope_max = dmax;
  if (dmax <= 0) n.monotonicity = Monotonicity::decreasing;
  else if (dmin < 0) throw std::invalid_argument("nonlinearity table is not monotone");
  return n;
}

NonlinearitySpec nonlinearity_from_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open nonlinearity table '" + path + "'");
  std::vector<double> s, g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    double a, b;
    if (!(is >> a)) continue;
    if (!(is >> b)) throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected 's g'");
    std::string extra;
    if (is >> extra) throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": trailing data");
    s.push_back(a);
    g.push_back(b);
  }
  return nonlinearity_from_points(std::move(s), std::move(g), path);
}

NonlinearitySpec with_measured_bounds(NonlinearitySpec g, double m1, double m2, std::size_t samples) {
  if (!(m1 <= m2)) throw std::invalid_argument("with_measured_bounds: need m1 <= m2");
  double dmin = kInf, dmax = -kInf;
  for (std::size_t k = 0; k < std::max<std::size_t>(samples, 2); ++k) {
    const double s = m1 + (m2 - m1) * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(samples, 2) - 1);
    const double d = g.derivative(s);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (dmin < 0 && dmax > 0) throw std::invalid_argument("nonlinearity '" + g.name + "' is not monotone on the interval");
  if (dmax <= 0 && dmin < 0) g.monotonicity = Monotonicity::decreasing;
  if (dmin >= 0 && dmax > 0) g.monotonicity = Monotonicity::increasing;
  g.slope_min = dmin;
  g.slope_max = dmax;
  g.m1 = m1;
  g.m2 = m2;
  return g;
}

NonlinearitySpec extend_nonlinearity(const NonlinearitySpec& base, double m1, double m2, double flat_tol) {
  if (!(m1 <= m2)) throw std::invalid_argument("extend_nonlinearity: need m1 <= m2");
  const double sigma = base.monotonicity == Monotonicity::increasing ? 1.0 : -1.0;
  const bool has_left = std::isfinite(m1), has_right = std::isfinite(m2);
  const double g1 = has_left ? base.g(m1) : 0.0, d1 = has_left ? base.g_prime(m1) : 0.0;
  const double g2 = has_right ? base.g(m2) : 0.0, d2 = has_right ? base.g_prime(m2) : 0.0;
  const double G1 = has_left ? base.G(m1) : 0.0, G2 = has_right ? base.G(m2) : 0.0;
  const bool left_flat = std::abs(d1) <= flat_tol, right_flat = std::abs(d2) <= flat_tol;
  const ScalarFn g = base.g, dg = base.g_prime;
  const NonlinearitySpec original = base;

  NonlinearitySpec n = base;
  n.name = base.name + " (extended)";
  n.m1 = m1;
  n.m2 = m2;
  n.g = [=](double s) {
    if (has_left && s < m1) {
      const double r = s - m1;
      if (!left_flat) return g1 + d1 * r;
      if (r >= -1.0) return g1 - sigma * r * r;
      return g1 - sigma + 2.0 * sigma * (r + 1.0);
    }
    if (has_right && s > m2) {
      const double r = s - m2;
      if (!right_flat) return g2 + d2 * r;
      if (r <= 1.0) return g2 + sigma * r * r;
      return g2 + sigma + 2.0 * sigma * (r - 1.0);
    }
    return g(s);
  };
  n.g_prime = [=](double s) {
    if (has_left && s < m1) {
      const double r = s - m1;
      if (!left_flat) return d1;
      return r >= -1.0 ? -2.0 * sigma * r : 2.0 * sigma;
    }
    if (has_right && s > m2) {
      const double r = s - m2;
      if (!right_flat) return d2;
      return r <= 1.0 ? 2.0 * sigma * r : 2.0 * sigma;
    }
    return dg(s);
  };
  n.antiderivative = [=](double s) {
    if (has_left && s < m1) {
      const double r = s - m1;
      if (!left_flat) return G1 + g1 * r + 0.5 * d1 * r * r;
      if (r >= -1.0) return G1 + g1 * r - sigma * r * r * r / 3.0;
      const double q = r + 1.0;
      return G1 - g1 + sigma / 3.0 + (g1 - sigma) * q + sigma * q * q;
    }
    if (has_right && s > m2) {
      const double r = s - m2;
      if (!right_flat) return G2 + g2 * r + 0.5 * d2 * r * r;
      if (r <= 1.0) return G2 + g2 * r + sigma * r * r * r / 3.0;
      const double q = r - 1.0;
      return G2 + g2 + sigma / 3.0 + (g2 + sigma) * q + sigma * q * q;
    }
    return original.G(s);
  };
  // Patches sweep slopes between 0 and 2 sigma; linear continuations keep the end slope.
  auto widen = [&](bool flat, double d) {
    const double lo = flat ? std::min(0.0, 2.0 * sigma) : d;
    const double hi = flat ? std::max(0.0, 2.0 * sigma) : d;
    n.slope_min = std::min(n.slope_min, lo);
    n.slope_max = std::max(n.slope_max, hi);
  };
  if (has_left) widen(left_flat, d1);
  if (has_right) widen(right_flat, d2);
  return n;
}

LegendreTransform::LegendreTransform(ScalarFn G, std::vector<double> s_grid, double tau_min, double tau_max,
                                     std::size_t tau_points)
    : G_(std::move(G)), s_grid_(std::move(s_grid)) {
  if (!(tau_max > tau_min) || tau_points < 3) throw std::invalid_argument("LegendreTransform: bad tau range");
  tau_.resize(tau_points);
  G_tau_.resize(tau_points);
  for (std::size_t k = 0; k < tau_points; ++k) {
    tau_[k] = tau_min + (tau_max - tau_min) * static_cast<double>(k) / static_cast<double>(tau_points - 1);
    G_tau_[k] = G_(tau_[k]);
  }
  values_.reserve(s_grid_.size());
  for (double s : s_grid_) values_.push_back(solve(s).second);
}

std::pair<double, double> LegendreTransform::solve(double s) const {
  std::size_t best = 0;
  double best_val = -kInf;
  for (std::size_t k = 0; k < tau_.size(); ++k) {
    const double v = s * tau_[k] - G_tau_[k];
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  if (best == 0 || best + 1 == tau_.size())
    throw UnboundedTransformError("Legendre transform: supremum at s=" + std::to_string(s) +
                                  " not attained in the tau range (g may need extension)");
  const auto [tau, neg] =
      detail::minimize_bracketed([&](double t) { return G_(t) - s * t; }, tau_[best - 1], tau_[best + 1]);
  if (-neg >= best_val) return {tau, -neg};
  return {tau_[best], best_val};
}

double LegendreTransform::operator()(double s) const { return solve(s).second; }
double LegendreTransform::argmax(double s) const { return solve(s).first; }

LegendreTransform legendre_transform(ScalarFn G, std::vector<double> s_grid) {
  return LegendreTransform(std::move(G), std::move(s_grid));
}

namespace {

SpectralField steady_map_on(const NonlinearitySpec& g, double beta, const Vec3& p, const SpectralField& zeta,
                            const Grid& grid, double* removed_mean) {
  const std::size_t J = zeta.truncation();
  SpectralField u = green(zeta, 1e-10 * std::max(1.0, l2_norm(zeta)));
  if (beta != 0.0) u += beta * linear_field(J, p);
  auto plan = transform_for(grid, J);
  GridField f = plan->synthesize(u);
  for (double& v : f.values) v = g(v);
  SpectralField out = plan->analyze(f);
  const double removed = remove_mean(out);
  if (removed_mean) *removed_mean = removed;
  return out;
}

}  // namespace

SpectralField steady_map(const NonlinearitySpec& g, double beta, const Vec3& p, const SpectralField& zeta,
                         std::size_t quadrature_order, double* removed_mean) {
  return steady_map_on(g, beta, p, zeta, power_grid(std::max<std::size_t>(zeta.truncation(), 1), quadrature_order),
                       removed_mean);
}

SteadyState solve_fixed_point(const NonlinearitySpec& g, double beta, const Vec3& p, const SpectralField& init,
                              const FixedPointOptions& opts) {
  if (!(opts.relax > 0.0 && opts.relax <= 1.0)) throw std::invalid_argument("solve_fixed_point: relax must be in (0, 1]");
  if (std::abs(norm(p) - 1.0) > 1e-12) throw std::invalid_argument("solve_fixed_point: p must be a unit vector");
  if (init.truncation() < 1) throw std::invalid_argument("solve_fixed_point: truncation must be >= 1");
  if (std::abs(init(0, 0)) > 1e-10 * std::max(1.0, l2_norm(init)))
    throw MeanError("solve_fixed_point: initial field must have zero mean");

  const Grid grid = power_grid(init.truncation(), std::max<std::size_t>(opts.quadrature_order, 2));
  SteadyState st;
  st.beta = beta;
  st.p = p;
  SpectralField zeta = init;
  zeta(0, 0) = 0.0;

  SpectralField best = zeta;
  double best_residual = kInf, best_shift = 0.0;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    double shift = 0.0;
    SpectralField d = steady_map_on(g, beta, p, zeta, grid, &shift);
    d -= zeta;
    const double r = l2_norm(d);
    st.max_mean_shift = std::max(st.max_mean_shift, std::abs(shift));
    st.iterations = it;
    if (!std::isfinite(r)) break;
    if (r < best_residual) {
      best_residual = r;
      best = zeta;
      best_shift = std::abs(shift);
    }
    zeta += opts.relax * d;
    if (opts.relax * r < opts.tol) {
      st.converged = true;
      break;
    }
  }

  if (st.converged) {
    double shift = 0.0;
    st.residual = l2_norm(steady_map_on(g, beta, p, zeta, grid, &shift) - zeta);
    st.mean_shift = std::abs(shift);
    st.zeta = zeta;
  } else {
    st.zeta = best;
    st.residual = best_residual;
    st.mean_shift = best_shift;
  }
  return st;
}

double zonality_defect(const SpectralField& zeta, const Vec3& q_in) {
  const double total = l2_norm(zeta);
  if (total == 0.0) throw std::invalid_argument("zonality_defect: zero field");
  const Vec3 q = normalized(q_in);
  SpectralField aligned = zeta;
  if (std::abs(q[0]) > 1e-15 || std::abs(q[1]) > 1e-15)
    aligned = rotate(zeta, align_e3_to(q), transform_grid(zeta.truncation()));
  double off = 0.0;
  for (std::size_t j = 1; j <= aligned.truncation(); ++j)
    for (int m = 1; m <= static_cast<int>(j); ++m) off += 2.0 * std::norm(aligned(j, m));
  return std::sqrt(off) / total;
}

AxisEstimate best_axis(const SpectralField& zeta, double moment_tol) {
  const double scale = l2_norm(zeta);
  if (scale == 0.0) throw std::invalid_argument("best_axis: zero field");
  const Vec3 m = moment(zeta);
  AxisEstimate out;
  if (norm(m) > moment_tol * scale) {
    out.axis = normalized(m);
    out.defect = zonality_defect(zeta, out.axis);
    return out;
  }
  out.fallback = true;

  // Fibonacci points on the upper hemisphere; q and -q are equivalent.
  const std::size_t n = 200;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<std::pair<double, Vec3>> scored;
  for (std::size_t k = 0; k < n; ++k) {
    const double z = 1.0 - (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 q{r * std::cos(golden * k), r * std::sin(golden * k), z};
    scored.emplace_back(zonality_defect(zeta, q), q);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  auto axis_of = [](const std::vector<double>& a) {
    return Vec3{std::sin(a[0]) * std::cos(a[1]), std::sin(a[0]) * std::sin(a[1]), std::cos(a[0])};
  };
  out.defect = kInf;
  for (std::size_t s = 0; s < std::min<std::size_t>(3, scored.size()); ++s) {
    const Vec3& q = scored[s].second;
    std::vector<double> start{std::acos(std::clamp(q[2], -1.0, 1.0)), std::atan2(q[1], q[0])};
    const auto local = detail::nelder_mead(
        [&](const std::vector<double>& a) { return zonality_defect(zeta, axis_of(a)); }, start, 0.05, 1e-10, 400);
    if (local.value < out.defect) {
      out.defect = local.value;
      out.axis = axis_of(local.x);
    }
  }
  if (out.axis[2] < 0) out.axis = {-out.axis[0], -out.axis[1], -out.axis[2]};
  return out;
}

double spectral_gap(const NonlinearitySpec& g, double beta, const Vec3& p, const SpectralField& zeta) {
  const std::size_t J = zeta.truncation();
  if (J < 2) throw std::invalid_argument("spectral_gap: truncation must be >= 2");
  const Grid grid = power_grid(J, 4);
  auto plan = transform_for(grid, J);

  SpectralField u = green(zeta, 1e-10 * std::max(1.0, l2_norm(zeta)));
  if (beta != 0.0) u += beta * linear_field(J, p);
  const GridField uf = plan->synthesize(u);

  const std::size_t dim = (J + 1) * (J + 1) - 4;
  Eigen::MatrixXd B(grid.size(), dim);
  Eigen::VectorXd lambda(dim);
  std::size_t col = 0;
  for (std::size_t j = 2; j <= J; ++j) {
    for (int m = 0; m <= static_cast<int>(j); ++m) {
      for (int part = 0; part < (m == 0 ? 1 : 2); ++part) {
        SpectralField e(J);
        if (m == 0) e(j, 0) = 1.0;
        else e.set_real_pair(j, m, part == 0 ? Complex(1.0 / std::sqrt(2.0), 0.0) : Complex(0.0, 1.0 / std::sqrt(2.0)));
        const GridField f = plan->synthesize(e);
        B.col(col) = Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
        lambda(col) = static_cast<double>(j * (j + 1));
        ++col;
      }
    }
  }
  Eigen::VectorXd w(grid.size());
  for (std::size_t i = 0; i < grid.nlat; ++i)
    for (std::size_t k = 0; k < grid.nlon; ++k)
      w(grid.index(i, k)) = g.derivative(uf.at(i, k)) * grid.cell_area(i);

  Eigen::MatrixXd A = -(B.transpose() * w.asDiagonal() * B);
  A.diagonal() += lambda;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double rotation_defect_outside_e2(const SpectralField& zeta, const Vec3& p, double theta) {
  const double total = l2_norm(zeta);
  if (total == 0.0) return 0.0;
  SpectralField d = rotate(zeta, RotationSpec(normalized(p), theta)) - zeta;
  for (int m = -2; m <= 2; ++m) d(2, m) = 0.0;
  return l2_norm(d) / total;
}

}  // namespace vortsphere
