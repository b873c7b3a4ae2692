#include "vortsphere/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "optimize.hpp"
#include "vortsphere/diagnostics.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/transform.hpp"

namespace vortsphere {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must lie in (1, inf)");
}

std::vector<double> area_weights(const Grid& g) {
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.nlat; ++i)
    for (std::size_t k = 0; k < g.nlon; ++k) w[g.index(i, k)] = g.cell_area(i);
  return w;
}

// Quadrature grid for || . ||_p of degree-J fields: exact for even integer
// p, oversampled otherwise since |u|^p has kinks at the zeros of u.
Grid norm_grid(std::size_t J, double p) {
  const bool even = p == std::floor(p) && static_cast<long>(p) % 2 == 0;
  const auto order = static_cast<std::size_t>(std::ceil(p));
  return power_grid(std::max<std::size_t>(J, 1), even ? order : 4 * order + 4);
}

double lp_of_values(const std::vector<double>& values, const Grid& g, double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.nlat; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < g.nlon; ++k) row += std::pow(std::abs(values[g.index(i, k)]), p);
    acc += row * g.cell_area(i);
  }
  return std::pow(acc, 1.0 / p);
}

Mat3 euler_zyz(double a, double b, double c) {
  const Vec3 e3{0.0, 0.0, 1.0}, e2{0.0, 1.0, 0.0};
  return multiply(multiply(RotationSpec(e3, a).matrix(), RotationSpec(e2, b).matrix()), RotationSpec(e3, c).matrix());
}

}  // namespace

double WeightedSample::total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

WeightedSample make_sample(std::vector<double> values, std::vector<double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("make_sample: size mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  WeightedSample out;
  out.values.reserve(values.size());
  out.weights.reserve(values.size());
  for (std::size_t n : order) {
    if (!(weights[n] > 0.0)) throw std::invalid_argument("make_sample: weights must be positive");
    if (!out.values.empty() && out.values.back() == values[n]) {
      out.weights.back() += weights[n];
    } else {
      out.values.push_back(values[n]);
      out.weights.push_back(weights[n]);
    }
  }
  return out;
}

WeightedSample quantile(const GridField& u) { return make_sample(u.values, area_weights(u.grid)); }

double class_distance(const WeightedSample& a, const WeightedSample& b, double p) {
  require_exponent(p);
  const double ta = a.total(), tb = b.total();
  if (std::abs(ta - tb) > 1e-12 * std::max(ta, tb))
    throw std::invalid_argument("class_distance: samples carry different total weight");
  if (a.values.empty()) return 0.0;
  std::size_t i = 0, j = 0;
  double ra = a.weights[0], rb = b.weights[0];
  double acc = 0.0;
  while (i < a.values.size() && j < b.values.size()) {
    const double piece = std::min(ra, rb);
    acc += piece * std::pow(std::abs(a.values[i] - b.values[j]), p);
    ra -= piece;
    rb -= piece;
    if (ra <= 0.0 && ++i < a.values.size()) ra = a.weights[i];
    if (rb <= 0.0 && ++j < b.values.size()) rb = b.weights[j];
  }
  return std::pow(acc, 1.0 / p);
}

double class_distance(const GridField& u, const GridField& v, double p) {
  return class_distance(quantile(u), quantile(v), p);
}

bool in_class(const GridField& u, const GridField& v, double tol) { return class_distance(u, v, 2.0) < tol; }

Grid class_grid(std::size_t J) {
  const std::size_t nlat = std::max<std::size_t>(64, 3 * (J + 1));
  return make_grid(nlat, 2 * nlat);
}

double lp_distance(const SpectralField& a, const SpectralField& b, double p) {
  require_exponent(p);
  const std::size_t J = std::max(a.truncation(), b.truncation());
  const SpectralField d = a.resized(J) - b.resized(J);
  if (p == 2.0) return l2_norm(d);
  const Grid g = norm_grid(J, p);
  return lp_of_values(synthesize(d, g).values, g, p);
}

OrbitDistanceReport orbit_distance(const SpectralField& w_in, const SpectralField& zeta_in, RotationGroup group,
                                   double p) {
  require_exponent(p);
  const std::size_t J = std::max(w_in.truncation(), zeta_in.truncation());
  const SpectralField w = w_in.resized(J), zeta = zeta_in.resized(J);

  // H: spectral phase rotation.
  auto h_objective = [&](double theta) { return lp_distance(w, rotate_about_e3(zeta, theta), p); };
  const std::size_t n_coarse = std::max<std::size_t>(64, 4 * (J + 1));
  std::vector<double> coarse(n_coarse);
  for (std::size_t k = 0; k < n_coarse; ++k) coarse[k] = h_objective(kTwoPi * k / n_coarse);
  std::vector<std::size_t> minima;
  for (std::size_t k = 0; k < n_coarse; ++k)
    if (coarse[k] <= coarse[(k + n_coarse - 1) % n_coarse] && coarse[k] <= coarse[(k + 1) % n_coarse])
      minima.push_back(k);
  std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return coarse[a] < coarse[b]; });
  if (minima.size() > 4) minima.resize(4);
  const double h = kTwoPi / n_coarse;
  double best_theta = 0.0, best_h = h_objective(0.0);
  for (std::size_t k : minima) {
    const double c = kTwoPi * k / n_coarse;
    const auto [theta, value] = detail::minimize_bracketed(h_objective, c - h, c + h, 52);
    if (value < best_h) {
      best_h = value;
      best_theta = theta;
    }
  }
  if (p == 2.0) {
    // Newton on the overlap trig polynomial S(theta) = <w, zeta o R_theta>,
    // which the bracketed search only locates to about sqrt(eps).
    std::vector<Complex> overlap(2 * J + 1);
    for (std::size_t j = 0; j <= J; ++j)
      for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m)
        overlap[m + J] += std::conj(w(j, m)) * zeta(j, m);
    for (int it = 0; it < 8; ++it) {
      double d1 = 0.0, d2 = 0.0;
      for (int m = -static_cast<int>(J); m <= static_cast<int>(J); ++m) {
        const Complex t = std::polar(1.0, m * best_theta) * overlap[m + J];
        d1 -= m * t.imag();
        d2 -= m * m * t.real();
      }
      if (!(d2 < 0.0)) break;
      const double trial = best_theta - d1 / d2;
      const double value = h_objective(trial);
      if (!(value <= best_h)) break;
      best_h = value;
      best_theta = trial;
    }
  }
  best_theta = std::remainder(best_theta, kTwoPi);

  OrbitDistanceReport report;
  report.rotation = RotationSpec({0.0, 0.0, 1.0}, best_theta).matrix();
  report.distance = best_h;
  if (group == RotationGroup::SO3) {
    // Objective on Euler angles via evaluation at rotated nodes.
    const Grid g = p == 2.0 ? transform_grid(J) : norm_grid(J, p);
    const std::vector<double> w_vals = synthesize(w, g).values;
    std::vector<Vec3> nodes(g.size()), rotated(g.size());
    for (std::size_t i = 0; i < g.nlat; ++i)
      for (std::size_t k = 0; k < g.nlon; ++k) nodes[g.index(i, k)] = g.point(i, k);
    auto so3_objective_matrix = [&](const Mat3& R) {
      for (std::size_t n = 0; n < nodes.size(); ++n) rotated[n] = mat_vec(R, nodes[n]);
      std::vector<double> diff = evaluate(zeta, rotated);
      for (std::size_t n = 0; n < diff.size(); ++n) diff[n] = w_vals[n] - diff[n];
      return lp_of_values(diff, g, p);
    };
    auto so3_objective = [&](const std::array<double, 3>& e) { return so3_objective_matrix(euler_zyz(e[0], e[1], e[2])); };

    std::vector<std::pair<double, std::array<double, 3>>> seeds;
    const int na = 8, nb = 5;
    for (int ia = 0; ia < na; ++ia)
      for (int ib = 0; ib < nb; ++ib)
        for (int ic = 0; ic < na; ++ic) {
          if ((ib == 0 || ib == nb - 1) && ic > 0) continue;  // gimbal-degenerate rows
          const std::array<double, 3> e{kTwoPi * ia / na, std::numbers::pi * ib / (nb - 1), kTwoPi * ic / na};
          seeds.emplace_back(so3_objective(e), e);
        }
    std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (seeds.size() > 4) seeds.resize(4);
    seeds.emplace_back(best_h, std::array<double, 3>{best_theta, 0.0, 0.0});

    // Local refinement in rotation-vector coordinates about each seed (no
    // gimbal degeneracy): simplex search, then bracketed coordinate sweeps on
    // the winner.
    auto about = [](const Mat3& base, const std::vector<double>& v) {
      const double a = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      return a > 0 ? multiply(base, RotationSpec({v[0] / a, v[1] / a, v[2] / a}, a).matrix()) : base;
    };
    double best = best_h;
    Mat3 best_R = report.rotation;
    for (const auto& [seed_value, e] : seeds) {
      Mat3 base = euler_zyz(e[0], e[1], e[2]);
      double value = seed_value;
      for (int round = 0; round < 2; ++round) {
        const auto nm = detail::nelder_mead([&](const std::vector<double>& v) { return so3_objective_matrix(about(base, v)); },
                                            {0.0, 0.0, 0.0}, round == 0 ? 0.2 : 0.02, 1e-8, 400);
        if (nm.value >= value) break;
        value = nm.value;
        base = about(base, nm.x);
      }
      if (value < best) {
        best = value;
        best_R = base;
      }
    }
    std::vector<double> v{0.0, 0.0, 0.0};
    double width = 1e-3;
    for (int sweep = 0; sweep < 4; ++sweep) {
      for (int c = 0; c < 3; ++c) {
        auto line = [&](double x) {
          auto trial = v;
          trial[c] = x;
          return so3_objective_matrix(about(best_R, trial));
        };
        const auto [x, fx] = detail::minimize_bracketed(line, v[c] - width, v[c] + width, 52, 60);
        if (fx < best) {
          best = fx;
          v[c] = x;
        }
      }
      width *= 0.1;
    }
    best_R = about(best_R, v);
    report.distance = best;
    report.rotation = best_R;
  }
  report.argmin = axis_angle(report.rotation);
  report.objective = report.distance;
  return report;
}

SpectralField e2_element(std::size_t J, const std::array<double, 5>& c) {
  if (J < 2) throw std::invalid_argument("e2_element: truncation must be >= 2");
  SpectralField y(J);
  const double r = 1.0 / std::sqrt(2.0);
  y(2, 0) = c[0];
  y.set_real_pair(2, 1, Complex(c[1] * r, c[2] * r));
  y.set_real_pair(2, 2, Complex(c[3] * r, c[4] * r));
  return y;
}

std::array<double, 5> e2_coordinates(const SpectralField& a) {
  if (a.truncation() < 2) return {};
  const double s = std::sqrt(2.0);
  return {a(2, 0).real(), s * a(2, 1).real(), s * a(2, 1).imag(), s * a(2, 2).real(), s * a(2, 2).imag()};
}

OrbitDistanceReport e2_orbit_distance(const SpectralField& w_in, const SpectralField& zeta_in, double p,
                                      const E2SearchOptions& opts) {
  require_exponent(p);
  const std::size_t J = std::max<std::size_t>({w_in.truncation(), zeta_in.truncation(), 2});
  const SpectralField w = w_in.resized(J), zeta = zeta_in.resized(J);
  const SpectralField d = w - zeta;

  // Class term on a fine grid with precomputed basis samples.
  const Grid cg = opts.class_nlat ? make_grid(opts.class_nlat, 2 * opts.class_nlat) : class_grid(J);
  const auto cplan = transform_for(cg, J);
  const std::vector<double> weights = area_weights(cg);
  const std::vector<double> zeta_vals = cplan->synthesize(zeta).values;
  const WeightedSample zeta_q = make_sample(zeta_vals, weights);
  std::array<std::vector<double>, 5> basis;
  for (int k = 0; k < 5; ++k) {
    std::array<double, 5> unit{};
    unit[k] = 1.0;
    basis[k] = cplan->synthesize(e2_element(J, unit)).values;
  }
  std::vector<double> shifted(zeta_vals.size());
  auto class_term = [&](const std::array<double, 5>& c) {
    for (std::size_t n = 0; n < shifted.size(); ++n) {
      double v = zeta_vals[n];
      for (int k = 0; k < 5; ++k) v += c[k] * basis[k][n];
      shifted[n] = v;
    }
    return class_distance(make_sample(shifted, weights), zeta_q, p);
  };

  // Distance term: closed form for p = 2, quadrature otherwise.
  const std::array<double, 5> proj = e2_coordinates(d);
  const double off_e2 = std::sqrt(std::max(0.0, l2_norm(d) * l2_norm(d) - degree_energy(d, 2)));
  const Grid ng = norm_grid(J, p);
  std::vector<double> d_vals, nbasis[5];
  if (p != 2.0) {
    const auto nplan = transform_for(ng, J);
    d_vals = nplan->synthesize(d).values;
    for (int k = 0; k < 5; ++k) {
      std::array<double, 5> unit{};
      unit[k] = 1.0;
      nbasis[k] = nplan->synthesize(e2_element(J, unit)).values;
    }
  }
  std::vector<double> resid(d_vals.size());
  auto distance_term = [&](const std::array<double, 5>& c) {
    if (p == 2.0) {
      double s = off_e2 * off_e2;
      for (int k = 0; k < 5; ++k) s += (proj[k] - c[k]) * (proj[k] - c[k]);
      return std::sqrt(s);
    }
    for (std::size_t n = 0; n < d_vals.size(); ++n) {
      double v = d_vals[n];
      for (int k = 0; k < 5; ++k) v -= c[k] * nbasis[k][n];
      resid[n] = v;
    }
    return lp_of_values(resid, ng, p);
  };

  auto to_array = [](const std::vector<double>& x) {
    std::array<double, 5> c{};
    std::copy(x.begin(), x.end(), c.begin());
    return c;
  };
  auto objective = [&](const std::vector<double>& x) {
    const auto c = to_array(x);
    return distance_term(c) + opts.kappa * class_term(c);
  };

  const double scale = std::max({l2_norm(d), l2_norm(zeta) * 1e-3, 1e-12});
  OrbitDistanceReport report;
  report.objective = std::numeric_limits<double>::infinity();
  report.converged = false;
  for (const auto& start : {std::vector<double>(5, 0.0), std::vector<double>(proj.begin(), proj.end())}) {
    const auto local = detail::nelder_mead(objective, start, 0.1 * scale, opts.size_tol * scale, opts.max_iter);
    if (local.value < report.objective) {
      report.objective = local.value;
      report.e2_coeffs = to_array(local.x);
      report.converged = local.converged;
    }
  }
  report.distance = distance_term(report.e2_coeffs);
  report.class_violation = class_term(report.e2_coeffs);

  // Exact members: if zeta lives in degrees 1 and 2 with its degree-1 part
  // along e3 (or absent), every rotation about e3 (or every rotation) maps
  // zeta into zeta + E2 and keeps its class, so the class term is zero
  // without sampling.
  const double z2 = l2_norm(zeta) * l2_norm(zeta);
  double high = 0.0;
  for (std::size_t j = 3; j <= J; ++j) high += degree_energy(zeta, j);
  const auto q = degree_one_moment(zeta);
  const double q_perp = std::hypot(q[0], q[1]);
  const bool no_degree_one = std::hypot(q_perp, q[2]) <= 1e-12 * std::sqrt(z2);
  if (z2 > 0 && high <= 1e-24 * z2 && (no_degree_one || q_perp <= 1e-12 * std::abs(q[2]))) {
    const OrbitDistanceReport orbit = orbit_distance(w, zeta, no_degree_one ? RotationGroup::SO3 : RotationGroup::H, p);
    const SpectralField moved = no_degree_one ? rotate(zeta, orbit.rotation, transform_grid(J))
                                              : rotate_about_e3(zeta, orbit.argmin.axis[2] * orbit.argmin.angle);
    const auto c = e2_coordinates(moved - zeta);
    const double value = distance_term(c);
    if (value <= report.objective) {
      report.objective = value;
      report.e2_coeffs = c;
      report.distance = value;
      report.class_violation = 0.0;
      report.rotation = orbit.rotation;
      report.argmin = orbit.argmin;
      report.rotated_member = true;
      report.converged = true;
    }
  }
  return report;
}

SpectralField flow_perturbation(const SpectralField& zeta, const SpectralField& chi_in, double eps, std::size_t steps) {
  if (eps == 0.0) return zeta;
  const std::size_t J = zeta.truncation();
  const SpectralField chi = chi_in.resized(J);
  const Grid grid = dealiased_grid(J);
  if (steps == 0) {
    GridField d_lon, d_mu;
    transform_for(grid, J)->synthesize_derivatives(chi, d_lon, d_mu);
    double vmax = 0.0;
    for (std::size_t i = 0; i < grid.nlat; ++i) {
      const double c2 = 1.0 - grid.mu_nodes[i] * grid.mu_nodes[i];
      for (std::size_t k = 0; k < grid.nlon; ++k) {
        const double a = d_lon.at(i, k), b = d_mu.at(i, k);
        vmax = std::max(vmax, std::sqrt(a * a / c2 + b * b * c2));
      }
    }
    steps = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(std::abs(eps) * vmax * (J + 1) / 0.1)));
  }
  const double h = eps / static_cast<double>(steps);
  auto tendency = [&](const SpectralField& z) {
    SpectralField r = jacobian(chi, z, grid).resized(J);
    r *= -1.0;
    r(0, 0) = 0.0;
    return r;
  };
  SpectralField z = zeta;
  for (std::size_t s = 0; s < steps; ++s) {
    const SpectralField k1 = tendency(z);
    const SpectralField k2 = tendency(z + (0.5 * h) * k1);
    const SpectralField k3 = tendency(z + (0.5 * h) * k2);
    const SpectralField k4 = tendency(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (const Complex& c : z.coeffs())
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw std::runtime_error("flow_perturbation: unstable step");
  }
  return z;
}

DirectionResult probe_direction(const SpectralField& zeta, const SpectralField& chi, double eps) {
  DirectionResult r;
  r.perturbed = flow_perturbation(zeta, chi, eps);
  r.energy_change = energy(r.perturbed) - energy(zeta);
  const Vec3 a = moment(zeta), b = moment(r.perturbed);
  for (int c = 0; c < 3; ++c) r.moment_change[c] = b[c] - a[c];
  return r;
}

namespace {

// h_k = J(x_k, zeta): the first-order change of m_k along the flow of chi is
// eps * <chi, h_k>.
std::array<SpectralField, 3> moment_generators(const SpectralField& zeta) {
  const std::size_t J = zeta.truncation();
  const Grid grid = dealiased_grid(J);
  std::array<SpectralField, 3> h;
  for (int k = 0; k < 3; ++k) h[k] = jacobian(coordinate_field(J, k), zeta, grid);
  return h;
}

Eigen::Matrix3d gram_of(const std::array<SpectralField, 3>& h) {
  Eigen::Matrix3d gram;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) gram(a, b) = inner(h[a], h[b]);
  return gram;
}

// chi + sum_k c_k h_k with <chi + ..., h> = target (least squares).
void steer(SpectralField& chi, const std::array<SpectralField, 3>& h, const Eigen::Matrix3d& gram,
           const Eigen::Vector3d& target) {
  Eigen::Vector3d rhs;
  for (int a = 0; a < 3; ++a) rhs(a) = target(a) - inner(chi, h[a]);
  const Eigen::Vector3d c = gram.completeOrthogonalDecomposition().solve(rhs);
  for (int k = 0; k < 3; ++k) chi += c(k) * h[k];
}

Vec3 moment_multiplier(const SpectralField& zeta, const std::array<SpectralField, 3>& h, const Eigen::Matrix3d& gram) {
  const std::size_t J = zeta.truncation();
  SpectralField z = zeta;
  z(0, 0) = 0.0;
  const SpectralField psi = green(z);
  const SpectralField drift = jacobian(psi, z, dealiased_grid(J));
  Eigen::Vector3d rhs;
  for (int a = 0; a < 3; ++a) rhs(a) = inner(drift, h[a]);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix3d> cod(gram);
  Eigen::Vector3d lambda = cod.solve(rhs);
  // Directions with no generator: take the degree-1 part of psi.
  const Vec3 mpsi = moment(psi);
  Eigen::Vector3d q;
  for (int k = 0; k < 3; ++k) q(k) = 3.0 / (4.0 * std::numbers::pi) * mpsi[k];
  const Eigen::Matrix3d range_proj = cod.solve(gram);  // projector onto the row space
  lambda += q - range_proj * q;
  return {lambda(0), lambda(1), lambda(2)};
}

double max_velocity(const SpectralField& chi) {
  const std::size_t J = std::max<std::size_t>(chi.truncation(), 1);
  const Grid grid = transform_grid(J);
  GridField d_lon, d_mu;
  transform_for(grid, J)->synthesize_derivatives(chi.resized(J), d_lon, d_mu);
  double vmax = 0.0;
  for (std::size_t i = 0; i < grid.nlat; ++i) {
    const double c2 = 1.0 - grid.mu_nodes[i] * grid.mu_nodes[i];
    for (std::size_t k = 0; k < grid.nlon; ++k) {
      const double a = d_lon.at(i, k), b = d_mu.at(i, k);
      vmax = std::max(vmax, std::sqrt(a * a / c2 + b * b * c2));
    }
  }
  return vmax;
}

}  // namespace

Vec3 moment_multiplier(const SpectralField& zeta) {
  const auto h = moment_generators(zeta);
  return moment_multiplier(zeta, h, gram_of(h));
}

SpectralField project_moment_preserving(const SpectralField& chi_in, const SpectralField& zeta_in) {
  const std::size_t J = std::max(chi_in.truncation(), zeta_in.truncation());
  SpectralField chi = chi_in.resized(J);
  chi(0, 0) = 0.0;
  for (int m = -1; m <= 1; ++m) chi(1, m) = 0.0;
  const auto h = moment_generators(zeta_in.resized(J));
  steer(chi, h, gram_of(h), Eigen::Vector3d::Zero());
  return chi;
}

ProbeReport extremality_probe(const SpectralField& zeta, ProbeMode mode, std::size_t n_samples, double eps,
                              const ProbeOptions& opts) {
  ProbeReport report;
  const std::size_t J = std::max<std::size_t>(zeta.truncation(), 2);
  const SpectralField z = zeta.resized(J);
  const double e0 = energy(z);
  const double sign = mode == ProbeMode::min ? 1.0 : -1.0;
  report.tolerance = 1e-8 * std::abs(e0) + opts.allowance * eps * eps;
  report.worst_signed_change = std::numeric_limits<double>::infinity();
  report.worst_signed_augmented = std::numeric_limits<double>::infinity();
  const double zeta_norm = l2_norm(z);
  const auto h = moment_generators(z);
  const Eigen::Matrix3d gram = gram_of(h);
  const Vec3 lambda = moment_multiplier(z, h, gram);
  std::mt19937_64 rng(opts.seed);
  for (std::size_t n = 0; n < n_samples; ++n) {
    SpectralField chi = random_band_limited(J, 2, opts.chi_degree, rng);
    const double norm_chi = l2_norm(chi);
    if (norm_chi > 0) chi *= 1.0 / norm_chi;
    chi = project_moment_preserving(chi, z);
    // |dm| scale: eps * (velocity size) * ||zeta||.
    const double admissible = opts.moment_tol * std::abs(eps) * max_velocity(chi) * zeta_norm;
    DirectionResult r = probe_direction(z, chi, eps);
    // Newton steps on the 3 generator coefficients remove the higher-order
    // moment change left by the first-order projection.
    Eigen::Vector3d target = Eigen::Vector3d::Zero();
    for (int it = 0; it < 4 && zeta_norm > 0 && norm(r.moment_change) > 1e-3 * admissible; ++it) {
      for (int k = 0; k < 3; ++k) target(k) -= r.moment_change[k] / eps;
      SpectralField steered = chi;
      steer(steered, h, gram, target);
      r = probe_direction(z, steered, eps);
    }
    const double dm = norm(r.moment_change);
    report.worst_moment_violation = std::max(report.worst_moment_violation, dm);
    if (zeta_norm > 0 && dm > admissible) {
      ++report.skipped;
      continue;
    }
    ++report.samples;
    report.energy_changes.push_back(r.energy_change);
    report.worst_signed_change = std::min(report.worst_signed_change, sign * r.energy_change);
    const double augmented = r.energy_change - dot(lambda, r.moment_change);
    report.augmented_changes.push_back(augmented);
    report.worst_signed_augmented = std::min(report.worst_signed_augmented, sign * augmented);
    if (sign * augmented < -report.tolerance) ++report.violations;
  }
  if (report.samples == 0) report.worst_signed_change = report.worst_signed_augmented = 0.0;
  return report;
}

}  // namespace vortsphere
