#include "vortsphere/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vortsphere {

namespace {

constexpr double kPi = std::numbers::pi;

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(std::size_t n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = pk;
  }
  const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

std::size_t round_up_even(std::size_t n) { return n + (n % 2); }

}  // namespace

double Grid::cell_area(std::size_t i) const {
  return quad_weights[i] * 2.0 * kPi / static_cast<double>(nlon);
}

Vec3 Grid::point(std::size_t i, std::size_t k) const {
  const double mu = mu_nodes[i];
  const double c = std::sqrt(1.0 - mu * mu);
  return {c * std::cos(lon_nodes[k]), c * std::sin(lon_nodes[k]), mu};
}

std::size_t Grid::max_truncation() const {
  return std::min(nlat - 1, (nlon - 1) / 2);
}

bool Grid::dealiases(std::size_t J) const {
  return 2 * nlat >= 3 * (J + 1) && nlon >= 3 * J + 1;
}

Grid make_grid(std::size_t nlat, std::size_t nlon) {
  if (nlat < 2 || nlon < 4 || nlon % 2 != 0)
    throw std::invalid_argument("make_grid: need nlat >= 2 and even nlon >= 4 (got nlat=" +
                                std::to_string(nlat) + ", nlon=" + std::to_string(nlon) + ")");
  Grid g;
  g.nlat = nlat;
  g.nlon = nlon;
  g.mu_nodes.resize(nlat);
  g.quad_weights.resize(nlat);

  // Roots come in +/- pairs; solve for the positive half with Newton's method
  // from the Chebyshev-like initial guess.
  const std::size_t half = (nlat + 1) / 2;
  for (std::size_t r = 0; r < half; ++r) {
    double x = std::cos(kPi * (static_cast<double>(r) + 0.75) / (static_cast<double>(nlat) + 0.5));
    bool converged = false;
    for (int it = 0; it < 100 && !converged; ++it) {
      auto [p, d] = legendre_with_derivative(nlat, x);
      const double dx = p / d;
      x -= dx;
      converged = std::abs(dx) < 1e-16;
    }
    auto [p, dp] = legendre_with_derivative(nlat, x);
    // Newton may stall one ulp short of the 1e-16 step; accept a root-level residual.
    if (!converged && std::abs(p) > 1e-13)
      throw std::runtime_error("make_grid: Gauss-Legendre node solve did not converge for nlat=" +
                               std::to_string(nlat));
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Ascending order: index r from the top maps to nlat-1-r.
    g.mu_nodes[nlat - 1 - r] = x;
    g.mu_nodes[r] = -x;
    g.quad_weights[nlat - 1 - r] = w;
    g.quad_weights[r] = w;
  }
  if (nlat % 2 == 1) g.mu_nodes[nlat / 2] = 0.0;

  // Remove rounding drift so the weights sum to exactly 2 (total area 4 pi).
  double total = 0.0;
  for (double w : g.quad_weights) total += w;
  for (double& w : g.quad_weights) w *= 2.0 / total;

  g.lon_nodes.resize(nlon);
  for (std::size_t k = 0; k < nlon; ++k)
    g.lon_nodes[k] = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(nlon);
  return g;
}

Grid transform_grid(std::size_t J) {
  return make_grid(std::max<std::size_t>(J + 1, 2), std::max<std::size_t>(round_up_even(2 * J + 1), 4));
}

Grid dealiased_grid(std::size_t J) {
  return make_grid(std::max<std::size_t>((3 * (J + 1) + 1) / 2, 2),
                   std::max<std::size_t>(round_up_even(3 * J + 1), 4));
}

Grid power_grid(std::size_t J, std::size_t order) {
  const std::size_t degree = std::max<std::size_t>(order, 1) * J;
  return make_grid(std::max<std::size_t>(degree / 2 + 1, 2),
                   std::max<std::size_t>(round_up_even(degree + 1), 4));
}

GridField::GridField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size())
    throw std::invalid_argument("GridField: value count does not match grid size");
}

double integrate(const GridField& f) {
  const Grid& g = f.grid;
  double total = 0.0;
  for (std::size_t i = 0; i < g.nlat; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < g.nlon; ++k) row += f.at(i, k);
    total += row * g.cell_area(i);
  }
  return total;
}

double lp_norm(const GridField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: exponent must be >= 1");
  const Grid& g = f.grid;
  double total = 0.0;
  for (std::size_t i = 0; i < g.nlat; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < g.nlon; ++k) {
      const double a = std::abs(f.at(i, k));
      row += (p == 2.0) ? a * a : std::pow(a, p);
    }
    total += row * g.cell_area(i);
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace vortsphere
