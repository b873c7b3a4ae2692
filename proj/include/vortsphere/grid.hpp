#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vortsphere {

using Vec3 = std::array<double, 3>;

/// Thrown when a grid cannot represent the requested truncation.
class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gauss-Legendre latitudes (in mu = x3 = sin(latitude)) crossed with
/// uniform longitudes. Cell (i, k) has area quad_weights[i] * 2*pi/nlon;
/// the cell areas sum to 4*pi.
struct Grid {
  std::size_t nlat = 0;
  std::size_t nlon = 0;
  std::vector<double> mu_nodes;      // ascending
  std::vector<double> quad_weights;  // sum to 2
  std::vector<double> lon_nodes;

  std::size_t size() const { return nlat * nlon; }
  std::size_t index(std::size_t i, std::size_t k) const { return i * nlon + k; }
  double cell_area(std::size_t i) const;
  Vec3 point(std::size_t i, std::size_t k) const;

  /// Largest truncation that analyze/synthesize can handle exactly.
  std::size_t max_truncation() const;
  /// True if products of two degree-J fields are resolved (3/2 rule).
  bool dealiases(std::size_t J) const;

  bool operator==(const Grid& other) const {
    return nlat == other.nlat && nlon == other.nlon;
  }
};

Grid make_grid(std::size_t nlat, std::size_t nlon);

/// Smallest grid that analyzes degree-J fields exactly.
Grid transform_grid(std::size_t J);
/// Smallest grid that resolves quadratic products of degree-J fields.
Grid dealiased_grid(std::size_t J);
/// Grid on which integrals of order-th powers of degree-J fields are exact.
Grid power_grid(std::size_t J, std::size_t order);

/// Real samples, one per grid node, latitude-major.
struct GridField {
  Grid grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(Grid g) : grid(std::move(g)), values(grid.size(), 0.0) {}
  GridField(Grid g, std::vector<double> v);

  double& at(std::size_t i, std::size_t k) { return values[grid.index(i, k)]; }
  double at(std::size_t i, std::size_t k) const { return values[grid.index(i, k)]; }
};

/// Samples f(x) at every grid node.
template <class F>
GridField sample(const Grid& grid, F&& f) {
  GridField out(grid);
  for (std::size_t i = 0; i < grid.nlat; ++i)
    for (std::size_t k = 0; k < grid.nlon; ++k) out.at(i, k) = f(grid.point(i, k));
  return out;
}

/// Quadrature of a grid field over the sphere.
double integrate(const GridField& f);
/// (integral |f|^p)^(1/p) by quadrature.
double lp_norm(const GridField& f, double p);

}  // namespace vortsphere
