#include "vortsphere/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vortsphere/transform.hpp"

namespace vortsphere {

SpectralField laplacian(const SpectralField& a) {
  SpectralField out = a;
  for (std::size_t j = 0; j <= a.truncation(); ++j) {
    const double lambda = static_cast<double>(j * (j + 1));
    for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) out(j, m) *= -lambda;
  }
  return out;
}

SpectralField green(const SpectralField& a, double mean_tol) {
  if (std::abs(a(0, 0)) > mean_tol)
    throw MeanError("green: input has nonzero mean coefficient " + std::to_string(std::abs(a(0, 0))));
  SpectralField out = a;
  out(0, 0) = 0.0;
  for (std::size_t j = 1; j <= a.truncation(); ++j) {
    const double inv = 1.0 / static_cast<double>(j * (j + 1));
    for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) out(j, m) *= inv;
  }
  return out;
}

SpectralField jacobian(const SpectralField& psi, const SpectralField& zeta, const Grid& grid,
                       bool allow_aliasing) {
  const std::size_t J = std::max(psi.truncation(), zeta.truncation());
  if (!allow_aliasing && !grid.dealiases(J))
    throw ResolutionError("jacobian: grid " + std::to_string(grid.nlat) + "x" + std::to_string(grid.nlon) +
                          " does not dealias products at J=" + std::to_string(J));
  auto plan = transform_for(grid, J);
  GridField psi_lon, psi_mu, zeta_lon, zeta_mu;
  plan->synthesize_derivatives(psi, psi_lon, psi_mu);
  plan->synthesize_derivatives(zeta, zeta_lon, zeta_mu);
  GridField product(grid);
  for (std::size_t n = 0; n < grid.size(); ++n)
    product.values[n] = zeta_lon.values[n] * psi_mu.values[n] - zeta_mu.values[n] * psi_lon.values[n];
  return plan->analyze(product);
}

double inner(const SpectralField& a, const SpectralField& b) {
  const std::size_t J = std::min(a.truncation(), b.truncation());
  double acc = 0.0;
  for (std::size_t j = 0; j <= J; ++j) {
    acc += (a(j, 0) * std::conj(b(j, 0))).real();
    for (int m = 1; m <= static_cast<int>(j); ++m) acc += 2.0 * (a(j, m) * std::conj(b(j, m))).real();
  }
  return acc;
}

double l2_norm(const SpectralField& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

double remove_mean(SpectralField& a) {
  const double removed = a(0, 0).real() * std::sqrt(4.0 * std::numbers::pi);
  a(0, 0) = 0.0;
  return removed;
}

}  // namespace vortsphere
